#include <CLI11.hpp>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mibfvm/mibfvm.hpp"

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// key=value per line; '#' starts a comment.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mibfvm::Error("cannot open config file " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw mibfvm::Error(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::vector<int> parse_resolutions(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::size_t used = 0;
    const int n = std::stoi(item, &used);
    if (used != item.size() || n <= 0) throw CLI::ValidationError("--resolutions", "bad resolution '" + item + "'");
    out.push_back(n);
  }
  if (out.empty()) throw CLI::ValidationError("--resolutions", "at least one resolution is required");
  return out;
}

struct SliceSpec {
  int axis = 2;
  double value = 0.0;
};

SliceSpec parse_slice(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq != 1 || std::string("xyz").find(text[0]) == std::string::npos) {
    throw CLI::ValidationError("--dump-slice", "expected <axis>=<value>, e.g. z=0");
  }
  SliceSpec s;
  s.axis = static_cast<int>(std::string("xyz").find(text[0]));
  s.value = std::stod(text.substr(2));
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matched interface and boundary finite volume solver: convergence studies"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list-cases", "List the built-in benchmark cases");

  auto* run = app.add_subcommand("run", "Run a convergence study for one case");
  std::string config_path;
  std::string case_name;
  std::string resolutions_text;
  double tol = 1e-10;
  int max_iter = 0;
  std::string csv_path;
  std::vector<std::string> slice_args;
  bool verbose = false;
  std::string diagnostics_prefix;
  std::string export_prefix;

  run->add_option("--config", config_path, "key=value file; command-line flags take precedence");
  auto* opt_case = run->add_option("--case", case_name, "Case name (see list-cases)");
  auto* opt_res = run->add_option("--resolutions", resolutions_text, "Comma-separated nominal resolutions");
  auto* opt_tol = run->add_option("--tol", tol, "Relative residual tolerance")->check(CLI::PositiveNumber);
  auto* opt_iter = run->add_option("--max-iter", max_iter, "Iteration cap (default 100*sqrt(unknowns))");
  auto* opt_csv = run->add_option("--csv", csv_path, "Write the convergence table as CSV");
  auto* opt_slice =
      run->add_option("--dump-slice", slice_args, "Error on the plane nearest <axis>=<value> at the finest mesh")
          ->expected(2);
  auto* opt_verbose = run->add_flag("--verbose,-v", verbose, "Progress output and diagnostic CSV files");
  auto* opt_diag = run->add_option("--diagnostics-prefix", diagnostics_prefix,
                                   "Path prefix for diagnostic CSV files (default: the case name)");
  auto* opt_export =
      run->add_option("--export-matrix", export_prefix, "Write matrix/rhs triplet files with this prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*list) {
      for (const auto& name : mibfvm::case_names()) {
        const auto c = mibfvm::make_case(name);
        std::cout << name << "\t" << c.dim() << "D\t" << c.description() << '\n';
      }
      return 0;
    }

    if (!config_path.empty()) {
      for (const auto& [key, value] : read_config(config_path)) {
        const auto unset = [](CLI::Option* o) { return o->count() == 0; };
        if (key == "case") {
          if (unset(opt_case)) case_name = value;
        } else if (key == "resolutions") {
          if (unset(opt_res)) resolutions_text = value;
        } else if (key == "tol") {
          if (unset(opt_tol)) tol = std::stod(value);
        } else if (key == "max-iter" || key == "max_iter") {
          if (unset(opt_iter)) max_iter = std::stoi(value);
        } else if (key == "csv") {
          if (unset(opt_csv)) csv_path = value;
        } else if (key == "dump-slice" || key == "dump_slice") {
          if (unset(opt_slice)) {
            std::stringstream ss(value);
            std::string a, b;
            ss >> a >> b;
            slice_args = {a, b};
          }
        } else if (key == "verbose") {
          if (unset(opt_verbose)) verbose = value == "1" || value == "true" || value == "yes";
        } else if (key == "diagnostics-prefix" || key == "diagnostics_prefix") {
          if (unset(opt_diag)) diagnostics_prefix = value;
        } else if (key == "export-matrix" || key == "export_matrix") {
          if (unset(opt_export)) export_prefix = value;
        } else {
          throw mibfvm::Error("unknown config key '" + key + "'");
        }
      }
    }
    if (case_name.empty()) {
      std::cerr << "error: --case is required\n";
      return 2;
    }
    if (!(tol > 0.0)) {
      std::cerr << "error: --tol must be positive\n";
      return 2;
    }

    const auto problem = mibfvm::make_case(case_name);
    std::vector<int> resolutions =
        resolutions_text.empty() ? problem.default_resolutions() : parse_resolutions(resolutions_text);
    std::optional<SliceSpec> slice;
    if (!slice_args.empty()) {
      if (slice_args.size() != 2) throw CLI::ValidationError("--dump-slice", "expected <axis>=<value> <file>");
      slice = parse_slice(slice_args[0]);
    }

    mibfvm::RunOptions options;
    options.solver.rel_tol = tol;
    options.solver.max_iter = max_iter;
    options.verbose = verbose;
    options.diagnostics_prefix = diagnostics_prefix.empty() ? case_name : diagnostics_prefix;
    options.matrix_export_prefix = export_prefix;
    options.log = [](const std::string& msg) { std::cerr << msg << '\n'; };

    mibfvm::ResolutionResult finest;
    const auto report = mibfvm::run_convergence(case_name, resolutions, options, &finest);
    std::cout << mibfvm::format_report(report);
    if (!csv_path.empty()) mibfvm::write_report_csv(report, csv_path);
    if (slice) mibfvm::write_slice_csv(finest.computed, finest.exact, slice->axis, slice->value, slice_args[1]);
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    try {
      std::rethrow_if_nested(e);
    } catch (const std::exception& inner) {
      std::cerr << "  caused by: " << inner.what() << '\n';
    }
    return 1;
  }
}
