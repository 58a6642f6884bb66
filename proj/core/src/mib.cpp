#include "mibfvm/mib.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "mibfvm/errors.hpp"
#include "mibfvm/stencil.hpp"

namespace mibfvm {

double CMatrix::norm() const {
  double s = 0.0;
  for (int i = 0; i < rows(); ++i)
    for (int j = 0; j < cols(); ++j) s += entries[i][j] * entries[i][j];
  return std::sqrt(s);
}

CMatrix build_c_matrix(const LocalFrame& frame, double beta_plus, double beta_minus) {
  CMatrix C;
  C.dim = frame.dim;
  C.beta_plus = beta_plus;
  C.beta_minus = beta_minus;
  for (int t = 0; t < frame.dim; ++t) {
    C.entries[0][2 * t] = frame.P[0][t] * beta_plus;
    C.entries[0][2 * t + 1] = -frame.P[0][t] * beta_minus;
    for (int r = 1; r < frame.dim; ++r) {
      C.entries[r][2 * t] = frame.P[r][t];
      C.entries[r][2 * t + 1] = -frame.P[r][t];
    }
  }
  return C;
}

EliminationCoeffs elimination_coeffs(const CMatrix& C, int l, int m) {
  if (C.dim != 3) throw std::invalid_argument("elimination_coeffs: 3D matrix required");
  if (l < 0 || m > 5 || l >= m) throw std::invalid_argument("elimination_coeffs: need 0 <= l < m <= 5");
  const Point cl{C.entries[0][l], C.entries[1][l], C.entries[2][l]};
  const Point cm{C.entries[0][m], C.entries[1][m], C.entries[2][m]};
  const Point k = cross(cl, cm);
  if (!(norm(k) > 1e-12 * norm(cl) * norm(cm))) {
    throw DegeneratePair("elimination_coeffs: columns " + std::to_string(l) + " and " + std::to_string(m) +
                         " are parallel");
  }
  return {k[0], k[1], k[2]};
}

EliminationCoeffs elimination_coeffs_2d(const CMatrix& C, int m) {
  if (C.dim != 2) throw std::invalid_argument("elimination_coeffs_2d: 2D matrix required");
  if (m < 0 || m > 3) throw std::invalid_argument("elimination_coeffs_2d: need 0 <= m <= 3");
  const double a = C.entries[1][m];
  const double b = -C.entries[0][m];
  if (!(std::hypot(a, b) > 1e-12 * C.norm())) {
    throw DegeneratePair("elimination_coeffs_2d: column " + std::to_string(m) + " vanishes");
  }
  return {a, b, 0.0};
}

std::array<double, 6> combined_row(const CMatrix& C, const EliminationCoeffs& k) {
  std::array<double, 6> row{};
  for (int j = 0; j < C.cols(); ++j) {
    row[j] = k.a * C.entries[0][j] + k.b * C.entries[1][j] + (C.dim == 3 ? k.c * C.entries[2][j] : 0.0);
  }
  return row;
}

JumpDataSample jump_sample(const CaseDefinition& problem, const LocalFrame& frame) {
  JumpDataSample j;
  j.point = frame.point;
  j.Phi = problem.phi_jump(frame.point);
  j.Psi = problem.psi_jump(frame.point, frame.normal);
  const Point g = problem.grad_jump(frame.point);
  j.Phi_eta = dot(g, frame.P[1]);
  j.Phi_zeta = frame.dim == 3 ? dot(g, frame.P[2]) : 0.0;
  return j;
}

void StencilExpr::add(const StencilExpr& other, double scale) {
  for (const auto& [n, w] : other.real) real.emplace_back(n, scale * w);
  for (const auto& [k, w] : other.unknowns) unknowns.emplace_back(k, scale * w);
  constant += scale * other.constant;
}

void StencilExpr::compress() {
  std::sort(real.begin(), real.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<std::pair<NodeId, double>> merged;
  for (const auto& t : real) {
    if (!merged.empty() && merged.back().first == t.first) {
      merged.back().second += t.second;
    } else {
      merged.push_back(t);
    }
  }
  real = std::move(merged);
  auto key_less = [](const auto& x, const auto& y) {
    return std::pair(x.first.intersection, x.first.end) < std::pair(y.first.intersection, y.first.end);
  };
  std::sort(unknowns.begin(), unknowns.end(), key_less);
  std::vector<std::pair<UnknownKey, double>> u;
  for (const auto& t : unknowns) {
    if (!u.empty() && u.back().first == t.first) {
      u.back().second += t.second;
    } else {
      u.push_back(t);
    }
  }
  unknowns = std::move(u);
}

namespace {

std::string point_text(const Point& p, int dim) {
  std::ostringstream os;
  os << std::setprecision(6) << '(' << p[0] << ", " << p[1];
  if (dim == 3) os << ", " << p[2];
  os << ')';
  return os.str();
}

// Offset of the side-s window centre from the lower endpoint: 0 or 1.
int window_centre_offset(const ClassifiedMesh& mesh, const Intersection& X, Side s) {
  return mesh.side(X.lower) == s ? 0 : 1;
}

// Window of three real side-s nodes on an auxiliary line parallel to the
// intersection axis, shifted by q cells along t.
struct LevelWindow {
  int q = 0;
  int start = 0;  // first node offset from the lower endpoint along the axis
  std::array<NodeId, 3> nodes{};
  double distance = 0.0;
};

std::optional<LevelWindow> level_window(const ClassifiedMesh& mesh, const Intersection& X, int t, int q,
                                        Side s) {
  const auto& spec = mesh.spec();
  const auto base = spec.shifted(X.lower, t, q);
  if (!base) return std::nullopt;
  std::optional<LevelWindow> best;
  for (int start = -2; start <= 1; ++start) {
    LevelWindow w;
    w.q = q;
    w.start = start;
    bool ok = true;
    for (int k = 0; k < 3 && ok; ++k) {
      const auto node = spec.shifted(*base, X.axis, start + k);
      ok = node && mesh.side(*node) == s;
      if (ok) w.nodes[k] = *node;
    }
    if (!ok) continue;
    w.distance = std::abs(start + 1 - X.fraction);
    if (!best || w.distance < best->distance) best = w;
  }
  return best;
}

// Level-0 window resolution: whether the side-s window stays in the domain.
bool axis_window_in_domain(const ClassifiedMesh& mesh, const Intersection& X, Side s) {
  const NodeId centre = mesh.side(X.lower) == s ? X.lower : X.upper;
  return mesh.spec().shifted(centre, X.axis, -1) && mesh.spec().shifted(centre, X.axis, 1);
}

struct TangentialPlan {
  std::array<int, 3> levels{};
  std::array<std::optional<LevelWindow>, 3> windows;  // empty entry at level 0
  double distance = 0.0;
};

std::optional<TangentialPlan> plan_tangential(const ClassifiedMesh& mesh, const Intersection& X, int t,
                                              Side s) {
  if (!axis_window_in_domain(mesh, X, s)) return std::nullopt;
  static constexpr std::array<std::array<int, 3>, 3> kLevelSets{{{-1, 0, 1}, {0, 1, 2}, {-2, -1, 0}}};
  for (std::size_t set = 0; set < kLevelSets.size(); ++set) {
    TangentialPlan plan;
    plan.levels = kLevelSets[set];
    plan.distance = set == 0 ? 0.0 : 1.0;
    bool ok = true;
    for (int i = 0; i < 3 && ok; ++i) {
      const int q = plan.levels[i];
      if (q == 0) continue;
      plan.windows[i] = level_window(mesh, X, t, q, s);
      ok = plan.windows[i].has_value();
      if (ok) plan.distance = std::max(plan.distance, plan.windows[i]->distance);
    }
    if (ok) return plan;
  }
  return std::nullopt;
}

int stencil_score(const ClassifiedMesh& mesh, const Intersection& X, int t, Side s) {
  const auto& spec = mesh.spec();
  const int c = window_centre_offset(mesh, X, s);
  int count = 0;
  for (int q = -1; q <= 1; ++q) {
    const auto base = spec.shifted(X.lower, t, q);
    if (!base) continue;
    for (int k = c - 1; k <= c + 1; ++k) {
      const auto node = spec.shifted(*base, X.axis, k);
      if (node && mesh.side(*node) == s) ++count;
    }
  }
  return count;
}

}  // namespace

std::array<DerivativeScore, 6> derivative_scores(const ClassifiedMesh& mesh, int intersection) {
  const auto& X = mesh.intersection(intersection);
  std::array<DerivativeScore, 6> scores{};
  for (int t = 0; t < mesh.dim(); ++t) {
    if (t == X.axis) continue;
    for (Side s : {Side::Plus, Side::Minus}) {
      auto& out = scores[derivative_column(t, s)];
      const auto plan = plan_tangential(mesh, X, t, s);
      if (!plan) {
        out.score = -1;
        out.window_distance = 0.0;
        continue;
      }
      out.score = stencil_score(mesh, X, t, s);
      out.window_distance = plan->distance;
    }
  }
  return scores;
}

std::vector<EliminationChoice> rank_elimination_pairs(const CMatrix& C, int axis,
                                                      const std::array<DerivativeScore, 6>& scores) {
  std::vector<int> off;
  for (int t = 0; t < C.dim; ++t) {
    if (t == axis) continue;
    off.push_back(derivative_column(t, Side::Plus));
    off.push_back(derivative_column(t, Side::Minus));
  }
  struct Ranked {
    EliminationChoice choice;
    int score;
    double distance;
    int tier = 0;  // 0: both columns from one side, 1: mixed
  };
  std::vector<Ranked> ranked;
  const auto retained_available = [&](std::initializer_list<int> eliminated) {
    for (int col : off) {
      if (std::find(eliminated.begin(), eliminated.end(), col) != eliminated.end()) continue;
      if (scores[col].score < 0) return false;
    }
    return true;
  };

  if (C.dim == 2) {
    for (int m : off) {
      if (!retained_available({m})) continue;
      EliminationChoice ch;
      ch.l = m;
      try {
        ch.coeffs = elimination_coeffs_2d(C, m);
      } catch (const DegeneratePair&) {
        continue;
      }
      ch.row = combined_row(C, ch.coeffs);
      ch.row[m] = 0.0;
      ranked.push_back({ch, scores[m].score, scores[m].window_distance});
    }
  } else {
    // Conditioning is judged with the flux row scaled to unit coefficient size.
    CMatrix scaled = C;
    const double bmax = std::max(C.beta_plus, C.beta_minus);
    for (int j = 0; j < 6; ++j) scaled.entries[0][j] /= bmax;
    for (std::size_t i = 0; i < off.size(); ++i) {
      for (std::size_t k = i + 1; k < off.size(); ++k) {
        const int l = off[i];
        const int m = off[k];
        if (!retained_available({l, m})) continue;
        EliminationChoice ch;
        ch.l = l;
        ch.m = m;
        try {
          ch.coeffs = elimination_coeffs(C, l, m);
        } catch (const DegeneratePair&) {
          continue;
        }
        const Point sl{scaled.entries[0][l], scaled.entries[1][l], scaled.entries[2][l]};
        const Point sm{scaled.entries[0][m], scaled.entries[1][m], scaled.entries[2][m]};
        if (norm(cross(sl, sm)) < 0.05 * norm(sl) * norm(sm)) continue;
        ch.row = combined_row(C, ch.coeffs);
        ch.row[l] = 0.0;
        ch.row[m] = 0.0;
        ranked.push_back({ch, scores[l].score + scores[m].score,
                          scores[l].window_distance + scores[m].window_distance,
                          column_side(l) == column_side(m) ? 0 : 1});
      }
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& x, const Ranked& y) {
    if (x.tier != y.tier) return x.tier < y.tier;
    if (x.score != y.score) return x.score < y.score;
    if (x.distance != y.distance) return x.distance > y.distance;
    return std::pair(x.choice.l, x.choice.m) < std::pair(y.choice.l, y.choice.m);
  });
  std::vector<EliminationChoice> out;
  out.reserve(ranked.size());
  for (auto& r : ranked) out.push_back(r.choice);
  return out;
}

EliminationChoice select_elimination_pair(const ClassifiedMesh& mesh, int intersection, const CMatrix& C) {
  const auto& X = mesh.intersection(intersection);
  const auto ranked = rank_elimination_pairs(C, X.axis, derivative_scores(mesh, intersection));
  if (ranked.empty()) {
    throw NoViablePair("no admissible elimination pair at " + point_text(X.point, mesh.dim()));
  }
  return ranked.front();
}

StencilExpr axis_window(const ClassifiedMesh& mesh, int intersection, Side s, int deriv_order) {
  const auto& spec = mesh.spec();
  const auto& X = mesh.intersection(intersection);
  const int c = window_centre_offset(mesh, X, s);
  const NodeId centre = c == 0 ? X.lower : X.upper;
  const double offsets[3] = {c - 1.0, static_cast<double>(c), c + 1.0};
  auto w = cached_fd_weights(X.fraction, offsets, deriv_order);
  if (deriv_order == 1) {
    const double h = spec.spacing(X.axis);
    for (double& v : w) v /= h;
  }
  StencilExpr e;
  for (int k = 0; k < 3; ++k) {
    const auto node = spec.shifted(centre, X.axis, k - 1);
    if (!node) {
      throw InsufficientNodes("interpolation window at " + point_text(X.point, mesh.dim()) +
                              " leaves the domain");
    }
    if (mesh.side(*node) == s) {
      e.real.emplace_back(*node, w[k]);
    } else {
      const int other = mesh.intersection_between(*node, centre, X.axis);
      const int end = mesh.intersection(other).lower == *node ? 0 : 1;
      e.unknowns.emplace_back(UnknownKey{other, end}, w[k]);
    }
  }
  return e;
}

StencilExpr approx_tangential_derivative(const ClassifiedMesh& mesh, int intersection, int t, Side s) {
  const auto& X = mesh.intersection(intersection);
  if (t == X.axis || t < 0 || t >= mesh.dim()) {
    throw std::invalid_argument("approx_tangential_derivative: t must be an off-axis direction");
  }
  const auto plan = plan_tangential(mesh, X, t, s);
  if (!plan) {
    throw StencilUnavailable("no auxiliary stencil for u_" + std::string(axis_name(t)) +
                             (s == Side::Plus ? "+" : "-") + " at " + point_text(X.point, mesh.dim()));
  }
  const double levels[3] = {static_cast<double>(plan->levels[0]), static_cast<double>(plan->levels[1]),
                            static_cast<double>(plan->levels[2])};
  auto d = cached_fd_weights(0.0, levels, 1);
  const double ht = mesh.spec().spacing(t);
  StencilExpr out;
  for (int i = 0; i < 3; ++i) {
    const double wt = d[i] / ht;
    if (plan->levels[i] == 0) {
      out.add(axis_window(mesh, intersection, s, 0), wt);
      continue;
    }
    const auto& lw = *plan->windows[i];
    const double offsets[3] = {static_cast<double>(lw.start), lw.start + 1.0, lw.start + 2.0};
    const auto wi = cached_fd_weights(X.fraction, offsets, 0);
    for (int k = 0; k < 3; ++k) out.real.emplace_back(lw.nodes[k], wt * wi[k]);
  }
  out.compress();
  return out;
}

double FictitiousValueForm::evaluate(std::span<const double> nodal) const {
  double v = constant;
  for (const auto& [n, w] : terms) v += w * nodal[n];
  return v;
}

std::array<StencilExpr, 2> fictitious_equations(const ClassifiedMesh& mesh, int intersection,
                                                const JumpDataSample& jump, const CMatrix& C,
                                                const EliminationChoice& choice) {
  const auto& X = mesh.intersection(intersection);
  std::array<StencilExpr, 2> eq;
  // [u] = Phi
  eq[0].add(axis_window(mesh, intersection, Side::Plus, 0), 1.0);
  eq[0].add(axis_window(mesh, intersection, Side::Minus, 0), -1.0);
  eq[0].constant -= jump.Phi;
  // a [beta u_xi] + b [u_eta] + c [u_zeta] = a Psi + b Phi_eta + c Phi_zeta
  for (int col = 0; col < C.cols(); ++col) {
    if (col == choice.l || col == choice.m) continue;
    const double coef = choice.row[col];
    if (coef == 0.0) continue;
    const int t = column_axis(col);
    const Side s = column_side(col);
    if (t == X.axis) {
      eq[1].add(axis_window(mesh, intersection, s, 1), coef);
    } else {
      eq[1].add(approx_tangential_derivative(mesh, intersection, t, s), coef);
    }
  }
  eq[1].constant -= choice.coeffs.a * jump.Psi + choice.coeffs.b * jump.Phi_eta + choice.coeffs.c * jump.Phi_zeta;
  eq[0].compress();
  eq[1].compress();
  return eq;
}

namespace {

FictitiousValueForm make_form(const ClassifiedMesh& mesh, int intersection, int end, bool coupled) {
  const auto& X = mesh.intersection(intersection);
  FictitiousValueForm f;
  f.node = end == 0 ? X.lower : X.upper;
  f.side = mesh.side(end == 0 ? X.upper : X.lower);
  f.source_axis = X.axis;
  f.source_intersection = intersection;
  f.coupled = coupled;
  return f;
}

// Accumulates sum_e coef[e] * (-(real_e + constant_e)) into a form.
void accumulate_solution(FictitiousValueForm& f, const std::vector<const StencilExpr*>& eqs,
                         const std::vector<double>& coef) {
  std::map<NodeId, double> terms;
  double constant = 0.0;
  for (std::size_t e = 0; e < eqs.size(); ++e) {
    if (coef[e] == 0.0) continue;
    for (const auto& [n, w] : eqs[e]->real) terms[n] -= coef[e] * w;
    constant -= coef[e] * eqs[e]->constant;
  }
  f.terms.assign(terms.begin(), terms.end());
  f.constant = constant;
}

int union_support(const FictitiousValueForm& a, const FictitiousValueForm& b) {
  std::set<NodeId> s;
  for (const auto& t : a.terms) s.insert(t.first);
  for (const auto& t : b.terms) s.insert(t.first);
  return static_cast<int>(s.size());
}

enum class AttemptStatus { Solved, NeedsCluster, Failed };

struct PairAttempt {
  AttemptStatus status = AttemptStatus::Failed;
  FictitiousPair pair;
  std::array<StencilExpr, 2> equations;
  EliminationChoice choice;
  std::string message;
  enum class Reason { None, Insufficient, NoPair, Singular } reason = Reason::None;
};

PairAttempt attempt_pair(const ClassifiedMesh& mesh, int intersection, const JumpDataSample& jump,
                         const CaseDefinition& problem) {
  PairAttempt out;
  const auto& X = mesh.intersection(intersection);
  const Point& p = X.point;
  const CMatrix C = build_c_matrix(X.frame, problem.beta(Side::Plus, p), problem.beta(Side::Minus, p));
  const auto ranked = rank_elimination_pairs(C, X.axis, derivative_scores(mesh, intersection));
  if (ranked.empty()) {
    out.reason = PairAttempt::Reason::NoPair;
    out.message = "no admissible elimination pair at " + point_text(p, mesh.dim());
    return out;
  }
  bool any_equations = false;
  for (const auto& choice : ranked) {
    std::array<StencilExpr, 2> eq;
    try {
      eq = fictitious_equations(mesh, intersection, jump, C, choice);
    } catch (const InsufficientNodes& e) {
      out.reason = PairAttempt::Reason::Insufficient;
      out.message = e.what();
      return out;
    } catch (const StencilUnavailable& e) {
      out.reason = PairAttempt::Reason::NoPair;
      out.message = e.what();
      continue;
    }
    bool foreign = false;
    double M[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (int r = 0; r < 2; ++r) {
      for (const auto& [k, w] : eq[r].unknowns) {
        if (k.intersection != intersection) {
          foreign = true;
        } else {
          M[r][k.end] += w;
        }
      }
    }
    if (foreign) {
      if (!any_equations) {
        out.equations = eq;
        out.choice = choice;
      }
      out.status = AttemptStatus::NeedsCluster;
      out.message = "interpolation window at " + point_text(p, mesh.dim()) +
                    " needs another intersection's fictitious value";
      return out;
    }
    if (!any_equations) {
      out.equations = eq;
      out.choice = choice;
      any_equations = true;
    }
    const double det = M[0][0] * M[1][1] - M[0][1] * M[1][0];
    const double scale = std::hypot(M[0][0], M[0][1]) * std::hypot(M[1][0], M[1][1]);
    if (!(std::abs(det) > 1e-12 * scale)) {
      out.reason = PairAttempt::Reason::Singular;
      out.message = "singular fictitious pair system at " + point_text(p, mesh.dim());
      continue;
    }
    const double inv[2][2] = {{M[1][1] / det, -M[0][1] / det}, {-M[1][0] / det, M[0][0] / det}};
    std::vector<const StencilExpr*> eqs{&eq[0], &eq[1]};
    out.pair.lower = make_form(mesh, intersection, 0, false);
    out.pair.upper = make_form(mesh, intersection, 1, false);
    accumulate_solution(out.pair.lower, eqs, {inv[0][0], inv[0][1]});
    accumulate_solution(out.pair.upper, eqs, {inv[1][0], inv[1][1]});
    out.pair.choice = choice;
    out.pair.det = det;
    out.equations = eq;
    out.choice = choice;
    out.status = AttemptStatus::Solved;
    out.reason = PairAttempt::Reason::None;
    return out;
  }
  return out;
}

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

FictitiousPair solve_fictitious_pair(const ClassifiedMesh& mesh, int intersection, const JumpDataSample& jump,
                                     const CaseDefinition& problem) {
  auto attempt = attempt_pair(mesh, intersection, jump, problem);
  switch (attempt.status) {
    case AttemptStatus::Solved:
      return std::move(attempt.pair);
    case AttemptStatus::NeedsCluster:
      throw InsufficientNodes(attempt.message);
    case AttemptStatus::Failed:
      break;
  }
  switch (attempt.reason) {
    case PairAttempt::Reason::Insufficient:
      throw InsufficientNodes(attempt.message);
    case PairAttempt::Reason::Singular:
      throw SingularPairSystem(attempt.message);
    default:
      throw NoViablePair(attempt.message);
  }
}

std::string_view to_string(IntersectionStatus s) {
  switch (s) {
    case IntersectionStatus::Pair:
      return "pair";
    case IntersectionStatus::Coupled:
      return "coupled";
    default:
      return "failed";
  }
}

const FictitiousValueForm& FictitiousTable::flux_form(int intersection, int end) const {
  const int id = records.at(intersection).resolved[end];
  if (id < 0) {
    throw MissingFictitious("no fictitious value resolved for intersection " + std::to_string(intersection));
  }
  return forms[id];
}

FictitiousTable solve_fictitious_values(const ClassifiedMesh& mesh, const CaseDefinition& problem,
                                        const MibOptions& options) {
  const int count = static_cast<int>(mesh.intersections().size());
  FictitiousTable table;
  table.records.resize(count);
  std::vector<PairAttempt> attempts(count);
  for (int id = 0; id < count; ++id) {
    const auto& X = mesh.intersection(id);
    attempts[id] = attempt_pair(mesh, id, jump_sample(problem, X.frame), problem);
    auto& rec = table.records[id];
    auto& at = attempts[id];
    if (at.status == AttemptStatus::Solved) {
      rec.status = IntersectionStatus::Pair;
      rec.l = at.pair.choice.l;
      rec.m = at.pair.choice.m;
      rec.det = at.pair.det;
      rec.support = union_support(at.pair.lower, at.pair.upper);
      rec.own = {static_cast<int>(table.forms.size()), static_cast<int>(table.forms.size()) + 1};
      table.forms.push_back(std::move(at.pair.lower));
      table.forms.push_back(std::move(at.pair.upper));
      ++table.stats.pair_solves;
      table.stats.max_pair_support = std::max(table.stats.max_pair_support, rec.support);
    } else {
      rec.status = IntersectionStatus::Failed;
      rec.failure = at.message;
      if (at.status == AttemptStatus::NeedsCluster) {
        rec.l = at.choice.l;
        rec.m = at.choice.m;
      }
    }
  }

  if (options.coupled_clusters) {
    DisjointSets sets(count);
    std::vector<char> in_cluster(count, 0);
    for (int id = 0; id < count; ++id) {
      if (attempts[id].status != AttemptStatus::NeedsCluster) continue;
      in_cluster[id] = 1;
      for (const auto& eq : attempts[id].equations) {
        for (const auto& [k, w] : eq.unknowns) {
          in_cluster[k.intersection] = 1;
          sets.unite(id, k.intersection);
        }
      }
    }
    std::map<int, std::vector<int>> clusters;
    for (int id = 0; id < count; ++id)
      if (in_cluster[id]) clusters[sets.find(id)].push_back(id);

    for (auto& [root, members] : clusters) {
      ++table.stats.clusters;
      bool usable = true;
      for (int id : members) {
        if (attempts[id].status == AttemptStatus::Failed) usable = false;
      }
      const int K = static_cast<int>(members.size());
      std::map<int, int> position;
      for (int i = 0; i < K; ++i) position[members[i]] = i;
      std::string failure;
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * K, 2 * K);
      std::vector<const StencilExpr*> eqs;
      if (usable) {
        for (int i = 0; i < K; ++i) {
          for (int r = 0; r < 2; ++r) {
            const auto& eq = attempts[members[i]].equations[r];
            eqs.push_back(&eq);
            for (const auto& [k, w] : eq.unknowns) {
              auto it = position.find(k.intersection);
              if (it == position.end()) {
                usable = false;
                continue;
              }
              M(2 * i + r, 2 * it->second + k.end) += w;
            }
          }
        }
      }
      Eigen::MatrixXd inv;
      if (usable) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
        const auto& sv = svd.singularValues();
        if (!(sv(sv.size() - 1) > 1e-8 * sv(0))) {
          usable = false;
          failure = "singular coupled system for a cluster of " + std::to_string(K) + " intersections";
        } else {
          inv = M.fullPivLu().inverse();
        }
      } else if (failure.empty()) {
        failure = "cluster contains an intersection without usable equations";
      }
      for (int i = 0; i < K; ++i) {
        const int id = members[i];
        if (attempts[id].status != AttemptStatus::NeedsCluster) continue;
        auto& rec = table.records[id];
        if (!usable) {
          rec.failure += "; " + failure;
          continue;
        }
        std::array<FictitiousValueForm, 2> f{make_form(mesh, id, 0, true), make_form(mesh, id, 1, true)};
        for (int end = 0; end < 2; ++end) {
          std::vector<double> coef(2 * K);
          for (int e = 0; e < 2 * K; ++e) coef[e] = inv(2 * i + end, e);
          accumulate_solution(f[end], eqs, coef);
        }
        rec.status = IntersectionStatus::Coupled;
        rec.failure.clear();
        rec.det = M.determinant();
        rec.support = union_support(f[0], f[1]);
        rec.own = {static_cast<int>(table.forms.size()), static_cast<int>(table.forms.size()) + 1};
        table.forms.push_back(std::move(f[0]));
        table.forms.push_back(std::move(f[1]));
        ++table.stats.coupled_solves;
      }
    }
  }
  for (const auto& rec : table.records)
    if (rec.status == IntersectionStatus::Failed) ++table.stats.failed;
  return table;
}

void disassociation_pass(const ClassifiedMesh& mesh, FictitiousTable& table) {
  const auto& spec = mesh.spec();
  const int count = static_cast<int>(mesh.intersections().size());
  table.stats.disassociated_fluxes = 0;
  for (int id = 0; id < count; ++id) {
    const auto& X = mesh.intersection(id);
    auto& rec = table.records[id];
    for (int end = 0; end < 2; ++end) {
      const NodeId q = end == 0 ? X.lower : X.upper;
      const NodeId p = end == 0 ? X.upper : X.lower;
      rec.resolved[end] = -1;
      rec.disassociated[end] = false;
      if (spec.is_boundary(p)) continue;
      if (rec.own[end] >= 0) {
        rec.resolved[end] = rec.own[end];
        continue;
      }
      // Forms at q from other intersections: same axis first, then the rest.
      std::vector<std::pair<int, int>> others;
      std::vector<int> axes{X.axis};
      for (int b = 0; b < mesh.dim(); ++b)
        if (b != X.axis) axes.push_back(b);
      for (int b : axes) {
        for (int dir : {-1, 1}) {
          const auto nb = spec.shifted(q, b, dir);
          if (!nb) continue;
          const int other = mesh.intersection_between(q, *nb, b);
          if (other < 0 || other == id) continue;
          const int other_end = mesh.intersection(other).lower == q ? 0 : 1;
          const int form = table.records[other].own[other_end];
          if (form >= 0) others.emplace_back(form, table.forms[form].coupled ? 1 : 0);
        }
      }
      std::stable_sort(others.begin(), others.end(),
                       [](const auto& a, const auto& b) { return a.second < b.second; });
      if (others.empty()) {
        std::string why = rec.failure.empty() ? std::string() : " (" + rec.failure + ")";
        throw UnresolvableNode("no fictitious value available at node " +
                               point_text(spec.position(q), mesh.dim()) + " for the " +
                               std::string(axis_name(X.axis)) + "-flux" + why + "; refine the mesh");
      }
      rec.resolved[end] = others.front().first;
      rec.disassociated[end] = true;
      ++table.stats.disassociated_fluxes;
    }
  }
  table.resolved = true;
}

void write_mib_diagnostics(const ClassifiedMesh& mesh, const FictitiousTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  const auto column_name = [](int col) -> std::string {
    if (col < 0) return "";
    return "u" + std::string(axis_name(column_axis(col))) + (column_side(col) == Side::Plus ? "+" : "-");
  };
  out << std::setprecision(10) << "id,axis,x,y,z,l,m,det,status,disassociated,support\n";
  for (std::size_t id = 0; id < table.records.size(); ++id) {
    const auto& X = mesh.intersection(static_cast<int>(id));
    const auto& r = table.records[id];
    out << id << ',' << axis_name(X.axis) << ',' << X.point[0] << ',' << X.point[1] << ',' << X.point[2] << ','
        << column_name(r.l) << ',' << column_name(r.m) << ',' << r.det << ',' << to_string(r.status) << ','
        << ((r.disassociated[0] || r.disassociated[1]) ? 1 : 0) << ',' << r.support << '\n';
  }
}

}  // namespace mibfvm
