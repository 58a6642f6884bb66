#pragma once

#include <stdexcept>
#include <string>

namespace mibfvm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MIBFVM_DEFINE_ERROR(Name)          \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

// geometry
MIBFVM_DEFINE_ERROR(NoSignChange);
MIBFVM_DEFINE_ERROR(DegenerateNormal);

// mesh
MIBFVM_DEFINE_ERROR(InvalidMeshSpec);
MIBFVM_DEFINE_ERROR(ResolutionTooCoarse);

// stencil
MIBFVM_DEFINE_ERROR(DuplicateNodes);

// mib
MIBFVM_DEFINE_ERROR(DegeneratePair);
MIBFVM_DEFINE_ERROR(NoViablePair);
MIBFVM_DEFINE_ERROR(StencilUnavailable);
MIBFVM_DEFINE_ERROR(SingularPairSystem);
MIBFVM_DEFINE_ERROR(InsufficientNodes);
MIBFVM_DEFINE_ERROR(UnresolvableNode);

// system
MIBFVM_DEFINE_ERROR(MissingFictitious);

// cases / harness
MIBFVM_DEFINE_ERROR(UnknownCase);
MIBFVM_DEFINE_ERROR(DegenerateError);

#undef MIBFVM_DEFINE_ERROR

class NoConvergence : public Error {
 public:
  NoConvergence(int iterations, double residual)
      : Error("iterative solve did not converge after " + std::to_string(iterations) +
              " iterations (relative residual " + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

}  // namespace mibfvm
