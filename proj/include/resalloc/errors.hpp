#pragma once

#include <stdexcept>
#include <string>

namespace resalloc {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define RESALLOC_DEFINE_ERROR(Name)      \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

RESALLOC_DEFINE_ERROR(DisconnectedGraph);
RESALLOC_DEFINE_ERROR(InvalidEdge);
RESALLOC_DEFINE_ERROR(DimensionMismatch);
RESALLOC_DEFINE_ERROR(InvalidWeightMatrix);
RESALLOC_DEFINE_ERROR(InvalidArgument);
RESALLOC_DEFINE_ERROR(OutsideBall);
RESALLOC_DEFINE_ERROR(InfeasibleStart);
RESALLOC_DEFINE_ERROR(BarrierBreakdown);
RESALLOC_DEFINE_ERROR(MissingMatrix);
RESALLOC_DEFINE_ERROR(NoFeasibleBeta);
RESALLOC_DEFINE_ERROR(MissingMessage);
RESALLOC_DEFINE_ERROR(ProtocolError);
RESALLOC_DEFINE_ERROR(ScheduleMismatch);
RESALLOC_DEFINE_ERROR(TooLarge);
RESALLOC_DEFINE_ERROR(IoError);

#undef RESALLOC_DEFINE_ERROR

// Raised when an iterative reference solver stops before reaching its
// tolerance. Carries the best residual seen.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

// A tracking step failed; wraps the underlying error with its step index.
class StepFailure : public Error {
 public:
  StepFailure(int step, const std::string& what)
      : Error("step " + std::to_string(step) + ": " + what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

}  // namespace resalloc
