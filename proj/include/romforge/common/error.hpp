// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_COMMON_ERROR_HPP
#define ROMFORGE_COMMON_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace romforge
{

/// Broad failure class; the CLI maps it onto its exit code.
enum class ErrorCategory
{
  Usage = 1,
  Data = 2,
  Numerical = 3
};

class Error : public std::runtime_error
{
public:
  Error(ErrorCategory category, const std::string &what)
    : std::runtime_error(what), category_(category)
  {
  }

  ErrorCategory category() const noexcept { return category_; }

private:
  ErrorCategory category_;
};

#define ROMFORGE_DEFINE_ERROR(Name, Category)                                        \
  class Name : public Error                                                          \
  {                                                                                  \
  public:                                                                            \
    explicit Name(const std::string &what) : Error(ErrorCategory::Category, what) {} \
  }

ROMFORGE_DEFINE_ERROR(ConfigError, Usage);
ROMFORGE_DEFINE_ERROR(InvalidRatio, Usage);
ROMFORGE_DEFINE_ERROR(StepOutOfRange, Usage);
ROMFORGE_DEFINE_ERROR(MissingContext, Usage);
ROMFORGE_DEFINE_ERROR(ShapeMismatch, Data);
ROMFORGE_DEFINE_ERROR(DimensionMismatch, Data);
ROMFORGE_DEFINE_ERROR(ModeMismatch, Data);
ROMFORGE_DEFINE_ERROR(FormatError, Data);
ROMFORGE_DEFINE_ERROR(DegenerateFeature, Data);
ROMFORGE_DEFINE_ERROR(DegenerateDomain, Data);
ROMFORGE_DEFINE_ERROR(SamplingBudgetExceeded, Numerical);
ROMFORGE_DEFINE_ERROR(ZeroDenominator, Numerical);

#undef ROMFORGE_DEFINE_ERROR

/// Linear solve did not reach its tolerance. `sample_index` is set when
/// the failure happened while generating a dataset.
class SolverDiverged : public Error
{
public:
  SolverDiverged(const std::string &what, double residual, long sample_index = -1)
    : Error(ErrorCategory::Numerical, what), residual_(residual), sample_index_(sample_index)
  {
  }

  double residual() const noexcept { return residual_; }
  long sample_index() const noexcept { return sample_index_; }

private:
  double residual_;
  long sample_index_;
};

class NonFiniteLoss : public Error
{
public:
  NonFiniteLoss(const std::string &what, int epoch)
    : Error(ErrorCategory::Numerical, what), epoch_(epoch)
  {
  }

  int epoch() const noexcept { return epoch_; }

private:
  int epoch_;
};

/// Formats "expected [a, b, c], got [d, e]" for shape errors.
std::string describe_shapes(const std::string &context, const std::string &expected,
                            const std::string &actual);

}  // namespace romforge

#endif  // ROMFORGE_COMMON_ERROR_HPP
