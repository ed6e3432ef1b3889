#ifndef RELCLASS_GRADCHECK_H_
#define RELCLASS_GRADCHECK_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "relclass/parameters.h"

namespace relclass {

struct GradCheckOptions {
  double epsilon = 1e-5;
  double tolerance = 1e-4;
  // Larger tensors are checked on a seeded random sample of coordinates.
  std::size_t max_coords_per_param = 64;
  std::uint64_t seed = 0;
  // Multiplier on the roundoff bound of a difference quotient; see
  // difference_noise().
  double roundoff_safety = 16.0;
  // A coordinate that fails is measured once more with epsilon divided by
  // this factor and keeps the smaller error. 1 disables the retry.
  double retry_divisor = 10.0;
};

struct ParamCheck {
  std::string name;
  std::size_t coords_checked = 0;
  double max_rel_error = 0.0;
  // Worst coordinate.
  std::size_t row = 0;
  std::size_t col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  std::vector<ParamCheck> params;
  double epsilon = 0.0;
  double tolerance = 0.0;
  bool passed = true;

  double max_rel_error() const;
  std::vector<std::string> failing() const;
};

// |a - n| / max(|a|, |n|, floor)
double relative_error(double analytic, double numeric, double floor = 1e-8);

// safety * machine epsilon * max(|loss|, 1) / epsilon: how far a central
// difference can drift from roundoff in the two loss evaluations alone.
double difference_noise(double loss_value, double epsilon, double safety);

// Compares `analytic` against central differences (f(x+e) - f(x-e)) / 2e of
// `loss`, perturbing each checked coordinate of `params` in place and
// restoring it afterwards. Frozen embedding rows are skipped. The relative
// error floor is difference_noise(loss, e) / tolerance, so gradients smaller
// than that are held to the roundoff bound in absolute terms. Throws
// NumericError when the loss is not finite.
GradCheckReport grad_check(const std::function<double()>& loss, ParameterSet& params,
                           const GradientSet& analytic,
                           const GradCheckOptions& options = {});

void print_report(std::ostream& os, const GradCheckReport& report);

}  // namespace relclass

#endif  // RELCLASS_GRADCHECK_H_
