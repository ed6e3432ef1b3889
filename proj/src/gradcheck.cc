#include "relclass/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <utility>

namespace relclass {
namespace {

using Coord = std::pair<std::size_t, std::size_t>;

std::vector<Coord> sample_coords(std::vector<Coord> all, std::size_t limit,
                                 std::mt19937_64& rng) {
  if (all.size() <= limit) return all;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(limit);
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<Coord> coords_for(const Parameter& p, std::size_t index,
                              const GradientSet& analytic, std::size_t limit,
                              std::mt19937_64& rng) {
  const std::size_t cols = p.value.cols();
  std::vector<Coord> all;
  if (p.kind != ParamKind::kEmbedding) {
    all.reserve(p.value.size());
    for (std::size_t r = 0; r < p.value.rows(); ++r)
      for (std::size_t c = 0; c < cols; ++c) all.emplace_back(r, c);
    return sample_coords(std::move(all), limit, rng);
  }
  // Embeddings: every touched row, plus a couple of untouched rows that must
  // come out as zero on both sides.
  for (const auto& [r, g] : analytic.rows(index)) {
    if (p.is_frozen_row(r)) continue;
    for (std::size_t c = 0; c < cols; ++c) all.emplace_back(r, c);
  }
  auto picked = sample_coords(std::move(all), limit, rng);
  std::uniform_int_distribution<std::size_t> pick_row(0, p.value.rows() - 1);
  for (int extra = 0; extra < 2 && p.value.rows() > 0; ++extra) {
    std::size_t r = pick_row(rng);
    if (p.is_frozen_row(r) || analytic.rows(index).count(r)) continue;
    picked.emplace_back(r, r % cols);
  }
  return picked;
}

double checked_loss(const std::function<double()>& loss) {
  const double v = loss();
  if (!std::isfinite(v)) throw NumericError("gradient check: loss is not finite");
  return v;
}

// Central difference of the loss along coordinate x with step eps.
double central_difference(const std::function<double()>& loss, double& x, double eps) {
  const double saved = x;
  x = saved + eps;
  const double up = checked_loss(loss);
  x = saved - eps;
  const double down = checked_loss(loss);
  x = saved;
  return (up - down) / (2.0 * eps);
}

}  // namespace

double GradCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& p : params) m = std::max(m, p.max_rel_error);
  return m;
}

std::vector<std::string> GradCheckReport::failing() const {
  std::vector<std::string> names;
  for (const auto& p : params) {
    if (p.max_rel_error > tolerance) names.push_back(p.name);
  }
  return names;
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

double difference_noise(double loss_value, double epsilon, double safety) {
  return safety * std::numeric_limits<double>::epsilon() * std::max(std::abs(loss_value), 1.0) /
         epsilon;
}

GradCheckReport grad_check(const std::function<double()>& loss, ParameterSet& params,
                           const GradientSet& analytic, const GradCheckOptions& options) {
  if (!(options.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  require_shape(analytic.size() == params.size(),
                "gradient check: gradients do not match the parameter set");
  const double base_loss = checked_loss(loss);
  // Below this magnitude the comparison is effectively absolute, at the
  // roundoff level of the difference quotient.
  auto floor_for = [&](double eps) {
    return std::max(difference_noise(base_loss, eps, options.roundoff_safety) / options.tolerance,
                    1e-8);
  };

  GradCheckReport report;
  report.epsilon = options.epsilon;
  report.tolerance = options.tolerance;
  std::mt19937_64 rng(options.seed);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    ParamCheck check;
    check.name = p.name;
    for (auto [r, c] : coords_for(p, i, analytic, options.max_coords_per_param, rng)) {
      double& x = p.value(r, c);
      const double a = analytic.at(i, r, c);
      double numeric = central_difference(loss, x, options.epsilon);
      double err = relative_error(a, numeric, floor_for(options.epsilon));
      if (err > options.tolerance && options.retry_divisor > 1.0) {
        // A kink (ReLU cap, max-pool or competitor switch) inside the stencil
        // spoils the quotient; a narrower stencil usually avoids it.
        const double eps = options.epsilon / options.retry_divisor;
        const double retry = central_difference(loss, x, eps);
        const double retry_err = relative_error(a, retry, floor_for(eps));
        if (retry_err < err) {
          err = retry_err;
          numeric = retry;
        }
      }
      ++check.coords_checked;
      if (err > check.max_rel_error || check.coords_checked == 1) {
        check.max_rel_error = std::max(err, check.max_rel_error);
        check.row = r;
        check.col = c;
        check.analytic = a;
        check.numeric = numeric;
      }
    }
    if (check.max_rel_error > options.tolerance) report.passed = false;
    report.params.push_back(std::move(check));
  }
  return report;
}

void print_report(std::ostream& os, const GradCheckReport& report) {
  os << "gradient check (epsilon " << report.epsilon << ", tolerance " << report.tolerance
     << ")\n";
  for (const auto& p : report.params) {
    os << "  " << std::left << std::setw(24) << p.name << std::right << " coords "
       << std::setw(4) << p.coords_checked << "  max rel err " << std::scientific
       << std::setprecision(3) << p.max_rel_error << std::defaultfloat;
    if (p.max_rel_error > report.tolerance) {
      os << "  FAIL at (" << p.row << "," << p.col << ") analytic " << p.analytic
         << " numeric " << p.numeric;
    }
    os << "\n";
  }
  os << (report.passed ? "PASS" : "FAIL") << "\n";
}

}  // namespace relclass
