#include "sobotrace/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sobotrace/common.hpp"
#include "sobotrace/tracelift.hpp"

namespace sobotrace {

namespace {

constexpr int reference_modes[] = {1, 2, 4, 8, 16};

}  // namespace

double lookup_constant(const std::vector<CalibratedConstant>& table, int dim, double p) {
  for (const auto& c : table)
    if (c.dim == dim && std::abs(c.p - p) < 1e-12) return c.value;
  throw InvalidArgument("no calibrated constant for N = " + std::to_string(dim) + ", p = " + std::to_string(p));
}

double measure_lift_reference(int dim, double p) {
  require(dim == 2 || dim == 3, "measure_lift_reference: N must be 2 or 3");
  const int d = dim - 1;
  const Box cell = make_box(std::vector<double>(d, 0.0), std::vector<double>(d, 1.0), std::vector<bool>(d, true));
  const StripDomain strip = make_strip(cell, 0.0, 1.0);
  const Grid g = dim == 2 ? make_strip_grid(strip, {128}, 96) : make_strip_grid(strip, {32, 32}, 32);
  const Grid hg = horizontal_grid(g);
  const double a = 0.5;

  auto ratio = [&](const SampledField& fm, const SampledField& fp) {
    return strip_lift_energy({fm, fp}, lift_m1({fm, fp}, g, LiftOptions{.a = a, .mollifier = std::nullopt}), a, p).ratio;
  };
  double worst = ratio(SampledField::constant(hg, 0.0), SampledField::constant(hg, 1.0));
  for (int k : reference_modes) {
    if (dim == 3 && k > 8) continue;  // beyond the resolved band of the 32-node cell
    const double w = 2 * std::numbers::pi * k;
    const SampledField fm = sample([w](std::span<const double> x) { return std::sin(w * x[0]); }, hg);
    const SampledField fp = sample([w](std::span<const double> x) { return std::cos(w * x[0]); }, hg);
    worst = std::max(worst, ratio(fm, fp));
  }
  return worst;
}

double measure_structure_reference(double p) {
  const Grid hg = make_grid(make_box({0.0}, {1.0}, {true}), {128});
  double worst = 0.0;
  for (int k : reference_modes) {
    const double w = 2 * std::numbers::pi * k;
    const SampledField f = sample([w](std::span<const double> x) { return std::sin(w * x[0]); }, hg);
    worst = std::max(worst, structure_estimate(f, 0.5, 1.0, p).ratio);
  }
  return worst;
}

}  // namespace sobotrace
