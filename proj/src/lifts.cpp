#include <algorithm>
#include <cmath>
#include <complex>

#include "sobotrace/common.hpp"
#include "sobotrace/quadrature.hpp"
#include "sobotrace/seminorms.hpp"
#include "sobotrace/tracelift.hpp"
#include "spectral.hpp"
#include "strip_detail.hpp"

namespace sobotrace {

namespace {

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace

SampledField lift_m1(const TracePair& pair, const Grid& grid, const LiftOptions& opts) {
  require(opts.a > 0.0, "lift_m1: the screening scale a must be positive");
  const StripDomain strip = strip_of(grid);
  const Grid hg = horizontal_grid(grid);
  require(pair.f_minus.grid() == hg && pair.f_plus.grid() == hg,
          "lift_m1: boundary data must live on the grid's horizontal factor");
  const int d = hg.dim();
  const Mollifier phi = opts.mollifier ? *opts.mollifier : build_moment_mollifier(d, 1, 1);
  require(phi.dim == d, "lift_m1: mollifier dimension must match the horizontal dimension");
  const RadialFourier ft = mollifier_fourier(phi);

  const double b = strip.height();
  const double rho = opts.a / b;  // support radius of the unscaled kernel
  const detail::Columns c = detail::columns_of(grid);
  // Level j sits at distance j dz from the bottom wall and (nv-1-j) dz from the top one.
  std::vector<double> scales(c.nv);
  for (int j = 0; j < c.nv; ++j) scales[j] = rho * j * c.dz;
  detail::HorizontalSpectrum spec(hg);
  const auto lower = detail::convolve_levels(spec, pair.f_minus, ft, scales);
  const auto upper = detail::convolve_levels(spec, pair.f_plus, ft, scales);

  std::vector<double> u(grid.node_count());
  for (int j = 0; j < c.nv; ++j) {
    const double theta = opts.cutoff(static_cast<double>(j) / (c.nv - 1));
    const auto& lo = lower[j];
    const auto& hi = upper[c.nv - 1 - j];
    for (std::size_t i = 0; i < c.count; ++i) u[i * c.nv + j] = theta * lo[i] + (1.0 - theta) * hi[i];
  }
  // The mollifier limit at the walls is the data itself.
  for (std::size_t i = 0; i < c.count; ++i) {
    u[i * c.nv] = pair.f_minus[i];
    u[i * c.nv + c.nv - 1] = pair.f_plus[i];
  }
  return SampledField(grid, std::move(u));
}

SampledField lift_general(const TraceJet& jet, const Grid& grid, double a) {
  require(jet.order >= 1, "lift_general: jet order must be >= 1");
  require(static_cast<int>(jet.minus.size()) == jet.order && static_cast<int>(jet.plus.size()) == jet.order,
          "lift_general: jet is incomplete");
  require(a > 0.0, "lift_general: the screening scale a must be positive");
  const StripDomain strip = strip_of(grid);
  const Grid hg = horizontal_grid(grid);
  for (int k = 0; k < jet.order; ++k)
    require(jet.minus[k].grid() == hg && jet.plus[k].grid() == hg,
            "lift_general: jet components must live on the grid's horizontal factor");
  const int m = jet.order;
  const int d = hg.dim();
  const RadialFourier ft = mollifier_fourier(build_moment_mollifier(d, m, m));
  const CutoffProfile cutoff{0.25, std::max(2, m)};

  const double b = strip.height();
  const double rho = a / b;
  const detail::Columns c = detail::columns_of(grid);
  detail::HorizontalSpectrum spec(hg);
  std::vector<std::vector<std::complex<double>>> cm, cp;
  for (int k = 0; k < m; ++k) {
    cm.push_back(spec.forward(jet.minus[k]));
    cp.push_back(spec.forward(jet.plus[k]));
  }
  std::vector<double> scales(c.nv);
  for (int j = 0; j < c.nv; ++j) scales[j] = rho * j * c.dz;
  const auto table = spec.multiplier_table(ft, scales);
  const auto& idx = spec.norm_index();

  // Σ_k s^k/k! (phi_t * f_k) at distance t = j dz, with s = t below and s = -t above.
  auto level = [&](const std::vector<std::vector<std::complex<double>>>& coeffs, int j, double sign) {
    const double t = j * c.dz;
    std::vector<std::complex<double>> work(spec.size(), 0.0);
    for (int k = 0; k < m; ++k) {
      const double w = std::pow(sign * t, k) / factorial(k);
      for (std::size_t q = 0; q < spec.size(); ++q) work[q] += w * coeffs[k][q];
    }
    for (std::size_t q = 0; q < spec.size(); ++q) work[q] *= table[j][idx[q]];
    std::vector<double> out(spec.size());
    spec.inverse(work, out.data());
    return out;
  };

  std::vector<double> u(grid.node_count());
  for (int j = 0; j < c.nv; ++j) {
    const double theta = cutoff(static_cast<double>(j) / (c.nv - 1));
    std::vector<double> lo(c.count, 0.0), hi(c.count, 0.0);
    if (theta > 0.0) lo = level(cm, j, 1.0);
    if (theta < 1.0) hi = level(cp, c.nv - 1 - j, -1.0);
    for (std::size_t i = 0; i < c.count; ++i) u[i * c.nv + j] = theta * lo[i] + (1.0 - theta) * hi[i];
  }
  for (std::size_t i = 0; i < c.count; ++i) {
    u[i * c.nv] = jet.minus[0][i];
    u[i * c.nv + c.nv - 1] = jet.plus[0][i];
  }
  return SampledField(grid, std::move(u));
}

StructureResult structure_estimate(const SampledField& f, double a, double b, double p) {
  require(a > 0.0 && b > a, "structure_estimate: requires 0 < a < b");
  require(p > 1.0, "structure_estimate: p must exceed 1");
  const Grid& hg = f.grid();
  const int d = hg.dim();
  const RadialFourier kernel = vertical_kernel_fourier(build_moment_mollifier(d, 1, 1));
  const double rho = a / b;

  // v(., t) = t^{-1} (psi_{rho t} * f) is smooth in t and O(t) at 0; geometric panels
  // toward t = 0 resolve the fast decay of high frequencies.
  const GaussRule& gl = gauss_legendre(8);
  std::vector<double> ts, wt;
  double hi = b;
  for (int panel = 0; panel < 40 && hi > b * 1e-9; ++panel) {
    const double lo = panel == 39 ? 0.0 : 0.7 * hi;
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      ts.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.nodes[q]);
      wt.push_back(0.5 * (hi - lo) * gl.weights[q]);
    }
    hi = lo;
  }
  std::vector<double> scales(ts.size());
  for (std::size_t l = 0; l < ts.size(); ++l) scales[l] = rho * ts[l];
  detail::HorizontalSpectrum spec(hg);
  const auto levels = detail::convolve_levels(spec, f, kernel, scales);

  StructureResult r;
  for (std::size_t l = 0; l < ts.size(); ++l) {
    double acc = 0.0;
    for (std::size_t i = 0; i < hg.node_count(); ++i) acc += hg.weight(i) * std::pow(std::abs(levels[l][i] / ts[l]), p);
    r.lhs += wt[l] * acc;
  }
  const SeminormResult sem = screened_seminorm(f, ScreeningFunction::constant(a), 1.0 - 1.0 / p, p);
  r.rhs = sem.power;
  r.rhs_error = sem.power_error;
  r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
  return r;
}

nlohmann::json StructureResult::to_json() const {
  return {{"lhs", lhs}, {"rhs", rhs}, {"rhs_error", rhs_error}, {"ratio", ratio}};
}

LiftEnergy strip_lift_energy(const TracePair& pair, const SampledField& lifted, double a, double p) {
  require(p > 1.0, "lift energy: p must exceed 1");
  const StripDomain strip = strip_of(lifted.grid());
  const double b = strip.height();
  const double s = 1.0 - 1.0 / p;
  LiftEnergy e;
  e.energy = sobolev_seminorm_pow(lifted, 1, p);
  e.jump = std::pow(b, 1.0 - p) * lp_norm_pow(pair.f_plus - pair.f_minus, p);
  const ScreeningFunction sigma = ScreeningFunction::constant(a);
  const SeminormResult lo = screened_seminorm(pair.f_minus, sigma, s, p);
  const SeminormResult hi = screened_seminorm(pair.f_plus, sigma, s, p);
  e.seminorms = lo.power + hi.power;
  e.seminorm_error = lo.power_error + hi.power_error;
  const double data = e.jump + e.seminorms;
  e.ratio = data > 0.0 ? e.energy / data : 0.0;
  return e;
}

}  // namespace sobotrace
