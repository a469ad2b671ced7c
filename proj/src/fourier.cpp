#include "sobotrace/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>

#include "sobotrace/common.hpp"
#include "sobotrace/quadrature.hpp"

namespace sobotrace {

using std::numbers::pi;

namespace {

/// (1 - (1/|S^{d-1}|) ∫_{S^{d-1}} cos(t ω_1) dω) / t^2, where the mean is Γ(d/2) (2/t)^{d/2-1} J_{d/2-1}(t).
double sphere_defect_over_t2(int d, double t) {
  const double nu = 0.5 * d - 1.0;
  if (t < 2.0) {
    // Alternating series in t^2/4 with rapidly shrinking terms, stable down to t = 0.
    const double x = 0.25 * t * t;
    double term = 0.25 / (1.0 + nu), total = term;
    for (int k = 2; k <= 40; ++k) {
      term *= -x / (k * (k + nu));
      total += term;
      if (std::abs(term) < 1e-17 * std::abs(total)) break;
    }
    return total;
  }
  if (d == 1) return (1.0 - std::cos(t)) / (t * t);
  return (1.0 - std::tgamma(0.5 * d) * std::pow(2.0 / t, nu) * boost::math::cyl_bessel_j(nu, t)) / (t * t);
}

}  // namespace

double ball_multiplier_integral(int d, double c, double R, double q) {
  require(d >= 1, "multiplier: dimension must be >= 1");
  c = std::abs(c);
  if (c == 0.0 || R <= 0.0) return 0.0;
  // |e^{iθ} - 1|^2 = 2 - 2 cos θ averaged over directions, then integrated against r^{-1-q}.
  const double beta = sphere_surface(d);
  const double w = 2.0 * pi * c;
  auto g = [&](double r) {
    if (r <= 0.0) return 0.0;
    return 2.0 * beta * w * w * sphere_defect_over_t2(d, w * r) * std::pow(r, 1.0 - q);
  };
  // The origin behaves like r^{1-q}; resolve it with tanh-sinh. Each later period is analytic
  // well beyond its ends (nearest singularity at r = 0), so 20-point Gauss-Legendre is exact to rounding.
  const double first = std::min(R, 0.5 / c);
  double total = integrate_singular(g, 0.0, first, 1e-13);
  const double period = 1.0 / c;
  const GaussRule& gl = gauss_legendre(20);
  for (double r = first; r < R;) {
    const double next = std::min(R, r + period);
    const double half = 0.5 * (next - r), mid = 0.5 * (next + r);
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) total += half * gl.weights[k] * g(mid + half * gl.nodes[k]);
    r = next;
  }
  return total;
}

double multiplier_m_radial(double norm, double s, int d) {
  require(s > 0.0 && s < 1.0, "multiplier: s must lie in (0, 1)");
  return ball_multiplier_integral(d, norm, 1.0, 2.0 * s);
}

MultiplierSample multiplier_m(std::span<const double> xi, double s) {
  require(!xi.empty(), "multiplier: empty frequency vector");
  double n2 = 0.0;
  for (double v : xi) n2 += v * v;
  MultiplierSample r;
  r.xi.assign(xi.begin(), xi.end());
  r.s = s;
  r.dim = static_cast<int>(xi.size());
  r.m_value = multiplier_m_radial(std::sqrt(n2), s, r.dim);
  return r;
}

MultiplierBoundsResult multiplier_bounds_check(double s, int d, const std::vector<double>& norms) {
  require(s > 0.0 && s < 1.0, "multiplier bounds: s must lie in (0, 1)");
  require(d >= 1, "multiplier bounds: dimension must be >= 1");
  MultiplierBoundsResult res;
  res.s = s;
  res.dim = d;
  res.c1 = ball_multiplier_integral(d, 1.0, 0.5, 2.0 * s);
  // Everything beyond R is bounded by 4 |S^{d-1}| ∫_R^∞ r^{-1-2s} dr.
  const double R = 16.0;
  res.c2 = ball_multiplier_integral(d, 1.0, R, 2.0 * s) + 4.0 * sphere_surface(d) * std::pow(R, -2.0 * s) / (2.0 * s);
  res.c3 = pi * pi * (sphere_surface(d) / d) / (2.0 - 2.0 * s);
  const double tol = 1e-9;
  for (double n : norms) {
    n = std::abs(n);
    if (n == 0.0) continue;
    MultiplierRow row;
    row.norm = n;
    row.m = multiplier_m_radial(n, s, d);
    row.high_frequency = n >= 0.5;
    if (row.high_frequency) {
      row.lower = res.c1 * std::pow(n, 2.0 * s);
      row.upper = res.c2 * std::pow(n, 2.0 * s);
    } else {
      row.lower = res.c3 * n * n;
      row.upper = 4.0 * res.c3 * n * n;
    }
    row.pass = row.m >= row.lower * (1.0 - tol) && row.m <= row.upper * (1.0 + tol);
    res.pass = res.pass && row.pass;
    res.rows.push_back(row);
  }
  return res;
}

nlohmann::json MultiplierBoundsResult::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows)
    rs.push_back({{"norm", r.norm},
                  {"m", r.m},
                  {"regime", r.high_frequency ? "high" : "low"},
                  {"lower", r.lower},
                  {"upper", r.upper},
                  {"pass", r.pass}});
  return {{"s", s}, {"dim", dim}, {"c1", c1}, {"c2", c2}, {"c3", c3}, {"rows", rs}, {"pass", pass}};
}

void write_multiplier_csv(const MultiplierBoundsResult& r, std::ostream& out) {
  out << "norm,m,lower,upper\n";
  char buf[128];
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", row.norm, row.m, row.lower, row.upper);
    out << buf;
  }
}

PlancherelResult seminorm_plancherel_check(const SampledField& f, double s, const SeminormOptions& opts) {
  const Grid& g = f.grid();
  const int d = g.dim();
  for (int a = 0; a < d; ++a) require(g.periodic(a), "plancherel check: requires a torus (all axes periodic)");
  PlancherelResult res;
  SeminormResult direct = screened_seminorm(f, ScreeningFunction::constant(1.0), s, 2.0, opts);
  res.direct = direct.power;
  res.direct_error = direct.power_error;

  const std::size_t n = g.node_count();
  std::vector<std::complex<double>> buf(f.values().begin(), f.values().end());
  std::vector<int> dims(d);
  for (int a = 0; a < d; ++a) dims[a] = g.nodes(a);
  auto* data = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan plan = fftw_plan_dft(d, dims.data(), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
  if (!plan) throw NumericalError("plancherel check: FFT planning failed");
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  // m depends only on |xi|; the torus has few distinct frequency norms.
  std::map<double, double> cache;
  double cell = 1.0;
  for (int a = 0; a < d; ++a) cell *= g.box().extent(a);
  std::vector<int> mi(d);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c2 = std::norm(buf[i]) / (static_cast<double>(n) * static_cast<double>(n));
    if (c2 == 0.0) continue;
    g.multi_index(i, mi);
    double n2 = 0.0;
    for (int a = 0; a < d; ++a) {
      int k = mi[a];
      if (2 * k > dims[a]) k -= dims[a];
      const double xi = k / g.box().extent(a);
      n2 += xi * xi;
    }
    if (n2 == 0.0) continue;
    const double norm = std::sqrt(n2);
    auto it = cache.find(norm);
    if (it == cache.end()) it = cache.emplace(norm, multiplier_m_radial(norm, s, d)).first;
    total += c2 * it->second;
  }
  res.spectral = cell * total;
  const double scale = std::max(std::abs(res.direct), std::abs(res.spectral));
  res.relative_discrepancy = scale > 0.0 ? std::abs(res.direct - res.spectral) / scale : 0.0;
  return res;
}

nlohmann::json PlancherelResult::to_json() const {
  return {{"direct", direct},
          {"direct_error", direct_error},
          {"spectral", spectral},
          {"relative_discrepancy", relative_discrepancy}};
}

}  // namespace sobotrace
