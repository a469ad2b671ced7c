#include "sobotrace/seminorms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "sobotrace/common.hpp"
#include "sobotrace/quadrature.hpp"

namespace sobotrace {

ScreeningFunction ScreeningFunction::constant(double a) {
  require(a > 0.0 && std::isfinite(a), "screening: constant radius must be positive and finite");
  ScreeningFunction s;
  s.kind_ = Kind::Constant;
  s.a_ = a;
  return s;
}

ScreeningFunction ScreeningFunction::power_law(int axis, double a, double b, double r) {
  require(axis >= 0 && axis < kMaxDim, "screening: power-law axis out of range");
  require(a < b, "screening: power law needs a < b");
  require(r > 0.0, "screening: power law exponent must be positive");
  ScreeningFunction s;
  s.kind_ = Kind::PowerLaw;
  s.axis_ = axis;
  s.a_ = a;
  s.b_ = b;
  s.r_ = r;
  return s;
}

ScreeningFunction ScreeningFunction::graph_gap(double scale, SampledField eta_minus, SampledField eta_plus) {
  require(scale > 0.0, "screening: graph gap scale must be positive");
  require(eta_minus.grid() == eta_plus.grid(), "screening: graph fields must share a grid");
  for (std::size_t i = 0; i < eta_minus.size(); ++i)
    require(eta_plus[i] > eta_minus[i], "screening: graph gap must be positive");
  ScreeningFunction s;
  s.kind_ = Kind::GraphGap;
  s.a_ = scale;
  s.eta_minus_ = std::make_shared<const SampledField>(std::move(eta_minus));
  s.eta_plus_ = std::make_shared<const SampledField>(std::move(eta_plus));
  return s;
}

ScreeningFunction ScreeningFunction::infinite() { return ScreeningFunction(); }

double ScreeningFunction::operator()(std::span<const double> x) const {
  switch (kind_) {
    case Kind::Constant: return a_;
    case Kind::PowerLaw: return 0.5 * std::pow((x[axis_] - a_) / (b_ - a_), r_);
    case Kind::GraphGap: {
      const int d = eta_minus_->grid().dim();
      auto xs = x.first(d);
      return a_ * (eta_plus_->interpolate(xs) - eta_minus_->interpolate(xs));
    }
    case Kind::Infinite: return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

double ScreeningFunction::infimum(const Grid& g) const {
  double m = std::numeric_limits<double>::infinity();
  std::vector<double> x(g.dim());
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    g.point(i, x);
    m = std::min(m, (*this)(x));
  }
  return m;
}

nlohmann::json ScreeningFunction::to_json() const {
  switch (kind_) {
    case Kind::Constant: return {{"kind", "constant"}, {"a", a_}};
    case Kind::PowerLaw: return {{"kind", "power_law"}, {"axis", axis_}, {"a", a_}, {"b", b_}, {"r", r_}};
    case Kind::GraphGap: return {{"kind", "graph_gap"}, {"scale", a_}};
    case Kind::Infinite: return {{"kind", "infinite"}};
  }
  return {};
}

nlohmann::json SeminormResult::to_json() const {
  return {{"operation", "screened_seminorm"},
          {"parameters", {{"s", s}, {"p", p}, {"sigma", sigma}}},
          {"value", value},
          {"error_estimate", quadrature_error_estimate}};
}

namespace {

struct Directions {
  std::vector<std::array<double, kMaxDim>> dirs;
  std::vector<double> weights;
};

Directions make_directions(int d, int angles) {
  Directions D;
  if (d == 1) {
    D.dirs = {{1.0}, {-1.0}};
    D.weights = {1.0, 1.0};
  } else if (d == 2) {
    const int n = angles > 0 ? angles : 32;
    for (int j = 0; j < n; ++j) {
      const double t = 2.0 * std::numbers::pi * (j + 0.5) / n;
      D.dirs.push_back({std::cos(t), std::sin(t)});
      D.weights.push_back(2.0 * std::numbers::pi / n);
    }
  } else if (d == 3) {
    const int nphi = angles > 0 ? angles : 24;
    int nmu = 2;
    for (int c : {2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 16, 20, 24, 32})
      if (c <= nphi / 2) nmu = c;
    const GaussRule& g = gauss_legendre(nmu);
    for (std::size_t q = 0; q < g.nodes.size(); ++q) {
      const double mu = g.nodes[q], sn = std::sqrt(1.0 - mu * mu);
      for (int j = 0; j < nphi; ++j) {
        const double t = 2.0 * std::numbers::pi * (j + 0.5) / nphi;
        D.dirs.push_back({sn * std::cos(t), sn * std::sin(t), mu});
        D.weights.push_back(g.weights[q] * 2.0 * std::numbers::pi / nphi);
      }
    }
  } else {
    throw InvalidArgument("screened_seminorm: dimension must be 1, 2 or 3");
  }
  return D;
}

struct InnerParts {
  double shells = 0.0;  ///< graded shells from spacing/2 outward
  double core = 0.0;    ///< Lipschitz estimate of the omitted ball of radius spacing/2
};

/// ∫_{sphere} ∫_0^{R(ω)} |f(x+rω)-f(x)|^p r^{-1-sp} dr dω at one node.
InnerParts node_inner(const SampledField& f, std::size_t idx, std::span<const double> x, double sig, double s,
                      double p, const Directions& D, double log_ratio, double r0) {
  const Grid& g = f.grid();
  const int d = g.dim();
  const double f0 = f[idx];
  const GaussRule& gl = gauss_legendre(2);
  const double sp = s * p;
  InnerParts out;
  double y[kMaxDim];
  auto diff_pow = [&](double r, const std::array<double, kMaxDim>& w) {
    for (int a = 0; a < d; ++a) y[a] = x[a] + r * w[a];
    return std::pow(std::abs(f.interpolate(std::span<const double>(y, d), f0)), p);
  };
  for (std::size_t q = 0; q < D.dirs.size(); ++q) {
    const auto& w = D.dirs[q];
    double R = sig;
    for (int a = 0; a < d; ++a) {
      if (g.periodic(a) || w[a] == 0.0) continue;
      const double lim = w[a] > 0 ? (g.box().hi[a] - x[a]) / w[a] : (g.box().lo[a] - x[a]) / w[a];
      R = std::min(R, lim);
    }
    if (!(R > 0.0)) continue;
    const double rc = std::min(r0, R);
    // |f(x+rω)-f(x)|^p ≈ c r^p below rc, so the core integrates to g(rc) rc^{-sp} / (p(1-s)).
    out.core += D.weights[q] * diff_pow(rc, w) * std::pow(rc, -sp) / (p * (1.0 - s));
    if (R <= r0) continue;
    double acc = 0.0;
    const double t_end = std::log(R);
    double ta = std::log(r0);
    while (ta < t_end) {
      const double tb = std::min(ta + log_ratio, t_end);
      const double half = 0.5 * (tb - ta), mid = 0.5 * (ta + tb);
      for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
        const double t = mid + half * gl.nodes[k];
        acc += half * gl.weights[k] * diff_pow(std::exp(t), w) * std::exp(-sp * t);
      }
      ta = tb;
    }
    out.shells += D.weights[q] * acc;
  }
  return out;
}

InnerParts seminorm_power(const SampledField& f, const ScreeningFunction& sigma, double s, double p,
                          const Directions& D, double ratio) {
  const Grid& g = f.grid();
  double hmin = g.spacing()[0];
  for (double h : g.spacing()) hmin = std::min(hmin, h);
  const double r0 = 0.5 * hmin;
  const double log_ratio = std::log(ratio);
  std::vector<InnerParts> partial(thread_count());
  parallel_chunks(g.node_count(), [&](int c, std::size_t b, std::size_t e) {
    InnerParts acc;
    double x[kMaxDim];
    for (std::size_t i = b; i < e; ++i) {
      g.point(i, std::span<double>(x, g.dim()));
      const double sig = sigma(std::span<const double>(x, g.dim()));
      const InnerParts v = node_inner(f, i, std::span<const double>(x, g.dim()), sig, s, p, D, log_ratio, r0);
      acc.shells += g.weight(i) * v.shells;
      acc.core += g.weight(i) * v.core;
    }
    partial[c] = acc;
  });
  InnerParts total;
  for (const auto& v : partial) {
    total.shells += v.shells;
    total.core += v.core;
  }
  return total;
}

}  // namespace

SeminormResult screened_seminorm(const SampledField& f, const ScreeningFunction& sigma, double s, double p,
                                 const SeminormOptions& opts) {
  require(s > 0.0 && s < 1.0, "screened_seminorm: s must lie in (0, 1)");
  require(p >= 1.0 && std::isfinite(p), "screened_seminorm: p must be >= 1");
  require(opts.radial_ratio > 1.0, "screened_seminorm: radial ratio must exceed 1");
  const Grid& g = f.grid();
  if (!sigma.finite())
    for (int a = 0; a < g.dim(); ++a)
      require(!g.periodic(a), "screened_seminorm: infinite screening needs a bounded (non-periodic) domain");
  double hmax = 0.0;
  for (double h : g.spacing()) hmax = std::max(hmax, h);
  const double inf_sigma = sigma.infimum(g);
  if (sigma.finite() && inf_sigma < 4.0 * hmax)
    warn("screened_seminorm: grid resolves min sigma = " + std::to_string(inf_sigma) + " by fewer than 4 cells");
  const Directions D = make_directions(g.dim(), opts.angles);
  SeminormResult res;
  res.s = s;
  res.p = p;
  res.sigma = sigma.to_json();
  const InnerParts fine = seminorm_power(f, sigma, s, p, D, opts.radial_ratio);
  res.power = fine.shells + (opts.core_correction ? fine.core : 0.0);
  res.value = std::pow(res.power, 1.0 / p);
  if (opts.estimate_error) {
    const InnerParts coarse = seminorm_power(f, sigma, s, p, D, opts.radial_ratio * opts.radial_ratio);
    // Refinement difference plus the core (omitted, or estimated when corrected).
    res.power_error = std::abs(fine.shells - coarse.shells) + fine.core;
    res.quadrature_error_estimate = std::pow(res.power + res.power_error, 1.0 / p) - res.value;
  }
  return res;
}

double sobolev_seminorm_pow(const SampledField& u, int m, double p) {
  require(m >= 1, "sobolev_seminorm: order must be >= 1");
  gradient_m(u, 0);  // validates grid resolution
  for (int a = 0; a < u.grid().dim(); ++a)
    if (!u.grid().periodic(a))
      require(u.grid().nodes(a) >= 2 * m + 1, "sobolev_seminorm: too few nodes for order m");
  return lp_norm_pow(gradient_magnitude(u, m), p);
}

double sobolev_seminorm(const SampledField& u, int m, double p) {
  return std::pow(sobolev_seminorm_pow(u, m, p), 1.0 / p);
}

XNormResult xspace_norm(const SampledField& f_minus, const SampledField& f_plus, const ScreeningFunction& sigma,
                        double s, double p, const SeminormOptions& opts) {
  require(sigma.finite(), "xspace_norm: the screening function must be finite-valued");
  require(f_minus.grid() == f_plus.grid(), "xspace_norm: boundary data must share a grid");
  const Grid& g = f_minus.grid();
  XNormResult r;
  double acc = 0.0;
  std::vector<double> x(g.dim());
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    g.point(i, x);
    acc += g.weight(i) * std::pow(std::abs(f_plus[i] - f_minus[i]), p) / std::pow(sigma(x), p - 1.0);
  }
  r.weighted_jump = std::pow(acc, 1.0 / p);
  r.minus = screened_seminorm(f_minus, sigma, s, p, opts);
  r.plus = screened_seminorm(f_plus, sigma, s, p, opts);
  r.value = r.weighted_jump + r.minus.value + r.plus.value;
  return r;
}

PoincareResult poincare_check(const SampledField& f, std::span<const double> center, double r,
                              const std::function<bool(std::span<const double>)>& in_E, double s, double p) {
  require(s > 0.0 && s < 1.0 && p >= 1.0, "poincare_check: need s in (0,1) and p >= 1");
  require(r > 0.0, "poincare_check: radius must be positive");
  const Grid& g = f.grid();
  const int N = g.dim();
  for (int a = 0; a < N; ++a)
    require(center[a] - r >= g.box().lo[a] - 1e-12 && center[a] + r <= g.box().hi[a] + 1e-12,
            "poincare_check: ball must lie inside the domain");
  std::vector<std::size_t> ball, E;
  std::vector<std::vector<double>> pts;
  std::vector<double> x(N);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    g.point(i, x);
    double d2 = 0.0;
    for (int a = 0; a < N; ++a) d2 += (x[a] - center[a]) * (x[a] - center[a]);
    if (d2 <= r * r) {
      ball.push_back(i);
      if (in_E(x)) E.push_back(i);
    }
  }
  require(!E.empty(), "poincare_check: E contains no grid nodes");
  double measE = 0.0, meanE = 0.0;
  for (auto i : E) {
    measE += g.weight(i);
    meanE += g.weight(i) * f[i];
  }
  meanE /= measE;
  const double sp = s * p;
  double lhs = 0.0;
  for (auto i : ball) lhs += g.weight(i) * std::pow(std::abs(f[i] - meanE), p);
  double dbl = parallel_sum(ball.size(), [&](std::size_t k) {
    const std::size_t i = ball[k];
    double yi[kMaxDim], zj[kMaxDim];
    g.point(i, std::span<double>(yi, N));
    double acc = 0.0;
    for (auto j : E) {
      if (j == i) continue;
      g.point(j, std::span<double>(zj, N));
      double d2 = 0.0;
      for (int a = 0; a < N; ++a) d2 += (yi[a] - zj[a]) * (yi[a] - zj[a]);
      acc += g.weight(j) * std::pow(std::abs(f[i] - f[j]), p) / std::pow(d2, 0.5 * (sp + N));
    }
    return g.weight(i) * acc;
  });
  PoincareResult res;
  res.lhs = lhs;
  res.rhs = std::pow(r, sp + N) / measE * dbl;
  res.constant_bound = std::pow(2.0, sp + N);
  res.ratio = res.rhs > 0 ? res.lhs / res.rhs : 0.0;
  res.pass = res.lhs <= res.constant_bound * res.rhs * (1.0 + 1e-12) + 1e-300;
  return res;
}

DoublingResult doubling_check(const SampledField& f, double r, double s, double p, const SeminormOptions& opts) {
  const Grid& g = f.grid();
  require(r > 0.0, "doubling_check: radius must be positive");
  for (int a = 0; a < g.dim(); ++a) {
    require(g.periodic(a), "doubling_check: requires a torus (all axes periodic)");
    require(g.box().extent(a) >= 8.0 * r, "doubling_check: torus cell side must be at least 8r");
  }
  SeminormResult s1 = screened_seminorm(f, ScreeningFunction::constant(r), s, p, opts);
  SeminormResult s2 = screened_seminorm(f, ScreeningFunction::constant(2 * r), s, p, opts);
  DoublingResult d;
  d.upper = 1.0 + std::pow(2.0, p * (1.0 - s));
  if (s1.power <= 1e-300) {
    d.ratio = 1.0;
    return d;
  }
  d.ratio = s2.power / s1.power;
  d.slack = 3.0 * (s2.power_error + d.ratio * s1.power_error) / s1.power;
  d.pass = d.ratio >= d.lower - d.slack && d.ratio <= d.upper + d.slack;
  return d;
}

InterpolationResult interpolation_check(const SampledField& f, double s1, double s2, double theta, double p,
                                        const ScreeningFunction& sigma, const SeminormOptions& opts) {
  require(0.0 < s1 && s1 < s2 && s2 < 1.0, "interpolation_check: need 0 < s1 < s2 < 1");
  require(theta > 0.0 && theta <= 1.0, "interpolation_check: theta must lie in (0, 1]");
  InterpolationResult r;
  r.s = theta * s1 + (1.0 - theta) * s2;
  SeminormResult a = screened_seminorm(f, sigma, s1, p, opts);
  SeminormResult b = screened_seminorm(f, sigma, s2, p, opts);
  SeminormResult c = theta == 1.0 ? a : screened_seminorm(f, sigma, r.s, p, opts);
  r.lhs = c.value;
  r.rhs = std::pow(a.value, theta) * std::pow(b.value, 1.0 - theta);
  if (theta < 1.0 && a.value > 0.0 && b.value > 0.0)
    r.slack = 3.0 * (c.quadrature_error_estimate +
                     r.rhs * (theta * a.quadrature_error_estimate / a.value +
                              (1.0 - theta) * b.quadrature_error_estimate / b.value));
  r.pass = r.lhs <= r.rhs + r.slack;
  return r;
}

EquivalenceResult inhomogeneous_equivalence_check(const SampledField& f, const ScreeningFunction& sigma, double s,
                                                  double p, const SeminormOptions& opts) {
  const Grid& g = f.grid();
  for (int a = 0; a < g.dim(); ++a)
    require(!g.periodic(a), "equivalence check: the full seminorm needs a bounded (non-periodic) domain");
  require(sigma.finite(), "equivalence check: sigma must be finite");
  const double sigma_minus = sigma.infimum(g);
  require(sigma_minus > 0.0, "equivalence check: inf sigma must be positive");
  EquivalenceResult r;
  r.lp = lp_norm(f, p);
  SeminormResult scr = screened_seminorm(f, sigma, s, p, opts);
  SeminormResult full = screened_seminorm(f, ScreeningFunction::infinite(), s, p, opts);
  r.screened = scr.value;
  r.full = full.value;
  const int N = g.dim();
  const double K = std::pow(2.0, p) * sphere_surface(N) / (s * p * std::pow(sigma_minus, s * p));
  r.constant = 1.0 + std::pow(K, 1.0 / p);
  r.slack = 3.0 * (scr.quadrature_error_estimate + full.quadrature_error_estimate);
  const double low = r.lp + r.screened, mid = r.lp + r.full;
  r.measured_constant = low > 0.0 ? mid / low : 1.0;
  r.lower_pass = low <= mid + r.slack;
  r.upper_pass = mid <= r.constant * low + r.slack;
  return r;
}

}  // namespace sobotrace
