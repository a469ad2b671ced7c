#include "sobotrace/witnesses.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "sobotrace/common.hpp"
#include "sobotrace/quadrature.hpp"

namespace sobotrace {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct Nodes {
  std::vector<double> x, w;
};

void append_panel(Nodes& out, double lo, double hi, const GaussRule& gl) {
  if (!(hi > lo)) return;
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
    out.x.push_back(c + h * gl.nodes[q]);
    out.w.push_back(h * gl.weights[q]);
  }
}

/// Panels over [lo, hi] at the given interior breakpoints, plus halving toward hi starting at
/// hi - diag (the near-diagonal singularity), down to a relative floor.
Nodes graded_nodes(double lo, double hi, std::vector<double> breaks, double diag, const GaussRule& gl) {
  Nodes out;
  if (!(hi > lo)) return out;
  diag = std::min(diag, hi - lo);
  const double zone = hi - diag;
  std::vector<double> pts = {lo};
  for (double b : breaks)
    if (b > lo && b < hi) pts.push_back(b);
  pts.push_back(zone);
  const double floor = 1e-11 * std::max(1.0, std::abs(hi));
  for (double d = 0.5 * diag; d > floor; d *= 0.5) pts.push_back(hi - d);
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) append_panel(out, pts[i], pts[i + 1], gl);
  return out;
}

/// ∫_{S^{N-1}, |r e - rho w| < cut} |r e - rho w|^{-k} dw, k = sp + N.
double angular_factor(int n, double r, double rho, double k, double cut) {
  const double d = std::abs(r - rho);
  if (d >= cut) return 0.0;
  switch (n) {
    case 1: {
      double v = std::pow(d, -k);
      if (r + rho < cut) v += std::pow(r + rho, -k);
      return v;
    }
    case 3: {
      // ∫_{-1}^{1} (A - B c)^{-k/2} dc in closed form
      const double q = 0.5 * k, A = r * r + rho * rho, B = 2 * r * rho;
      const double c0 = std::isinf(cut) ? -1.0 : std::max(-1.0, (A - cut * cut) / B);
      if (c0 >= 1.0) return 0.0;
      return 2 * std::numbers::pi * (std::pow(d * d, 1 - q) - std::pow(A - B * c0, 1 - q)) / (B * (q - 1));
    }
    default: {
      // 4 ∫_0^{phi_max} (d^2 + 4 r rho sin^2 phi)^{-k/2} dphi, graded at the peak width
      const double rr = 4 * r * rho;
      double phi_max = 0.5 * std::numbers::pi;
      if (!std::isinf(cut)) {
        const double arg = (cut * cut - d * d) / rr;
        if (arg < 1.0) phi_max = std::asin(std::sqrt(arg));
      }
      const GaussRule& gl = gauss_legendre(8);
      const double width = std::max(d / std::sqrt(rr), 1e-300);
      double acc = 0.0, lo = 0.0, hi = std::min(width, phi_max);
      while (true) {
        const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
          const double s = std::sin(c + h * gl.nodes[q]);
          acc += h * gl.weights[q] * std::pow(d * d + rr * s * s, -0.5 * k);
        }
        if (hi >= phi_max) break;
        lo = hi;
        hi = std::min(2 * hi, phi_max);
      }
      return 4 * acc;
    }
  }
}

double witness_derivative(int n, double p, double t) {
  return std::pow(2 + t, -n / p) * std::pow(std::log(2 + t), -2 / p);
}

std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------

ConeWitness::ConeWitness(int dim, double p) : dim_(dim), p_(p) {
  require(dim >= 1, "cone_witness: N must be >= 1");
  require(p >= 1.0, "cone_witness: p must be >= 1");
  const double radius = 1e4;
  nodes_.push_back(0.0);
  for (int k = 1;; ++k) {
    const double t = 2 * (std::pow(1.05, k) - 1);
    if (t >= radius) break;
    nodes_.push_back(t);
  }
  nodes_.push_back(radius);
  values_.assign(nodes_.size(), 0.0);
  const GaussRule& g16 = gauss_legendre(16);
  const GaussRule& g8 = gauss_legendre(8);
  auto panel = [&](const GaussRule& gl, double lo, double hi) {
    double acc = 0.0;
    for (std::size_t q = 0; q < gl.nodes.size(); ++q)
      acc += gl.weights[q] * witness_derivative(dim_, p_, 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.nodes[q]);
    return 0.5 * (hi - lo) * acc;
  };
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    const double a = panel(g16, nodes_[i - 1], nodes_[i]);
    table_error_ = std::max(table_error_, std::abs(a - panel(g8, nodes_[i - 1], nodes_[i])));
    values_[i] = values_[i - 1] + a;
  }
}

double ConeWitness::profile_derivative(double r) const {
  require(r >= 0.0, "cone witness: radius must be non-negative");
  return witness_derivative(dim_, p_, r);
}

double ConeWitness::profile(double r) const {
  require(r >= 0.0, "cone witness: radius must be non-negative");
  if (r >= nodes_.back()) {
    return values_.back() +
           integrate_adaptive([this](double t) { return witness_derivative(dim_, p_, t); }, nodes_.back(), r);
  }
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  const double lo = nodes_[i];
  if (r == lo) return values_[i];
  const GaussRule& gl = gauss_legendre(16);
  double acc = 0.0;
  for (std::size_t q = 0; q < gl.nodes.size(); ++q)
    acc += gl.weights[q] * witness_derivative(dim_, p_, 0.5 * (lo + r) + 0.5 * (r - lo) * gl.nodes[q]);
  return values_[i] + 0.5 * (r - lo) * acc;
}

double ConeWitness::lipschitz_constant() const {
  return 1.0 / (std::pow(2.0, dim_ / p_) * std::pow(std::log(2.0), 2.0 / p_));
}

double ConeWitness::max_table_slope() const {
  double m = 0.0;
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    m = std::max(m, (values_[i] - values_[i - 1]) / (nodes_[i] - nodes_[i - 1]));
  return m;
}

ConeWitness cone_witness(int dim, double p) { return ConeWitness(dim, p); }

RadialProfile radial_profile(const ConeWitness& w) {
  return {w.dim(), [w](double r) { return w.profile(r); }};
}

// ---------------------------------------------------------------------------

std::vector<double> radial_seminorm_pow(const RadialProfile& u, double cut, double s, double p,
                                        const std::vector<double>& radii) {
  require(u.dim >= 1 && u.dim <= 3, "radial seminorm: N must be 1, 2 or 3");
  require(s > 0.0 && s < 1.0 && p >= 1.0, "radial seminorm: requires 0 < s < 1 and p >= 1");
  require(cut > 0.0, "radial seminorm: screening radius must be positive");
  require(!radii.empty() && radii.front() > 0.0, "radial seminorm: radii must be positive");
  for (std::size_t i = 1; i < radii.size(); ++i)
    require(radii[i] > radii[i - 1], "radial seminorm: radii must be increasing");
  const int n = u.dim;
  const double k = s * p + n;
  const GaussRule& gl = gauss_legendre(8);

  // Outer radius: dyadic near the origin, then ratio 1.25, with every cutoff a breakpoint.
  std::vector<double> pts = {0.0, 0.125, 0.25, 0.5, 1.0};
  for (double r = 1.25; r < radii.back(); r *= 1.25) pts.push_back(r);
  // the inner range and the reflected pairs (r + rho < cut) switch on at these radii
  if (!std::isinf(cut)) pts.insert(pts.end(), {0.5 * cut, cut});
  pts.insert(pts.end(), radii.begin(), radii.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  while (pts.back() > radii.back()) pts.pop_back();
  Nodes outer;
  std::vector<std::size_t> panel_end;  // first node index after each panel
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    append_panel(outer, pts[i], pts[i + 1], gl);
    panel_end.push_back(outer.x.size());
  }

  // Inner integral over rho < r with |r - rho| < cut.
  std::vector<double> inner(outer.x.size(), 0.0);
  parallel_chunks(outer.x.size(), [&](int, std::size_t b, std::size_t e) {
    std::vector<double> breaks;
    for (std::size_t i = b; i < e; ++i) {
      const double r = outer.x[i];
      const double lo = std::max(0.0, r - cut);
      breaks.clear();
      for (double t = 0.125; t < r; t *= 2) breaks.push_back(t);
      if (cut - r > lo && cut - r < r) breaks.push_back(cut - r);
      const Nodes in = graded_nodes(lo, r, breaks, 0.5 * (r - lo), gl);
      const double fr = u.f(r);
      double acc = 0.0;
      for (std::size_t j = 0; j < in.x.size(); ++j) {
        const double rho = in.x[j];
        const double diff = std::abs(fr - u.f(rho));
        if (diff == 0.0) continue;
        acc += in.w[j] * std::pow(rho, n - 1) * std::pow(diff, p) * angular_factor(n, r, rho, k, cut);
      }
      inner[i] = std::pow(r, n - 1) * acc;
    }
  });

  const double factor = 2 * sphere_surface(n);
  std::vector<double> out;
  double total = 0.0;
  std::size_t node = 0, next_radius = 0;
  for (std::size_t pnl = 0; pnl < panel_end.size(); ++pnl) {
    for (; node < panel_end[pnl]; ++node) total += outer.w[node] * inner[node];
    while (next_radius < radii.size() && std::abs(pts[pnl + 1] - radii[next_radius]) <= 1e-12 * radii[next_radius]) {
      out.push_back(factor * total);
      ++next_radius;
    }
  }
  return out;
}

double tail_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "tail_slope: needs at least two points");
  const std::size_t start = x.size() > 3 ? x.size() - 3 : 0;
  std::vector<double> lx, ly;
  for (std::size_t i = start; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "tail_slope: values must be positive");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_slope(lx, ly);
}

GrowthTable divergence_experiment(const RadialProfile& u, double sigma, double s, double p,
                                  const std::vector<double>& radii, double lipschitz) {
  require(sigma > 0.0, "divergence_experiment: sigma must be positive");
  const std::vector<double> screened = radial_seminorm_pow(u, sigma, s, p, radii);
  const std::vector<double> full = radial_seminorm_pow(u, inf, s, p, radii);
  GrowthTable t;
  t.expected_slope = p * (1 - s);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    GrowthRow row{radii[i], screened[i], full[i], 0.0};
    if (i > 0 && full[i] > 0.0 && full[0] > 0.0)
      row.slope = tail_slope({radii.begin(), radii.begin() + i + 1}, {full.begin(), full.begin() + i + 1});
    t.rows.push_back(row);
    if (i > 0) {
      t.full_monotone = t.full_monotone && full[i] >= full[i - 1];
      t.screened_increments.push_back(screened[i] - screened[i - 1]);
    }
  }
  for (std::size_t i = 1; i < t.screened_increments.size(); ++i)
    if (!(t.screened_increments[i] < t.screened_increments[i - 1])) t.screened_increments_decreasing = false;
  if (!t.screened_increments.empty() && t.screened_increments.front() == 0.0) t.screened_increments_decreasing = true;
  t.full_slope = radii.size() >= 2 ? t.rows.back().slope : 0.0;
  t.full_diverges = t.full_monotone && t.full_slope >= 0.5;
  if (lipschitz > 0.0 && sigma == 1.0) {
    const int n = u.dim;
    t.screened_bound = (unit_ball_volume(n) * sphere_surface(n) * std::pow(lipschitz, p) +
                        sphere_surface(n) * sphere_surface(n) / std::log(2.0)) /
                       ((1 - s) * p);
  }
  return t;
}

GrowthTable divergence_experiment(const ConeWitness& w, double sigma, double s, double p,
                                  const std::vector<double>& radii) {
  require(std::abs(w.p() - p) < 1e-14, "divergence_experiment: witness exponent differs from p");
  return divergence_experiment(radial_profile(w), sigma, s, p, radii, w.lipschitz_constant());
}

nlohmann::json GrowthTable::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows)
    rs.push_back({{"cutoff", r.cutoff}, {"screened", r.screened}, {"full", r.full}, {"slope", r.slope}});
  return {{"rows", rs},
          {"full_slope", full_slope},
          {"expected_slope", expected_slope},
          {"full_monotone", full_monotone},
          {"full_diverges", full_diverges},
          {"screened_increments", screened_increments},
          {"screened_increments_decreasing", screened_increments_decreasing},
          {"screened_bound", screened_bound}};
}

std::string GrowthTable::to_csv() const {
  std::string out = "cutoff,screened,full,slope\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out += csv_number(r.cutoff) + "," + csv_number(r.screened) + "," + csv_number(r.full) + "," +
           (i == 0 ? std::string() : csv_number(r.slope)) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

/// Radial weight of the autocorrelation of the unit cube (0,1)^{N-1} at distance rho,
/// integrated over the sphere of radius rho in R^{N-1}.
double cube_autocorrelation(int n, double rho) {
  if (n == 2) return rho < 1.0 ? 2 * (1 - rho) : 0.0;
  // n == 3: rho ∫ (1 - rho|cos|)_+ (1 - rho|sin|)_+ dphi over the circle
  if (rho >= std::numbers::sqrt2) return 0.0;
  auto g = [rho](double phi) {
    return phi - rho * std::sin(phi) + rho * std::cos(phi) + 0.5 * rho * rho * std::sin(phi) * std::sin(phi);
  };
  const double lo = rho <= 1.0 ? 0.0 : std::acos(1.0 / rho);
  const double hi = rho <= 1.0 ? 0.5 * std::numbers::pi : std::asin(1.0 / rho);
  return rho * 4 * (g(hi) - g(lo));
}

/// K(t) = ∫_{V x V, |x'-y'|^2 + t^2 < cut^2} (|x'-y'|^2 + t^2)^{-k/2} dx' dy'.
double cylinder_kernel(int n, double t, double k, double cut) {
  if (t >= cut) return 0.0;
  double top = n == 2 ? 1.0 : std::numbers::sqrt2;
  if (!std::isinf(cut)) top = std::min(top, std::sqrt(cut * cut - t * t));
  const GaussRule& gl = gauss_legendre(8);
  std::vector<double> pts = {0.0};
  for (double x = std::max(t, 1e-300); x < top; x *= 2) pts.push_back(x);
  if (n == 3 && top > 1.0) pts.push_back(1.0);
  pts.push_back(top);
  std::sort(pts.begin(), pts.end());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double lo = pts[i], hi = pts[i + 1];
    if (!(hi > lo)) continue;
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double rho = c + h * gl.nodes[q];
      acc += h * gl.weights[q] * cube_autocorrelation(n, rho) * std::pow(rho * rho + t * t, -0.5 * k);
    }
  }
  return acc;
}

}  // namespace

double VanishingWitness::sigma(double x_n) const { return 0.5 * std::pow(x_n / b, r); }

VanishingWitness vanishing_witness(int dim, double p, double s, double r, double b) {
  require(dim == 2 || dim == 3, "vanishing witness: N must be 2 or 3");
  require(p >= 1.0, "vanishing witness: p must be >= 1");
  require(s > 0.0 && s < 1.0, "vanishing witness: s must lie in (0, 1)");
  require(b > 0.0, "vanishing witness: b must be positive");
  VanishingWitness w{dim, p, s, r, b};
  require(r > w.threshold(), "vanishing witness: r must exceed (2 - 1/p) / (1 - s) = " +
                                 std::to_string(w.threshold()) + " so that (1-s) r p - 2p > -1");
  return w;
}

VanishingTable vanishing_witness_experiment(const VanishingWitness& w_in, const std::vector<double>& deltas) {
  const VanishingWitness w = vanishing_witness(w_in.dim, w_in.p, w_in.s, w_in.r, w_in.b);
  require(!deltas.empty(), "vanishing experiment: no cutoffs");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    require(deltas[i] > 0.0 && deltas[i] < w.b, "vanishing experiment: cutoffs must lie in (0, b)");
    if (i > 0) require(deltas[i] < deltas[i - 1], "vanishing experiment: cutoffs must decrease");
  }
  const int n = w.dim;
  const double p = w.p, k = w.s * p + n, b = w.b;
  const GaussRule& gl = gauss_legendre(8);
  auto quotient = [p](double x, double y) { return std::pow(std::abs(1.0 / x - 1.0 / y), p); };

  VanishingTable table;
  table.expected_slope = (1 + w.s) * p - 1;
  for (double delta : deltas) {
    std::vector<double> xb;
    for (double x = delta * 1.25; x < b; x *= 1.25) xb.push_back(x);
    // kinks where the screening radius meets either end of (delta, b)
    for (auto meet : {std::function<double(double)>([&](double x) { return w.sigma(x) - (x - delta); }),
                      std::function<double(double)>([&](double x) { return w.sigma(x) - (b - x); })}) {
      double lo = delta, hi = b;
      if ((meet(lo) > 0) == (meet(hi) > 0)) continue;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * b; ++it) {
        const double mid = 0.5 * (lo + hi);
        ((meet(mid) > 0) == (meet(lo) > 0) ? lo : hi) = mid;
      }
      xb.push_back(0.5 * (lo + hi));
    }
    std::sort(xb.begin(), xb.end());
    Nodes outer = graded_nodes(delta, b, xb, 0.0, gl);
    std::vector<double> full(outer.x.size()), screened(outer.x.size());
    parallel_chunks(outer.x.size(), [&](int, std::size_t lo_i, std::size_t hi_i) {
      std::vector<double> yb;
      for (std::size_t i = lo_i; i < hi_i; ++i) {
        const double x = outer.x[i];
        // full: y in (delta, x), doubled by symmetry
        yb.clear();
        for (double y = delta * 1.5; y < x; y *= 1.5) yb.push_back(y);
        const Nodes in = graded_nodes(delta, x, yb, 0.5 * (x - delta), gl);
        double acc = 0.0;
        for (std::size_t j = 0; j < in.x.size(); ++j)
          acc += in.w[j] * quotient(x, in.x[j]) * cylinder_kernel(n, x - in.x[j], k, inf);
        full[i] = 2 * acc;
        // screened: |y - x| < sigma(x) on both sides, y in (delta, b)
        const double sg = w.sigma(x);
        double sc = 0.0;
        for (int side : {-1, 1}) {
          const double reach = side < 0 ? std::min(sg, x - delta) : std::min(sg, b - x);
          // graded at both ends: t -> 0 is singular, t -> sigma has a square-root edge
          std::vector<double> tb;
          for (double e = 0.25 * reach; e > 1e-10 * reach; e *= 0.5) tb.push_back(e);
          const Nodes tn = graded_nodes(0.0, reach, tb, 0.5 * reach, gl);
          for (std::size_t j = 0; j < tn.x.size(); ++j) {
            const double t = reach - tn.x[j];  // graded toward t = 0
            sc += tn.w[j] * quotient(x, x + side * t) * cylinder_kernel(n, t, k, sg);
          }
        }
        screened[i] = sc;
      }
    });
    VanishingRow row{delta, 0.0, 0.0};
    for (std::size_t i = 0; i < outer.x.size(); ++i) {
      row.full += outer.w[i] * full[i];
      row.screened += outer.w[i] * screened[i];
    }
    table.rows.push_back(row);
  }

  std::vector<double> inv, fulls;
  for (const auto& r : table.rows) {
    inv.push_back(1.0 / r.delta);
    fulls.push_back(r.full);
  }
  if (table.rows.size() >= 2) table.full_slope = tail_slope(inv, fulls);
  for (std::size_t i = 1; i < table.rows.size(); ++i)
    table.screened_increments.push_back(table.rows[i].screened - table.rows[i - 1].screened);
  for (std::size_t i = 1; i < table.screened_increments.size(); ++i) {
    const double ratio = table.screened_increments[i] / table.screened_increments[i - 1];
    table.increment_ratios.push_back(ratio);
    table.ratios_below_one = table.ratios_below_one && ratio < 1.0;
    if (i > 1) table.ratios_decreasing = table.ratios_decreasing && ratio < table.increment_ratios[i - 2];
  }
  return table;
}

nlohmann::json VanishingTable::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows) rs.push_back({{"delta", r.delta}, {"screened", r.screened}, {"full", r.full}});
  return {{"rows", rs},
          {"full_slope", full_slope},
          {"expected_slope", expected_slope},
          {"screened_increments", screened_increments},
          {"increment_ratios", increment_ratios},
          {"ratios_below_one", ratios_below_one},
          {"ratios_decreasing", ratios_decreasing}};
}

std::string VanishingTable::to_csv() const {
  std::string out = "cutoff,screened,full,slope\n";
  std::vector<double> inv, fulls;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    inv.push_back(1.0 / rows[i].delta);
    fulls.push_back(rows[i].full);
    out += csv_number(rows[i].delta) + "," + csv_number(rows[i].screened) + "," + csv_number(rows[i].full) + "," +
           (i == 0 ? std::string() : csv_number(tail_slope(inv, fulls))) + "\n";
  }
  return out;
}

}  // namespace sobotrace
