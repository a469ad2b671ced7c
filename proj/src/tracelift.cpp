#include "sobotrace/tracelift.hpp"

#include <algorithm>
#include <cmath>

#include "sobotrace/common.hpp"
#include "sobotrace/quadrature.hpp"
#include "sobotrace/seminorms.hpp"
#include "strip_detail.hpp"

namespace sobotrace {

namespace detail {

Columns columns_of(const Grid& g) {
  const int v = g.dim() - 1;
  require(!g.periodic(v), "columns: the vertical (last) axis must be non-periodic");
  Columns c;
  c.nv = g.nodes(v);
  c.count = g.node_count() / c.nv;
  c.lo = g.box().lo[v];
  c.dz = g.spacing()[v];
  return c;
}

double column_value(const double* col, const Columns& c, double z) {
  double pos = (z - c.lo) / c.dz;
  const double near = std::round(pos);
  if (std::abs(pos - near) < 1e-9) pos = near;
  pos = std::clamp(pos, 0.0, static_cast<double>(c.nv - 1));
  const int j = std::min(static_cast<int>(pos), c.nv - 2);
  const double t = pos - j;
  if (t == 0.0) return col[j];
  if (t == 1.0) return col[j + 1];
  return (1.0 - t) * col[j] + t * col[j + 1];
}

double column_integral(const double* col, const Columns& c, double a, double b) {
  const double top = c.lo + (c.nv - 1) * c.dz;
  a = std::clamp(a, c.lo, top);
  b = std::clamp(b, c.lo, top);
  if (b <= a) return 0.0;
  const int j0 = std::clamp(static_cast<int>(std::floor((a - c.lo) / c.dz)), 0, c.nv - 2);
  const int j1 = std::clamp(static_cast<int>(std::ceil((b - c.lo) / c.dz)), 1, c.nv - 1);
  double total = 0.0;
  for (int j = j0; j < j1; ++j) {
    const double z0 = c.lo + j * c.dz, z1 = z0 + c.dz;
    const double l = std::max(a, z0), r = std::min(b, z1);
    if (r <= l) continue;
    auto at = [&](double z) { return col[j] + (col[j + 1] - col[j]) * (z - z0) / c.dz; };
    total += 0.5 * (r - l) * (at(l) + at(r));
  }
  return total;
}

SampledField plane(const SampledField& u, const Grid& horizontal, int j) {
  const Columns c = columns_of(u.grid());
  std::vector<double> v(c.count);
  for (std::size_t i = 0; i < c.count; ++i) v[i] = u[i * c.nv + j];
  return SampledField(horizontal, std::move(v));
}

std::optional<SampledField> coarse_copy(const SampledField& u, int min_vertical_nodes) {
  const Grid& g = u.grid();
  if (!g.can_subsample(2)) return std::nullopt;
  const Grid cg = g.subsampled(2);
  for (int a = 0; a < g.dim(); ++a) {
    if (g.periodic(a) && cg.nodes(a) < 8) return std::nullopt;
  }
  if (cg.nodes(g.dim() - 1) < min_vertical_nodes) return std::nullopt;
  return u.subsampled(2);
}

}  // namespace detail

using detail::Columns;

namespace {

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

SampledField magnitude(const std::vector<SampledField>& comps) {
  if (comps.size() == 1) return comps[0].map([](double v) { return std::abs(v); });
  std::vector<double> v(comps[0].size(), 0.0);
  for (const auto& c : comps)
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += c[i] * c[i];
  for (double& x : v) x = std::sqrt(x);
  return SampledField(comps[0].grid(), std::move(v));
}

/// Wall values of ∂_N^k with a one-sided stencil of `npts` nodes.
SampledField wall_derivative(const SampledField& u, const Grid& hg, int k, int npts, bool top) {
  const Columns c = detail::columns_of(u.grid());
  require(c.nv >= npts, "wall jets: too few vertical nodes for the one-sided stencil");
  std::vector<double> nodes(npts);
  for (int q = 0; q < npts; ++q) nodes[q] = (top ? -q : q) * c.dz;
  const std::vector<double> w = fd_weights(nodes, 0.0, k);
  std::vector<double> v(c.count);
  for (std::size_t i = 0; i < c.count; ++i) {
    const double* col = &u.values()[i * c.nv];
    double acc = 0.0;
    for (int q = 0; q < npts; ++q) acc += w[q] * col[top ? c.nv - 1 - q : q];
    v[i] = acc;
  }
  return SampledField(hg, std::move(v));
}

}  // namespace

StripDomain make_strip(const Box& horizontal, double b_minus, double b_plus) {
  require(b_minus < b_plus, "strip: b_minus must be below b_plus");
  require(horizontal.dim() >= 1 && horizontal.dim() + 1 <= kMaxDim, "strip: horizontal dimension must be in [1, 3]");
  for (int a = 0; a < horizontal.dim(); ++a) require(horizontal.periodic[a], "strip: the horizontal cell must be periodic");
  return StripDomain{b_minus, b_plus, horizontal};
}

StripDomain strip_of(const Grid& g) {
  require(g.dim() >= 2, "strip grid: needs at least one horizontal and one vertical axis");
  const int d = g.dim() - 1;
  for (int a = 0; a < d; ++a) require(g.periodic(a), "strip grid: horizontal axes must be periodic");
  require(!g.periodic(d), "strip grid: the vertical axis must include the boundary planes");
  Box h = make_box(std::vector<double>(g.box().lo.begin(), g.box().lo.begin() + d),
                   std::vector<double>(g.box().hi.begin(), g.box().hi.begin() + d), std::vector<bool>(d, true));
  return StripDomain{g.box().lo[d], g.box().hi[d], h};
}

Grid make_strip_grid(const StripDomain& strip, const std::vector<int>& horizontal_shape, int vertical_cells) {
  const int d = strip.horizontal_dim();
  require(static_cast<int>(horizontal_shape.size()) == d, "strip grid: horizontal shape has the wrong length");
  std::vector<double> lo = strip.horizontal.lo, hi = strip.horizontal.hi;
  std::vector<bool> per(d, true);
  lo.push_back(strip.b_minus);
  hi.push_back(strip.b_plus);
  per.push_back(false);
  std::vector<int> shape = horizontal_shape;
  shape.push_back(vertical_cells);
  return make_grid(make_box(lo, hi, per), shape);
}

Grid horizontal_grid(const Grid& g) {
  require(g.dim() >= 2, "horizontal grid: needs a vertical axis");
  const int d = g.dim() - 1;
  Box h = make_box(std::vector<double>(g.box().lo.begin(), g.box().lo.begin() + d),
                   std::vector<double>(g.box().hi.begin(), g.box().hi.begin() + d),
                   std::vector<bool>(g.box().periodic.begin(), g.box().periodic.begin() + d));
  return make_grid(h, std::vector<int>(g.shape().begin(), g.shape().begin() + d));
}

TraceJet make_jet(std::vector<SampledField> minus, std::vector<SampledField> plus) {
  require(!minus.empty() && minus.size() == plus.size(), "trace jet: f_k^- and f_k^+ must be given for every k < m");
  for (const auto& f : minus) require(f.grid() == minus[0].grid(), "trace jet: components must share a grid");
  for (const auto& f : plus) require(f.grid() == minus[0].grid(), "trace jet: components must share a grid");
  TraceJet j;
  j.order = static_cast<int>(minus.size());
  j.minus = std::move(minus);
  j.plus = std::move(plus);
  return j;
}

double CutoffProfile::operator()(double tau) const {
  require(delta > 0.0 && delta < 0.5 && order >= 1, "cutoff: delta must lie in (0, 1/2) and order >= 1");
  const double x = std::clamp((tau - delta) / (1.0 - 2.0 * delta), 0.0, 1.0);
  if (x == 0.0) return 1.0;
  if (x == 1.0) return 0.0;
  const int n = order;
  double s = 0.0;
  for (int k = 0; k <= n; ++k) s += binomial(n + k, k) * binomial(2 * n + 1, n - k) * std::pow(-x, k);
  return 1.0 - std::pow(x, n + 1) * s;
}

double CutoffProfile::derivative(double tau) const {
  require(delta > 0.0 && delta < 0.5 && order >= 1, "cutoff: delta must lie in (0, 1/2) and order >= 1");
  const double w = 1.0 - 2.0 * delta;
  const double x = (tau - delta) / w;
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const int n = order;
  // S_n'(x) = (2n+1)!/(n!)^2 x^n (1-x)^n.
  const double c = factorial(2 * n + 1) / (factorial(n) * factorial(n));
  return -c * std::pow(x * (1.0 - x), n) / w;
}

TracePair trace_pair(const SampledField& u, TraceMode mode) {
  strip_of(u.grid());
  const Grid hg = horizontal_grid(u.grid());
  const Columns c = detail::columns_of(u.grid());
  if (mode == TraceMode::BoundaryPlane) return {detail::plane(u, hg, 0), detail::plane(u, hg, c.nv - 1)};
  require(c.nv >= 3, "trace: extrapolation needs two interior planes");
  auto extrap = [&](int j1, int j2) {
    return detail::plane(u, hg, j1) * 2.0 - detail::plane(u, hg, j2);
  };
  return {extrap(1, 2), extrap(c.nv - 2, c.nv - 3)};
}

const InequalityReport& CheckResult::find(const std::string& id) const {
  for (const auto& r : reports)
    if (r.id == id) return r;
  throw InvalidArgument("check result: no report with id " + id);
}

nlohmann::json CheckResult::to_json() const {
  return {{"reports", sobotrace::to_json(reports)}, {"info", info}, {"pass", pass()}};
}

double strip_trace_constant(int horizontal_dim, double p) {
  require(p > 1.0, "trace constant: p must exceed 1");
  return std::pow(3.0, p) * sphere_surface(horizontal_dim) * std::pow(p / (p - 1.0), p);
}

namespace {

struct M1Sides {
  double jump = 0.0, normal = 0.0, gradient = 0.0;
};

M1Sides m1_sides(const SampledField& u, double p) {
  const TracePair tp = trace_pair(u);
  const int d = u.grid().dim() - 1;
  return {lp_norm_pow(tp.f_plus - tp.f_minus, p), lp_norm_pow(partial_derivative(u, d, 1), p),
          sobolev_seminorm_pow(u, 1, p)};
}

}  // namespace

CheckResult trace_check_m1(const SampledField& u, double p) {
  require(p > 1.0, "trace_check_m1: p must exceed 1");
  const StripDomain strip = strip_of(u.grid());
  const double b = strip.height();
  const double s = 1.0 - 1.0 / p;
  const double C = strip_trace_constant(strip.horizontal_dim(), p);
  const M1Sides fine = m1_sides(u, p);
  M1Sides gap;
  if (auto coarse = detail::coarse_copy(u, 5)) {
    const M1Sides c = m1_sides(*coarse, p);
    gap = {std::abs(c.jump - fine.jump), std::abs(c.normal - fine.normal), std::abs(c.gradient - fine.gradient)};
  }
  const double bp = std::pow(b, p - 1.0);
  CheckResult res;
  res.reports.push_back(make_report("est1", fine.jump, fine.normal, bp, 3.0 * (gap.jump + bp * gap.normal)));
  const TracePair tp = trace_pair(u);
  const ScreeningFunction sigma = ScreeningFunction::constant(b);
  for (const auto& [id, f] : {std::pair{"est2_minus", &tp.f_minus}, std::pair{"est2_plus", &tp.f_plus}}) {
    const SeminormResult sem = screened_seminorm(*f, sigma, s, p);
    res.reports.push_back(make_report(id, sem.power, fine.gradient, C, 3.0 * (sem.power_error + C * gap.gradient),
                                      {{"seminorm_error", sem.power_error}}));
  }
  res.info = {{"p", p}, {"s", s}, {"height", b}, {"gradient_norm_pow", fine.gradient}};
  return res;
}

CheckResult trace_check_p1(const SampledField& u, const std::vector<double>& eps) {
  const StripDomain strip = strip_of(u.grid());
  const double b = strip.height();
  const int d = strip.horizontal_dim();
  const Grid hg = horizontal_grid(u.grid());
  for (double e : eps) require(e > 0.0 && e <= b, "trace_check_p1: eps must lie in (0, b+ - b-]");

  auto band_integrals = [&](const SampledField& v, double e) {
    const SampledField g = gradient_magnitude(v, 1);
    const Columns c = detail::columns_of(v.grid());
    const Grid vh = horizontal_grid(v.grid());
    double lower = 0.0, upper = 0.0;
    for (std::size_t i = 0; i < c.count; ++i) {
      const double* col = &g.values()[i * c.nv];
      const double w = vh.weight(i);
      lower += w * detail::column_integral(col, c, strip.b_minus, strip.b_minus + e);
      upper += w * detail::column_integral(col, c, strip.b_plus - e, strip.b_plus);
    }
    return std::pair{lower, upper};
  };
  auto eq1_sides = [&](const SampledField& v) {
    const TracePair tp = trace_pair(v);
    return std::pair{lp_norm_pow(tp.f_plus - tp.f_minus, 1.0), lp_norm_pow(partial_derivative(v, d, 1), 1.0)};
  };

  const auto coarse = detail::coarse_copy(u, 5);
  CheckResult res;
  {
    const auto [lhs, rhs] = eq1_sides(u);
    double slack = 0.0;
    if (coarse) {
      const auto [cl, cr] = eq1_sides(*coarse);
      slack = 3.0 * (std::abs(cl - lhs) + std::abs(cr - rhs));
    }
    res.reports.push_back(make_report("eq1", lhs, rhs, 1.0, slack));
  }

  // Grid shifts with |h'| <= eps (nonzero), enumerated once for the largest eps.
  const double emax = *std::max_element(eps.begin(), eps.end());
  std::vector<std::vector<int>> shifts;
  {
    std::vector<int> lim(d);
    for (int a = 0; a < d; ++a) lim[a] = std::min(static_cast<int>(emax / hg.spacing()[a] + 1e-9), hg.nodes(a) / 2);
    std::vector<int> s(d);
    std::function<void(int)> rec = [&](int a) {
      if (a == d) {
        if (std::any_of(s.begin(), s.end(), [](int v) { return v != 0; })) shifts.push_back(s);
        return;
      }
      for (int k = -lim[a]; k <= lim[a]; ++k) {
        s[a] = k;
        rec(a + 1);
      }
    };
    rec(0);
  }
  auto shift_length = [&](const std::vector<int>& s) {
    double l2 = 0.0;
    for (int a = 0; a < d; ++a) l2 += (s[a] * hg.spacing()[a]) * (s[a] * hg.spacing()[a]);
    return std::sqrt(l2);
  };
  auto shifted_l1 = [&](const SampledField& f, const std::vector<int>& s) {
    std::vector<int> mi(d), mj(d);
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      hg.multi_index(i, mi);
      for (int a = 0; a < d; ++a) mj[a] = ((mi[a] + s[a]) % hg.nodes(a) + hg.nodes(a)) % hg.nodes(a);
      acc += hg.weight(i) * std::abs(f[hg.index(mj)] - f[i]);
    }
    return acc;
  };

  const TracePair tp = trace_pair(u);
  std::vector<double> ordered = eps;
  std::sort(ordered.begin(), ordered.end(), std::greater<>());
  nlohmann::json sups = nlohmann::json::array();
  bool decreasing = true;
  double prev_minus = INFINITY, prev_plus = INFINITY;
  for (double e : ordered) {
    const auto [lower, upper] = band_integrals(u, e);
    double slack_rhs = 0.0;
    if (coarse) {
      const auto [cl, cu] = band_integrals(*coarse, e);
      slack_rhs = std::abs(cl - lower) + std::abs(cu - upper);
    }
    const double both = lower + upper;
    double sup_minus = 0.0, sup_plus = 0.0;
    for (const auto& s : shifts) {
      if (shift_length(s) > e * (1.0 + 1e-12)) continue;
      sup_minus = std::max(sup_minus, shifted_l1(tp.f_minus, s));
      sup_plus = std::max(sup_plus, shifted_l1(tp.f_plus, s));
    }
    char tag[64];
    std::snprintf(tag, sizeof tag, "%.6g", e);
    for (const auto& [side, sup, band] : {std::tuple{"minus", sup_minus, lower}, std::tuple{"plus", sup_plus, upper}}) {
      const double slack = 3.0 * 3.0 * slack_rhs;
      res.reports.push_back(make_report(std::string("eq2_") + side + "_eps=" + tag, sup, both, 3.0, slack,
                                        {{"eps", e},
                                         {"adjacent_band", band},
                                         {"statement_constant", 1.0},
                                         {"statement_pass", sup <= both + slack / 3.0}}));
    }
    decreasing = decreasing && sup_minus <= prev_minus * (1.0 + 1e-12) && sup_plus <= prev_plus * (1.0 + 1e-12);
    prev_minus = sup_minus;
    prev_plus = sup_plus;
    sups.push_back({{"eps", e}, {"sup_minus", sup_minus}, {"sup_plus", sup_plus}});
  }
  res.info = {{"sup_by_eps", sups}, {"sup_decreasing", decreasing}};
  return res;
}

TraceJet wall_jets(const SampledField& u, int m) {
  require(m >= 1, "wall jets: order must be >= 1");
  strip_of(u.grid());
  const Grid hg = horizontal_grid(u.grid());
  TraceJet j;
  j.order = m;
  for (int k = 0; k < m; ++k) {
    const int npts = std::max(k + 3, m + 1);
    j.minus.push_back(k == 0 ? detail::plane(u, hg, 0) : wall_derivative(u, hg, k, npts, false));
    SampledField top = wall_derivative(u, hg, k, npts, true);
    // d/dx_N at the top wall: the stencil nodes run downward, so the weights already carry the sign.
    j.plus.push_back(k == 0 ? detail::plane(u, hg, detail::columns_of(u.grid()).nv - 1) : top);
  }
  return j;
}

std::vector<SampledField> q_polynomial(const TraceJet& jet, int i, int m, int n, double height) {
  require(i >= 0 && n >= 0 && m >= 1, "q_polynomial: indices must be nonnegative and m >= 1");
  require(i + n <= m - 1, "q_polynomial: requires i + n <= m - 1");
  require(m <= jet.order, "q_polynomial: the jet has fewer than m components");
  require(height > 0.0, "q_polynomial: height must be positive");
  const Grid& hg = jet.minus[0].grid();
  std::vector<SampledField> out;
  for (const auto& beta : multi_indices(hg.dim(), i)) {
    std::vector<double> acc(hg.node_count(), 0.0);
    for (int k = 0; k <= m - i - n - 1; ++k) {
      const double c = ((k % 2) ? -1.0 : 1.0) / factorial(k) * std::pow(0.5 * height, k);
      const double sign_minus = (k % 2) ? 1.0 : -1.0;  // (-1)^{k+1}
      const SampledField fp = i == 0 ? jet.plus[k + n] : derivative(jet.plus[k + n], beta);
      const SampledField fm = i == 0 ? jet.minus[k + n] : derivative(jet.minus[k + n], beta);
      for (std::size_t q = 0; q < acc.size(); ++q) acc[q] += c * (fp[q] + sign_minus * fm[q]);
    }
    out.emplace_back(hg, std::move(acc));
  }
  return out;
}

namespace {

struct HigherSides {
  std::vector<double> q_lhs;   // indexed like the (i, l) loop
  double energy = 0.0;         // ‖∇^m u‖_p^p
  double sem_minus = 0.0, sem_plus = 0.0, sem_error_minus = 0.0, sem_error_plus = 0.0;
  double sem_rhs = 0.0;        // Σ_beta ‖∇∂^beta u‖_p^p
};

HigherSides higher_sides(const SampledField& u, int m, double p, bool seminorms) {
  const StripDomain strip = strip_of(u.grid());
  const double b = strip.height();
  const int N = u.grid().dim();
  HigherSides h;
  const TraceJet jet = wall_jets(u, m);
  for (int i = 0; i <= m - 1; ++i)
    for (int l = 0; i + l <= m - 1; ++l) h.q_lhs.push_back(lp_norm_pow(magnitude(q_polynomial(jet, i, m, l, b)), p));
  h.energy = sobolev_seminorm_pow(u, m, p);
  if (!seminorms) return h;
  const double s = 1.0 - 1.0 / p;
  const ScreeningFunction sigma = ScreeningFunction::constant(b);
  for (const auto& beta : multi_indices(N, m - 1)) {
    const SampledField D = derivative(u, beta);
    const TracePair tp = trace_pair(D);
    const SeminormResult lo = screened_seminorm(tp.f_minus, sigma, s, p);
    const SeminormResult hi = screened_seminorm(tp.f_plus, sigma, s, p);
    h.sem_minus += lo.power;
    h.sem_plus += hi.power;
    h.sem_error_minus += lo.power_error;
    h.sem_error_plus += hi.power_error;
    h.sem_rhs += sobolev_seminorm_pow(D, 1, p);
  }
  return h;
}

}  // namespace

CheckResult trace_check_higher(const SampledField& u, int m, double p) {
  require(m >= 1, "trace_check_higher: m must be >= 1");
  require(p > 1.0, "trace_check_higher: p must exceed 1");
  const StripDomain strip = strip_of(u.grid());
  const double b = strip.height();
  const HigherSides fine = higher_sides(u, m, p, true);
  std::optional<HigherSides> coarse;
  if (auto cu = detail::coarse_copy(u, std::max(2 * m + 1, m + 3))) coarse = higher_sides(*cu, m, p, false);
  const double C = strip_trace_constant(strip.horizontal_dim(), p);

  CheckResult res;
  const double energy_gap = coarse ? std::abs(coarse->energy - fine.energy) : 0.0;
  std::size_t idx = 0;
  for (int i = 0; i <= m - 1; ++i) {
    for (int l = 0; i + l <= m - 1; ++l, ++idx) {
      const double constant = std::pow(b, (m - i - l) * p - 1.0);
      const double lhs_gap = coarse ? std::abs(coarse->q_lhs[idx] - fine.q_lhs[idx]) : 0.0;
      res.reports.push_back(make_report("q_" + std::to_string(i) + "_" + std::to_string(l), fine.q_lhs[idx],
                                        fine.energy, constant, 3.0 * (lhs_gap + constant * energy_gap),
                                        {{"i", i}, {"l", l}}));
    }
  }
  // The seminorm bound reuses the m = 1 constant on each derivative of order m - 1; its
  // right side changes with resolution like the energy does.
  const double sem_rhs_gap = fine.energy > 0.0 ? energy_gap / fine.energy * fine.sem_rhs : 0.0;
  res.reports.push_back(make_report("seminorm_minus", fine.sem_minus, fine.sem_rhs, C,
                                    3.0 * (fine.sem_error_minus + C * sem_rhs_gap)));
  res.reports.push_back(make_report("seminorm_plus", fine.sem_plus, fine.sem_rhs, C,
                                    3.0 * (fine.sem_error_plus + C * sem_rhs_gap)));
  res.info = {{"m", m}, {"p", p}, {"height", b}, {"gradient_m_norm_pow", fine.energy}};
  return res;
}

ByPartsResult by_parts_check(const SampledField& f, int m) {
  const Grid& g = f.grid();
  require(g.dim() == 1 && !g.periodic(0), "by_parts_check: needs a non-periodic 1-D field");
  require(m >= 1, "by_parts_check: m must be >= 1");
  const int n = g.nodes(0);
  const int npts = m + 2;
  require(n >= npts, "by_parts_check: resolution insufficient for (m+2)-node stencils");
  const double h = g.spacing()[0];
  const double b = g.box().extent(0);
  const auto& v = f.values();

  // k-th derivative at node j from the (m+2)-node window nearest to it.
  auto deriv = [&](int j, int k) {
    int start = std::clamp(j - npts / 2, 0, n - npts);
    std::vector<double> nodes(npts);
    for (int q = 0; q < npts; ++q) nodes[q] = (start + q - j) * h;
    const std::vector<double> w = fd_weights(nodes, 0.0, k);
    double acc = 0.0;
    for (int q = 0; q < npts; ++q) acc += w[q] * v[start + q];
    return acc;
  };
  std::vector<double> fm(n);
  for (int j = 0; j < n; ++j) fm[j] = deriv(j, m);

  // ∫_{t0}^{b} (piecewise-linear interpolant of f^(m))(t) weight(t) dt, exact per cell.
  const GaussRule& gl = gauss_legendre(std::max(2, (m + 3) / 2 + 1));
  auto weighted = [&](int j0, const std::function<double(double)>& weight) {
    double total = 0.0;
    for (int j = j0; j < n - 1; ++j) {
      const double t0 = j * h;
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const double x = 0.5 * (gl.nodes[q] + 1.0);
        total += 0.5 * h * gl.weights[q] * ((1.0 - x) * fm[j] + x * fm[j + 1]) * weight(t0 + x * h);
      }
    }
    return total;
  };

  ByPartsResult r;
  std::vector<double> at_b(m);
  for (int k = 0; k < m; ++k) {
    at_b[k] = k == 0 ? v[n - 1] : deriv(n - 1, k);
    const double at_0 = k == 0 ? v[0] : deriv(0, k);
    const double sign = (k % 2) ? -1.0 : 1.0;
    r.lhs += sign / factorial(k) * (at_b[k] + -sign * at_0) * std::pow(0.5 * b, k);
  }
  r.rhs = weighted(0, [&](double t) { return std::pow(0.5 * b - t, m - 1); }) / factorial(m - 1);
  r.residual = std::abs(r.lhs - r.rhs);

  for (int j = 0; j < n; ++j) {
    const double t = j * h;
    double taylor = 0.0;
    for (int k = 0; k < m; ++k) taylor += ((k % 2) ? -1.0 : 1.0) / factorial(k) * at_b[k] * std::pow(b - t, k);
    const double rem = weighted(j, [&](double tau) { return std::pow(t - tau, m - 1); }) / factorial(m - 1);
    r.taylor_residual = std::max(r.taylor_residual, std::abs(v[j] - taylor + rem));
  }
  return r;
}

nlohmann::json ByPartsResult::to_json() const {
  return {{"lhs", lhs}, {"rhs", rhs}, {"residual", residual}, {"taylor_residual", taylor_residual}};
}

}  // namespace sobotrace
