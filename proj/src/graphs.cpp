#include <algorithm>
#include <cmath>

#include "sobotrace/common.hpp"
#include "sobotrace/seminorms.hpp"
#include "sobotrace/tracelift.hpp"
#include "spectral.hpp"
#include "strip_detail.hpp"

namespace sobotrace {

using detail::Columns;

namespace {

void require_box_grid(const Grid& g, const GraphDomain& domain) {
  require(g.dim() >= 2, "graph domain: grid needs a vertical axis");
  const int d = g.dim() - 1;
  for (int a = 0; a < d; ++a) require(g.periodic(a), "graph domain: horizontal axes must be periodic");
  require(!g.periodic(d), "graph domain: the vertical axis must be non-periodic");
  require(horizontal_grid(g) == domain.eta_minus.grid(), "graph domain: graphs must live on the grid's horizontal factor");
  const double lo = g.box().lo[d], hi = g.box().hi[d];
  const double tol = 1e-12 * (hi - lo);
  for (std::size_t i = 0; i < domain.eta_minus.size(); ++i)
    require(domain.eta_minus[i] >= lo - tol && domain.eta_plus[i] <= hi + tol,
            "graph domain: target point outside the sampled box");
}

GraphDomain coarse_domain(const GraphDomain& d) {
  GraphDomain c;
  c.eta_minus = d.eta_minus.subsampled(2);
  c.eta_plus = d.eta_plus.subsampled(2);
  c.lipschitz_L = d.lipschitz_L;
  return c;
}

/// Σ_x' w (|f+ - f-|^p / gap^{p-1}).
double weighted_jump(const SampledField& fm, const SampledField& fp, const GraphDomain& domain, double p) {
  const Grid& hg = fm.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < hg.node_count(); ++i) {
    const double gap = domain.eta_plus[i] - domain.eta_minus[i];
    acc += hg.weight(i) * std::pow(std::abs(fp[i] - fm[i]), p) / std::pow(gap, p - 1.0);
  }
  return acc;
}

/// Cubic Lagrange interpolation in |t| on levels spaced dt, with the even extension below 0.
double level_value(const std::vector<std::vector<double>>& levels, std::size_t i, double t, double dt) {
  double pos = std::abs(t) / dt;
  const double near = std::round(pos);
  if (std::abs(pos - near) < 1e-9) return levels[static_cast<std::size_t>(near)][i];
  const int j0 = static_cast<int>(pos);
  const double x = pos - j0;
  const double w[4] = {-x * (x - 1) * (x - 2) / 6.0, (x + 1) * (x - 1) * (x - 2) / 2.0,
                       -(x + 1) * x * (x - 2) / 2.0, (x + 1) * x * (x - 1) / 6.0};
  double acc = 0.0;
  for (int q = 0; q < 4; ++q) acc += w[q] * levels[std::abs(j0 - 1 + q)][i];
  return acc;
}

}  // namespace

bool GraphDomain::flat() const {
  auto constant = [](const SampledField& f) {
    const auto [lo, hi] = std::minmax_element(f.values().begin(), f.values().end());
    return *lo == *hi;
  };
  return constant(eta_minus) && constant(eta_plus);
}

double lipschitz_estimate(const SampledField& eta) {
  const Grid& g = eta.grid();
  const int d = g.dim();
  std::vector<int> mi(d), mj(d);
  double best = 0.0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    g.multi_index(i, mi);
    double n2 = 0.0;
    for (int a = 0; a < d; ++a) {
      mj = mi;
      mj[a] = mi[a] + 1;
      if (mj[a] == g.nodes(a)) {
        if (!g.periodic(a)) continue;
        mj[a] = 0;
      }
      const double diff = (eta[g.index(mj)] - eta[i]) / g.spacing()[a];
      n2 += diff * diff;
    }
    best = std::max(best, std::sqrt(n2));
  }
  return best;
}

GraphDomain make_graph_domain(SampledField eta_minus, SampledField eta_plus) {
  require(eta_minus.grid() == eta_plus.grid(), "graph domain: eta fields must share a grid");
  const Grid& g = eta_minus.grid();
  for (int a = 0; a < g.dim(); ++a) require(g.periodic(a), "graph domain: the horizontal grid must be periodic");
  for (std::size_t i = 0; i < eta_minus.size(); ++i)
    require(eta_minus[i] < eta_plus[i], "graph domain: requires eta- < eta+ everywhere");
  GraphDomain d;
  d.lipschitz_L = lipschitz_estimate(eta_minus) + lipschitz_estimate(eta_plus);
  d.eta_minus = std::move(eta_minus);
  d.eta_plus = std::move(eta_plus);
  return d;
}

Grid make_graph_grid(const GraphDomain& domain, int vertical_cells) {
  const Grid& hg = domain.eta_minus.grid();
  const double lo = *std::min_element(domain.eta_minus.values().begin(), domain.eta_minus.values().end());
  const double hi = *std::max_element(domain.eta_plus.values().begin(), domain.eta_plus.values().end());
  std::vector<double> blo = hg.box().lo, bhi = hg.box().hi;
  std::vector<bool> per(hg.dim(), true);
  blo.push_back(lo);
  bhi.push_back(hi);
  per.push_back(false);
  std::vector<int> shape = hg.shape();
  shape.push_back(vertical_cells);
  return make_grid(make_box(blo, bhi, per), shape);
}

TracePair graph_traces(const SampledField& u, const GraphDomain& domain) {
  require_box_grid(u.grid(), domain);
  const Columns c = detail::columns_of(u.grid());
  const Grid& hg = domain.eta_minus.grid();
  std::vector<double> lo(c.count), hi(c.count);
  for (std::size_t i = 0; i < c.count; ++i) {
    const double* col = &u.values()[i * c.nv];
    lo[i] = detail::column_value(col, c, domain.eta_minus[i]);
    hi[i] = detail::column_value(col, c, domain.eta_plus[i]);
  }
  return {SampledField(hg, std::move(lo)), SampledField(hg, std::move(hi))};
}

double graph_integral(const SampledField& g, const GraphDomain& domain) {
  require_box_grid(g.grid(), domain);
  const Columns c = detail::columns_of(g.grid());
  const Grid& hg = domain.eta_minus.grid();
  double total = 0.0;
  for (std::size_t i = 0; i < c.count; ++i)
    total += hg.weight(i) * detail::column_integral(&g.values()[i * c.nv], c, domain.eta_minus[i], domain.eta_plus[i]);
  return total;
}

FlattenResult flatten(const SampledField& u, const GraphDomain& domain, int reference_cells) {
  require_box_grid(u.grid(), domain);
  const Columns c = detail::columns_of(u.grid());
  const Grid& hg = domain.eta_minus.grid();
  const SampledField gap = domain.gap();
  const double gmax = gap.max_abs();
  const int d = hg.dim();

  auto stacked = [&](double top, int cells) {
    std::vector<double> lo = hg.box().lo, hi = hg.box().hi;
    std::vector<bool> per(d, true);
    lo.push_back(0.0);
    hi.push_back(top);
    per.push_back(false);
    std::vector<int> shape = hg.shape();
    shape.push_back(cells);
    return make_grid(make_box(lo, hi, per), shape);
  };

  FlattenResult r;
  const int cells1 = std::max(2, static_cast<int>(std::lround(gmax / c.dz)));
  const Grid g1 = stacked(gmax, cells1);
  const int n1 = cells1 + 1;
  const double dy = gmax / cells1;
  std::vector<double> w(g1.node_count()), inside(g1.node_count());
  for (std::size_t i = 0; i < c.count; ++i) {
    const double* col = &u.values()[i * c.nv];
    for (int j = 0; j < n1; ++j) {
      const double y = j * dy;
      w[i * n1 + j] = detail::column_value(col, c, y + domain.eta_minus[i]);
      inside[i * n1 + j] = y <= gap[i] * (1.0 + 1e-12) ? 1.0 : 0.0;
    }
  }
  r.first = SampledField(g1, std::move(w));
  r.inside = SampledField(g1, std::move(inside));

  const int cells2 = reference_cells > 0 ? reference_cells : c.nv - 1;
  const Grid g2 = stacked(1.0, cells2);
  const int n2 = cells2 + 1;
  std::vector<double> ref(g2.node_count());
  for (std::size_t i = 0; i < c.count; ++i) {
    const double* col = &u.values()[i * c.nv];
    for (int j = 0; j < n2; ++j) {
      const double tau = static_cast<double>(j) / cells2;
      ref[i * n2 + j] = detail::column_value(col, c, domain.eta_minus[i] + tau * gap[i]);
    }
  }
  r.reference = SampledField(g2, std::move(ref));
  r.jacobian = gap;
  return r;
}

double flattened_integral(const SampledField& w, const GraphDomain& domain) {
  const Columns c = detail::columns_of(w.grid());
  const Grid& hg = domain.eta_minus.grid();
  require(horizontal_grid(w.grid()) == hg, "flattened_integral: grid mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < c.count; ++i)
    total += hg.weight(i) * detail::column_integral(&w.values()[i * c.nv], c, 0.0, domain.eta_plus[i] - domain.eta_minus[i]);
  return total;
}

namespace {

struct GraphSides {
  double jump = 0.0, normal = 0.0, gradient = 0.0;
};

GraphSides graph_sides(const SampledField& u, const GraphDomain& domain, double p) {
  const int d = u.grid().dim() - 1;
  const TracePair tp = graph_traces(u, domain);
  const SampledField dn = partial_derivative(u, d, 1).map([p](double v) { return std::pow(std::abs(v), p); });
  const SampledField grad = gradient_magnitude(u, 1).map([p](double v) { return std::pow(v, p); });
  return {weighted_jump(tp.f_minus, tp.f_plus, domain, p), graph_integral(dn, domain), graph_integral(grad, domain)};
}

}  // namespace

CheckResult graph_trace_check(const SampledField& u, const GraphDomain& domain, double p) {
  require(p > 1.0, "graph_trace_check: p must exceed 1");
  require_box_grid(u.grid(), domain);
  const int d = u.grid().dim() - 1;
  if (domain.flat() && domain.eta_minus[0] == u.grid().box().lo[d] && domain.eta_plus[0] == u.grid().box().hi[d])
    return trace_check_m1(u, p);

  const double L = domain.lipschitz_L;
  const double s = 1.0 - 1.0 / p;
  const GraphSides fine = graph_sides(u, domain, p);
  GraphSides gap;
  if (auto cu = detail::coarse_copy(u, 5)) {
    const GraphSides cs = graph_sides(*cu, coarse_domain(domain), p);
    gap = {std::abs(cs.jump - fine.jump), std::abs(cs.normal - fine.normal), std::abs(cs.gradient - fine.gradient)};
  }
  CheckResult res;
  res.reports.push_back(make_report("trace1", fine.jump, fine.normal, 1.0, 3.0 * (gap.jump + gap.normal)));

  const double L_eff = std::max(L, 1.0);
  const ScreeningFunction sigma = ScreeningFunction::graph_gap(0.5 / L_eff, domain.eta_minus, domain.eta_plus);
  const double C = std::pow(1.0 + L, p) * strip_trace_constant(d, p);
  const TracePair tp = graph_traces(u, domain);
  for (const auto& [id, f] : {std::pair{"trace2_minus", &tp.f_minus}, std::pair{"trace2_plus", &tp.f_plus}}) {
    const SeminormResult sem = screened_seminorm(*f, sigma, s, p);
    res.reports.push_back(make_report(id, sem.power, fine.gradient, C, 3.0 * (sem.power_error + C * gap.gradient),
                                      {{"seminorm_error", sem.power_error}}));
  }
  res.info = {{"p", p}, {"L", L}, {"screening_scale", 0.5 / L_eff}, {"gradient_norm_pow", fine.gradient}};
  return res;
}

SampledField graph_lift_m1(const TracePair& pair, const GraphDomain& domain, const Grid& grid, double a,
                           const CutoffProfile& cutoff) {
  require(a > 0.0 && a < 1.0, "graph_lift_m1: a must lie in (0, 1)");
  require_box_grid(grid, domain);
  const Grid& hg = domain.eta_minus.grid();
  require(pair.f_minus.grid() == hg && pair.f_plus.grid() == hg, "graph_lift_m1: data must live on the graphs' grid");
  const int d = hg.dim();
  const RadialFourier ft = mollifier_fourier(build_moment_mollifier(d, 1, 1));
  const Columns c = detail::columns_of(grid);
  const double height = (c.nv - 1) * c.dz;

  // v±(., t) = phi_t * f± on levels t = l dt, then interpolated per node.
  const double dt = 0.5 * c.dz;
  const int levels = static_cast<int>(std::ceil(height / dt)) + 4;
  std::vector<double> scales(levels);
  for (int l = 0; l < levels; ++l) scales[l] = a * l * dt;
  detail::HorizontalSpectrum spec(hg);
  const auto lower = detail::convolve_levels(spec, pair.f_minus, ft, scales);
  const auto upper = detail::convolve_levels(spec, pair.f_plus, ft, scales);

  std::vector<double> u(grid.node_count());
  parallel_chunks(c.count, [&](int, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const double em = domain.eta_minus[i], ep = domain.eta_plus[i];
      for (int j = 0; j < c.nv; ++j) {
        const double z = grid.coordinate(d, j);
        const double theta = cutoff((z - em) / (ep - em));
        double v = 0.0;
        if (theta > 0.0) v += theta * level_value(lower, i, z - em, dt);
        if (theta < 1.0) v += (1.0 - theta) * level_value(upper, i, ep - z, dt);
        u[i * c.nv + j] = v;
      }
    }
  });
  return SampledField(grid, std::move(u));
}

LiftEnergy graph_lift_energy(const TracePair& pair, const SampledField& lifted, const GraphDomain& domain, double a,
                             double p) {
  require(p > 1.0, "lift energy: p must exceed 1");
  const double s = 1.0 - 1.0 / p;
  LiftEnergy e;
  e.energy = graph_integral(gradient_magnitude(lifted, 1).map([p](double v) { return std::pow(v, p); }), domain);
  e.jump = weighted_jump(pair.f_minus, pair.f_plus, domain, p);
  const ScreeningFunction sigma = ScreeningFunction::graph_gap(a, domain.eta_minus, domain.eta_plus);
  const SeminormResult lo = screened_seminorm(pair.f_minus, sigma, s, p);
  const SeminormResult hi = screened_seminorm(pair.f_plus, sigma, s, p);
  e.seminorms = lo.power + hi.power;
  e.seminorm_error = lo.power_error + hi.power_error;
  const double data = e.jump + e.seminorms;
  e.ratio = data > 0.0 ? e.energy / data : 0.0;
  return e;
}

}  // namespace sobotrace
