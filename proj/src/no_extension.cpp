#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "sobotrace/common.hpp"
#include "sobotrace/seminorms.hpp"
#include "sobotrace/tracelift.hpp"
#include "sobotrace/witnesses.hpp"

namespace sobotrace {

std::string to_string(BoundaryDatum d) {
  switch (d) {
    case BoundaryDatum::ConeWitness: return "cone";
    case BoundaryDatum::Bump: return "bump";
    case BoundaryDatum::Constant: return "constant";
  }
  return "cone";
}

BoundaryDatum boundary_datum_from_string(const std::string& s) {
  if (s == "cone") return BoundaryDatum::ConeWitness;
  if (s == "bump") return BoundaryDatum::Bump;
  if (s == "constant") return BoundaryDatum::Constant;
  throw InvalidArgument("unknown boundary datum '" + s + "' (expected cone, bump or constant)");
}

NoExtensionReport no_extension_demo(double p, BoundaryDatum datum, const std::vector<double>& cells,
                                    int nodes_per_unit, int vertical_cells) {
  require(p > 1.0, "no_extension_demo: p must exceed 1");
  require(!cells.empty(), "no_extension_demo: no cell sizes");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    require(cells[i] >= 4.0, "no_extension_demo: cell sizes must be at least 4");
    if (i > 0) require(cells[i] > cells[i - 1], "no_extension_demo: cell sizes must increase");
  }
  require(nodes_per_unit >= 2 && vertical_cells >= 4, "no_extension_demo: resolution too small");
  const double s = 1.0 - 1.0 / p;

  // The trace lives on R^{N-1} with N - 1 = 1.
  RadialProfile f{1, nullptr};
  switch (datum) {
    case BoundaryDatum::ConeWitness: f = radial_profile(cone_witness(1, p)); break;
    case BoundaryDatum::Bump:
      f.f = [](double r) { return r < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0; };
      break;
    case BoundaryDatum::Constant: f.f = [](double) { return 1.0; }; break;
  }

  NoExtensionReport rep;
  rep.p = p;
  rep.datum = datum;
  for (double cell : cells) {
    const int n = static_cast<int>(std::lround(cell * nodes_per_unit));
    const StripDomain strip = make_strip(make_box({-0.5 * cell}, {0.5 * cell}, {true}), 0.0, 1.0);
    const Grid g = make_strip_grid(strip, {n}, vertical_cells);
    const SampledField trace = sample([&](std::span<const double> x) { return f.f(std::abs(x[0])); }, horizontal_grid(g));
    const SampledField u = lift_m1({trace, trace}, g);
    NoExtensionRow row;
    row.cell = cell;
    row.energy = sobolev_seminorm_pow(u, 1, p);
    // FFT round-off on constant data leaves energies near 1e-27; the data here are O(1)
    if (row.energy < 1e-14 * cell) row.energy = 0.0;
    row.boundary_full = radial_seminorm_pow(f, std::numeric_limits<double>::infinity(), s, p, {0.5 * cell}).front();
    SeminormOptions opts;
    opts.estimate_error = false;
    row.boundary_screened = screened_seminorm(trace, ScreeningFunction::constant(0.5), s, p, opts).power;
    rep.rows.push_back(row);
  }

  double lo = rep.rows.front().energy, hi = lo;
  for (const auto& r : rep.rows) {
    lo = std::min(lo, r.energy);
    hi = std::max(hi, r.energy);
  }
  rep.energy_spread = hi == 0.0 ? 1.0 : (lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity());
  rep.energy_bounded = rep.energy_spread <= 2.0;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    xs.push_back(rep.rows[i].cell);
    ys.push_back(rep.rows[i].boundary_full);
    if (i > 0) rep.boundary_monotone = rep.boundary_monotone && ys[i] >= ys[i - 1];
  }
  const bool positive = std::all_of(ys.begin(), ys.end(), [](double v) { return v > 0.0; });
  rep.boundary_slope = rep.rows.size() >= 2 && positive ? tail_slope(xs, ys) : 0.0;
  return rep;
}

nlohmann::json NoExtensionReport::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows)
    rs.push_back({{"cell", r.cell},
                  {"energy", r.energy},
                  {"boundary_full", r.boundary_full},
                  {"boundary_screened", r.boundary_screened}});
  return {{"p", p},
          {"datum", to_string(datum)},
          {"rows", rs},
          {"energy_spread", energy_spread},
          {"energy_bounded", energy_bounded},
          {"boundary_slope", boundary_slope},
          {"boundary_monotone", boundary_monotone}};
}

std::string NoExtensionReport::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(10) << "cell,energy,boundary_full,boundary_screened\n";
  for (const auto& r : rows) os << r.cell << "," << r.energy << "," << r.boundary_full << "," << r.boundary_screened << "\n";
  return os.str();
}

}  // namespace sobotrace
