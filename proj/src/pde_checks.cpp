#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "sobotrace/calibration.hpp"
#include "sobotrace/common.hpp"
#include "sobotrace/config.hpp"
#include "sobotrace/pde.hpp"
#include "sobotrace/seminorms.hpp"

namespace sobotrace {

using nlohmann::json;
using std::numbers::pi;

std::vector<SampledField> test_dictionary(const Grid& g, bool vanish_on_walls, int max_mode) {
  const StripDomain strip = strip_of(g);
  require(max_mode >= 0, "test_dictionary: max_mode must be >= 0");
  const int hd = strip.horizontal_dim();
  const double H = strip.height();
  std::vector<SampledField> out;

  // vertical profiles in t = (x_N - b-)/H
  std::vector<std::function<double(double)>> profiles;
  if (vanish_on_walls) {
    for (int j = 1; j <= 3; ++j) profiles.push_back([j](double t) { return std::sin(pi * j * t); });
  } else {
    profiles.push_back([](double t) { return t - 0.5; });
    for (int j = 1; j <= 3; ++j) profiles.push_back([j](double t) { return std::cos(pi * j * t); });
  }

  // horizontal modes over a half space of wave vectors
  std::vector<std::vector<int>> modes;
  std::vector<int> k(hd, -max_mode);
  while (true) {
    int first = 0;
    for (int v : k)
      if (v != 0) {
        first = v;
        break;
      }
    if (first >= 0) modes.push_back(k);
    int a = hd - 1;
    while (a >= 0 && k[a] == max_mode) k[a--] = -max_mode;
    if (a < 0) break;
    ++k[a];
  }
  for (const auto& m : modes) {
    const bool zero = std::all_of(m.begin(), m.end(), [](int v) { return v == 0; });
    double freq = 0.0;  // |k| in physical units
    for (int a = 0; a < hd; ++a) freq += std::pow(m[a] / strip.horizontal.extent(a), 2);
    freq = std::sqrt(freq);
    for (int kind = 0; kind < (zero ? 1 : 2); ++kind)
      for (std::size_t j = 0; j < profiles.size() + (zero || vanish_on_walls ? 0 : 2); ++j)
        out.push_back(sample(
            [&](std::span<const double> x) {
              double arg = 0.0;
              for (int a = 0; a < hd; ++a)
                arg += 2 * pi * m[a] * (x[a] - strip.horizontal.lo[a]) / strip.horizontal.extent(a);
              const double h = kind == 0 ? std::cos(arg) : std::sin(arg);
              const double t = (x[hd] - strip.b_minus) / H;
              if (j < profiles.size()) return h * profiles[j](t);
              // boundary layer of the mode at the lower or upper wall
              const double decay = 2 * pi * freq * H;
              return h * std::exp(-decay * (j == profiles.size() ? t : 1.0 - t));
            },
            g));
  }

  // localized bumps (1 - rho^2)^3 of radius H/4
  const double r = 0.25 * H;
  const std::vector<double> heights =
      vanish_on_walls ? std::vector<double>{0.25, 0.5, 0.75} : std::vector<double>{0.0, 0.5, 1.0};
  std::vector<int> counts(hd);
  std::size_t total = 1;
  for (int a = 0; a < hd; ++a) {
    counts[a] = std::max(1, static_cast<int>(std::floor(strip.horizontal.extent(a) / r)));
    total *= counts[a];
  }
  for (std::size_t c = 0; c < total; ++c) {
    std::vector<double> centre(hd);
    std::size_t rest = c;
    for (int a = hd - 1; a >= 0; --a) {
      const int i = static_cast<int>(rest % counts[a]);
      rest /= counts[a];
      centre[a] = strip.horizontal.lo[a] + (i + 0.5) * strip.horizontal.extent(a) / counts[a];
    }
    for (double t0 : heights)
      out.push_back(sample(
          [&](std::span<const double> x) {
            double rho2 = 0.0;
            for (int a = 0; a < hd; ++a) {
              const double L = strip.horizontal.extent(a);
              double dx = std::fmod(std::abs(x[a] - centre[a]), L);
              dx = std::min(dx, L - dx);
              rho2 += dx * dx;
            }
            const double dz = x[hd] - (strip.b_minus + t0 * H);
            rho2 = (rho2 + dz * dz) / (r * r);
            return rho2 < 1.0 ? std::pow(1.0 - rho2, 3) : 0.0;
          },
          g));
  }
  return out;
}

namespace {

/// DF(u) as nodal weak-form residual; boundary entries zeroed for Dirichlet problems.
std::vector<double> weak_form(const SampledField& u, const AdmissibleLagrangian& L, const NeumannData* data) {
  const Grid& g = u.grid();
  const SimplexMesh mesh(g);
  const int d = mesh.dim();
  const auto& h = g.spacing();
  std::vector<double> r(g.node_count(), 0.0);
  double xi[kMaxDim], q[kMaxDim];
  for (std::size_t t = 0; t < mesh.simplex_count(); ++t) {
    mesh.gradient(u.values(), t, {xi, static_cast<std::size_t>(d)});
    L.grad_xi(mesh.centroid(t), {xi, static_cast<std::size_t>(d)}, {q, static_cast<std::size_t>(d)});
    const auto vs = mesh.vertices(t);
    const auto ax = mesh.axes(t);
    for (int j = 0; j < d; ++j) {
      const double c = mesh.simplex_volume() * q[ax[j]] / h[ax[j]];
      r[vs[j + 1]] += c;
      r[vs[j]] -= c;
    }
  }
  const int last = d - 1, top = g.nodes(last) - 1;
  if (data) {
    const Grid& hg = data->h_minus.grid();
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= g.weight(i) * data->psi[i];
    for (std::size_t j = 0; j < hg.node_count(); ++j) {
      r[j * (top + 1)] -= hg.weight(j) * data->h_minus[j];
      r[j * (top + 1) + top] -= hg.weight(j) * data->h_plus[j];
    }
  } else {
    for (std::size_t i = 0; i < r.size(); ++i) {
      const int k = g.axis_index(i, last);
      if (k == 0 || k == top) r[i] = 0.0;
    }
  }
  return r;
}

double integral_abs(const SampledField& f, double power = 1.0) {
  return integral(f.map([power](double v) { return std::pow(std::abs(v), power); }));
}

double g_at_zero_integral(const AdmissibleLagrangian& L, const Grid& g) {
  const std::vector<double> zero(g.dim(), 0.0);
  return integral_abs(sample([&](std::span<const double> x) { return L.G(x, zero); }, g));
}

}  // namespace

double weak_residual(const SampledField& u, const AdmissibleLagrangian& L, const NeumannData* data,
                     const std::vector<SampledField>& dictionary) {
  const std::vector<double> r = weak_form(u, L, data);
  double worst = 0.0;
  for (const auto& v : dictionary) {
    require(v.grid() == u.grid(), "weak_residual: dictionary grid mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r[i] * v[i];
    const double n = lp_norm(v, 2.0);
    if (n > 0.0) worst = std::max(worst, std::abs(s) / n);
  }
  return worst;
}

double dual_norm_lower_bound(const NeumannData& data, double p, const std::vector<SampledField>& dictionary) {
  double best = 0.0;
  for (const auto& v : dictionary) {
    const double n = std::pow(gradient_norm_pow(v, p), 1.0 / p);
    if (n > 1e-300) best = std::max(best, std::abs(data.apply(v)) / n);
  }
  return best;
}

InequalityReport dirichlet_energy_bound(const SampledField& u, const AdmissibleLagrangian& L) {
  const Grid& g = u.grid();
  const double p = L.p, pp = p / (p - 1);
  const TracePair pair = trace_pair(u);
  const LiftEnergy le = strip_lift_energy(pair, u, 0.5, p);
  const double c_lift = lookup_constant(lift_energy_constants, g.dim(), p);
  const double g0 = g_at_zero_integral(L, g);
  const double pm = integral_abs(L.psi_minus_field(g));
  const double pl = integral_abs(L.psi_plus_field(g), pp);
  const double seminorms = le.seminorms + le.seminorm_error;
  const double rhs = g0 + pm + pl + le.jump + seminorms;
  const double c = std::max(1.0, (1 + L.a_plus) * c_lift / p) / L.a_minus;
  return make_report("dirichlet_energy_bound", gradient_norm_pow(u, p), rhs, c, 1e-12,
                     {{"G0", g0},
                      {"psi_minus", pm},
                      {"psi_plus_pp", pl},
                      {"jump", le.jump},
                      {"seminorms", seminorms},
                      {"lift_constant", c_lift}});
}

InequalityReport neumann_energy_bound(const SampledField& u, const AdmissibleLagrangian& L, const NeumannData& data) {
  const Grid& g = u.grid();
  const double p = L.p, pp = p / (p - 1);
  const double gamma = lookup_constant(neumann_surrogate_constants, g.dim(), p);
  const double D = dual_norm_lower_bound(data, p, test_dictionary(g, false, g.dim() == 2 ? 8 : 3));
  const double g0 = g_at_zero_integral(L, g);
  const double pm = integral_abs(L.psi_minus_field(g));
  const double rhs = g0 + pm + std::pow(D, pp);
  const double am = L.a_minus;
  const double kappa = (2 / am) * std::max(1.0, std::pow(0.5 * p * am, -1.0 / (p - 1)) / pp);
  return make_report("neumann_energy_bound", gradient_norm_pow(u, p), rhs, kappa * gamma, 1e-12,
                     {{"G0", g0},
                      {"psi_minus", pm},
                      {"dual_norm", D},
                      {"dual_norm_kind", "dictionary lower bound"},
                      {"proof_constant", kappa},
                      {"surrogate_factor", gamma}});
}

double measure_neumann_surrogate(int dim, double p) {
  require(dim == 2 || dim == 3, "measure_neumann_surrogate: N must be 2 or 3");
  const int d = dim - 1;
  const StripDomain strip =
      make_strip(make_box(std::vector<double>(d, 0.0), std::vector<double>(d, 1.0), std::vector<bool>(d, true)), 0.0, 1.0);
  const Grid g = dim == 2 ? make_strip_grid(strip, {64}, 32) : make_strip_grid(strip, {16, 16}, 16);
  const Grid hg = horizontal_grid(g);
  const AdmissibleLagrangian L = model_lagrangian(p);
  const auto dictionary = test_dictionary(g, false, dim == 2 ? 8 : 3);
  const std::vector<int> ks = dim == 2 ? std::vector<int>{1, 2, 4, 8} : std::vector<int>{1, 2, 3};
  SolverOptions opts;
  opts.check_admissibility = false;
  opts.cross_check = false;

  double worst = 0.0;
  auto measure = [&](const NeumannData& data) {
    const Solution s = solve_neumann(L, data, opts);
    const double discrete = std::pow(gradient_norm_pow(s.u, p), (p - 1) / p);
    const double dict = dual_norm_lower_bound(data, p, dictionary);
    worst = std::max(worst, std::pow(discrete / dict, p / (p - 1)));
  };
  auto mode = [&](const Grid& grid, int k, bool sine, double vertical) {
    return sample(
        [=](std::span<const double> x) {
          const double arg = 2 * pi * k * x[0];
          return (sine ? std::sin(arg) : std::cos(arg)) * (vertical > 0 ? std::cos(pi * vertical * x[d]) : 1.0);
        },
        grid);
  };
  const SampledField zero = SampledField::constant(g, 0.0), hzero = SampledField::constant(hg, 0.0);
  measure({zero, SampledField::constant(hg, -1.0), SampledField::constant(hg, 1.0)});
  for (int k : ks) {
    measure({zero, hzero, mode(hg, k, false, 0)});
    measure({zero, mode(hg, k, true, 0), mode(hg, k, false, 0)});
    measure({mode(g, k, false, 1), hzero, hzero});
  }
  return worst;
}

// ---------------------------------------------------------------------------
// JSON problems

namespace {

const std::string kContext = "problem";

template <class T>
T get(const json& j, const char* key) {
  return config::get<T>(j, key, kContext);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return config::get_or<T>(j, key, fallback, kContext);
}

void only_keys(const json& j, std::initializer_list<const char*> keys, const char* what) {
  config::only_keys(j, keys, what, kContext);
}

config::TrigSpec parse_trig(const json& j, const Box& box, const char* what) {
  return config::parse_trig(j, box, what, kContext);
}

SampledField field_ref(const json& j, const Grid& g, const std::string& base_dir, const char* what) {
  return config::field_from_json(j, g, base_dir, what, kContext);
}

AdmissibleLagrangian parse_lagrangian(const json& j, const Grid& g) {
  only_keys(j, {"preset", "p", "weight", "drift"}, "lagrangian");
  const std::string preset = get<std::string>(j, "preset");
  const double p = get<double>(j, "p");
  if (!(p > 1.0)) throw InvalidArgument("problem: p must exceed 1");
  if (preset == "concave") return concave_lagrangian(p);
  if (preset != "p_laplacian") throw InvalidArgument("problem: unknown lagrangian preset '" + preset + "'");
  ModelCoefficients c;
  if (j.contains("weight")) {
    const config::TrigSpec w = parse_trig(j.at("weight"), g.box(), "weight");
    c.weight_min = w.constant - w.spread();
    c.weight_max = w.constant + w.spread();
    if (!(c.weight_min > 0.0)) throw InvalidArgument("problem: weight must stay positive (constant > sum of |amplitude|)");
    c.weight = [w](std::span<const double> x) { return w(x); };
  }
  if (j.contains("drift")) {
    const json& dj = j.at("drift");
    if (!dj.is_array() || static_cast<int>(dj.size()) != g.dim())
      throw InvalidArgument("problem: drift must be an array of " + std::to_string(g.dim()) + " components");
    std::vector<config::TrigSpec> comps;
    for (const auto& cj : dj) comps.push_back(parse_trig(cj, g.box(), "drift"));
    c.drift = [comps](std::span<const double> x, std::span<double> out) {
      for (std::size_t a = 0; a < comps.size(); ++a) out[a] = comps[a](x);
    };
  }
  return model_lagrangian(p, c);
}

}  // namespace

PdeProblem problem_from_json(const json& j, const std::string& base_dir) {
  only_keys(j, {"kind", "domain", "lagrangian", "f_minus", "f_plus", "psi", "h_minus", "h_plus", "solver"}, "problem");
  PdeProblem pr;
  const std::string kind = get<std::string>(j, "kind");
  if (kind == "dirichlet")
    pr.kind = PdeProblem::Kind::Dirichlet;
  else if (kind == "neumann")
    pr.kind = PdeProblem::Kind::Neumann;
  else
    throw InvalidArgument("problem: kind must be dirichlet or neumann");

  const json& dom = j.at("domain");
  only_keys(dom, {"horizontal_lo", "horizontal_hi", "b_minus", "b_plus", "horizontal_shape", "vertical_cells"}, "domain");
  const auto lo = get<std::vector<double>>(dom, "horizontal_lo");
  const auto hi = get<std::vector<double>>(dom, "horizontal_hi");
  const auto shape = get<std::vector<int>>(dom, "horizontal_shape");
  if (lo.empty() || lo.size() > 2 || hi.size() != lo.size() || shape.size() != lo.size())
    throw InvalidArgument("problem: horizontal_lo, horizontal_hi and horizontal_shape need 1 or 2 matching entries");
  const StripDomain strip = make_strip(make_box(lo, hi, std::vector<bool>(lo.size(), true)),
                                       get_or<double>(dom, "b_minus", 0.0), get_or<double>(dom, "b_plus", 1.0));
  pr.grid = make_strip_grid(strip, shape, get<int>(dom, "vertical_cells"));
  const Grid hg = horizontal_grid(pr.grid);
  pr.lagrangian = parse_lagrangian(j.at("lagrangian"), pr.grid);

  if (pr.kind == PdeProblem::Kind::Dirichlet) {
    for (const char* k : {"psi", "h_minus", "h_plus"})
      if (j.contains(k)) throw InvalidArgument(std::string("problem: '") + k + "' is Neumann data");
    pr.pair = {field_ref(j.at("f_minus"), hg, base_dir, "f_minus"), field_ref(j.at("f_plus"), hg, base_dir, "f_plus")};
  } else {
    for (const char* k : {"f_minus", "f_plus"})
      if (j.contains(k)) throw InvalidArgument(std::string("problem: '") + k + "' is Dirichlet data");
    pr.data.psi = j.contains("psi") ? field_ref(j.at("psi"), pr.grid, base_dir, "psi") : SampledField::constant(pr.grid, 0.0);
    pr.data.h_minus = j.contains("h_minus") ? field_ref(j.at("h_minus"), hg, base_dir, "h_minus")
                                            : SampledField::constant(hg, 0.0);
    pr.data.h_plus =
        j.contains("h_plus") ? field_ref(j.at("h_plus"), hg, base_dir, "h_plus") : SampledField::constant(hg, 0.0);
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    only_keys(s, {"tolerance", "energy_tolerance", "energy_window", "max_iterations", "preconditioned", "cross_check",
                  "admissibility_trials"},
              "solver");
    auto& o = pr.solver;
    o.tolerance = get_or(s, "tolerance", o.tolerance);
    o.energy_tolerance = get_or(s, "energy_tolerance", o.energy_tolerance);
    o.energy_window = get_or(s, "energy_window", o.energy_window);
    o.max_iterations = get_or(s, "max_iterations", o.max_iterations);
    o.preconditioned = get_or(s, "preconditioned", o.preconditioned);
    o.cross_check = get_or(s, "cross_check", o.cross_check);
    o.admissibility_trials = get_or(s, "admissibility_trials", o.admissibility_trials);
    if (!(o.tolerance > 0.0) || o.max_iterations < 1 || o.energy_window < 1 || o.admissibility_trials < 1)
      throw InvalidArgument("problem: solver options out of range");
  }
  return pr;
}

json PdeReport::to_json() const {
  json cs = json::array();
  for (const auto& c : checks) cs.push_back(sobotrace::to_json(c));
  json j = {{"admissibility", admissibility.to_json()}, {"checks", cs}};
  if (solution.u.size() > 0) j["diagnostics"] = solution.diagnostics.to_json();
  return j;
}

PdeReport run_problem(const PdeProblem& problem) {
  PdeReport rep;
  const AdmissibleLagrangian& L = problem.lagrangian;
  rep.admissibility = admissibility_check(L, problem.grid, problem.solver.admissibility_trials);
  rep.checks.push_back(make_report("admissible", rep.admissibility.pass() ? 0.0 : 1.0, 0.0, 1.0, 0.0));
  if (!rep.admissibility.pass()) return rep;

  SolverOptions opts = problem.solver;
  opts.check_admissibility = false;
  const bool dirichlet = problem.kind == PdeProblem::Kind::Dirichlet;
  rep.solution = dirichlet ? solve_dirichlet(L, problem.pair, problem.grid, opts) : solve_neumann(L, problem.data, opts);
  const auto& u = rep.solution.u;
  const auto& dg = rep.solution.diagnostics;

  const NeumannData* data = dirichlet ? nullptr : &problem.data;
  const double wr = weak_residual(u, L, data, test_dictionary(problem.grid, dirichlet, problem.grid.dim() == 2 ? 8 : 3));
  rep.checks.push_back(make_report("weak_residual", wr, problem.solver.tolerance, 1.0, 0.0));
  if (dirichlet) {
    const double start = energy(lift_m1(problem.pair, problem.grid), L);
    rep.checks.push_back(make_report("minimality", dg.energy, start, 1.0, 1e-12 * std::abs(start)));
  }
  if (dg.direct_difference) rep.checks.push_back(make_report("direct_agreement", *dg.direct_difference, 1e-8, 1.0, 0.0));
  try {
    rep.checks.push_back(dirichlet ? dirichlet_energy_bound(u, L) : neumann_energy_bound(u, L, problem.data));
  } catch (const InvalidArgument&) {
    // no frozen constant for this (N, p); the bound is not assessed
  }
  return rep;
}

}  // namespace sobotrace
