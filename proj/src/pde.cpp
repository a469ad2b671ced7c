#include "sobotrace/pde.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sobotrace/common.hpp"

namespace sobotrace {

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double eval_or_zero(const PointFunction& f, std::span<const double> x) { return f ? f(x) : 0.0; }

SampledField sample_or_zero(const PointFunction& f, const Grid& g) {
  return f ? sample(f, g) : SampledField::constant(g, 0.0);
}

std::string format_point(const std::vector<double>& v) {
  std::ostringstream out;
  out.precision(6);
  out << "(";
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << v[i];
  out << ")";
  return out.str();
}

}  // namespace

SampledField AdmissibleLagrangian::psi_minus_field(const Grid& g) const { return sample_or_zero(psi_minus, g); }
SampledField AdmissibleLagrangian::psi_plus_field(const Grid& g) const { return sample_or_zero(psi_plus, g); }

AdmissibleLagrangian model_lagrangian(double p, const ModelCoefficients& c) {
  require(p > 1.0, "model_lagrangian: p must exceed 1");
  require(c.weight_min > 0.0 && c.weight_max >= c.weight_min, "model_lagrangian: need 0 < weight_min <= weight_max");
  AdmissibleLagrangian L;
  L.name = "p_laplacian";
  L.p = p;
  const PointFunction weight = c.weight;
  const VectorFunction drift = c.drift;
  L.G = [p, weight, drift](std::span<const double> x, std::span<const double> xi) {
    double v = eval_or_zero(weight, x);
    if (!weight) v = 1.0;
    v *= std::pow(norm(xi), p) / p;
    if (drift) {
      double g[kMaxDim];
      drift(x, {g, xi.size()});
      for (std::size_t i = 0; i < xi.size(); ++i) v += g[i] * xi[i];
    }
    return v;
  };
  L.grad_xi = [p, weight, drift](std::span<const double> x, std::span<const double> xi, std::span<double> out) {
    const double w = weight ? weight(x) : 1.0;
    double n2 = 0.0;
    for (double v : xi) n2 += v * v;
    double factor;
    if (p == 2.0)
      factor = w;
    else if (p < 2.0)
      factor = w * std::pow(n2 + kGradientRegularization * kGradientRegularization, 0.5 * (p - 2));
    else
      factor = w * std::pow(n2, 0.5 * (p - 2));
    for (std::size_t i = 0; i < xi.size(); ++i) out[i] = factor * xi[i];
    if (drift) {
      double g[kMaxDim];
      drift(x, {g, xi.size()});
      for (std::size_t i = 0; i < xi.size(); ++i) out[i] += g[i];
    }
  };
  L.a_plus = c.weight_max;
  if (drift) {
    PointFunction gnorm = c.drift_norm;
    if (!gnorm)
      gnorm = [drift](std::span<const double> x) {
        double g[kMaxDim] = {};
        drift(x, {g, x.size()});
        return norm({g, x.size()});
      };
    const double pp = p / (p - 1);
    const double young = std::pow(0.5 * c.weight_min, -1.0 / (p - 1)) / pp;
    L.a_minus = c.weight_min / (2 * p);
    L.psi_minus = [gnorm, young, pp](std::span<const double> x) { return young * std::pow(gnorm(x), pp); };
    L.psi_plus = gnorm;
  } else {
    L.a_minus = c.weight_min / p;
  }
  if (p == 2.0) L.quadratic = QuadraticForm{weight, drift};
  return L;
}

AdmissibleLagrangian concave_lagrangian(double p) {
  require(p > 1.0, "concave_lagrangian: p must exceed 1");
  AdmissibleLagrangian L;
  L.name = "concave";
  L.p = p;
  L.a_minus = 1.0;
  L.a_plus = 1.0;
  L.G = [p](std::span<const double>, std::span<const double> xi) { return -std::pow(norm(xi), p) / p; };
  L.grad_xi = [p](std::span<const double>, std::span<const double> xi, std::span<double> out) {
    const double n = norm(xi);
    const double f = n > 0.0 ? -std::pow(n, p - 2) : 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) out[i] = f * xi[i];
  };
  return L;
}

nlohmann::json AdmissibilityReport::to_json() const {
  nlohmann::json vs = nlohmann::json::array();
  for (const auto& v : violations)
    vs.push_back({{"condition", v.condition}, {"x", v.x}, {"xi", v.xi}, {"eta", v.eta}, {"lhs", v.lhs}, {"rhs", v.rhs}});
  return {{"trials", trials},       {"pass", pass()},           {"coercivity", coercivity},
          {"growth", growth},       {"convexity", convexity},   {"gradient", gradient},
          {"upper_bound", upper_bound}, {"violations", vs}};
}

AdmissibilityReport admissibility_check(const AdmissibleLagrangian& L, const Grid& grid, int trials,
                                        std::uint64_t seed) {
  require(trials >= 1, "admissibility_check: trials must be >= 1");
  require(L.G && L.grad_xi, "admissibility_check: G and its gradient are required");
  require(L.p > 1.0 && L.a_minus > 0.0 && L.a_plus > 0.0, "admissibility_check: need p > 1 and A-, A+ > 0");
  const int d = grid.dim();
  const double p = L.p, pp = p / (p - 1);
  Rng rng(seed);
  AdmissibilityReport rep;
  rep.trials = trials;
  auto record = [&](bool& flag, const char* name, const std::vector<double>& x, const std::vector<double>& xi,
                    const std::vector<double>& eta, double lhs, double rhs) {
    if (flag) rep.violations.push_back({name, x, xi, eta, lhs, rhs});
    flag = false;
  };
  auto random_vector = [&]() {
    std::vector<double> v(d);
    for (double& c : v) c = rng.normal();
    const double n = norm(v);
    const double mag = std::pow(10.0, rng.uniform(-3.0, 3.0));
    for (double& c : v) c *= mag / (n > 0 ? n : 1.0);
    return v;
  };
  std::vector<double> x(d), grad(d), mid(d), probe(d), zero(d, 0.0);
  for (int t = 0; t < trials; ++t) {
    for (int a = 0; a < d; ++a) x[a] = rng.uniform(grid.box().lo[a], grid.box().hi[a]);
    const std::vector<double> xi = random_vector(), eta = random_vector();
    const double r = norm(xi);
    const double g = L.G(x, xi);
    const double pm = eval_or_zero(L.psi_minus, x), pl = eval_or_zero(L.psi_plus, x);

    // coercivity
    const double coer = L.a_minus * std::pow(r, p) - pm;
    if (coer > g + 1e-10 * (1.0 + std::abs(coer) + std::abs(g)))
      record(rep.coercivity, "coercivity", x, xi, {}, coer, g);

    // gradient growth
    L.grad_xi(x, xi, grad);
    const double gn = norm(grad), bound = pl + L.a_plus * std::pow(r, p - 1);
    if (gn > bound * (1 + 1e-10) + 1e-14) record(rep.growth, "growth", x, xi, {}, gn, bound);

    // midpoint convexity
    for (int a = 0; a < d; ++a) mid[a] = 0.5 * (xi[a] + eta[a]);
    const double gm = L.G(x, mid), ge = L.G(x, eta);
    if (gm > 0.5 * (g + ge) + 1e-10 * (1.0 + std::abs(g) + std::abs(ge)))
      record(rep.convexity, "convexity", x, xi, eta, gm, 0.5 * (g + ge));

    // gradient against central differences
    double err = 0.0;
    const double h = 1e-5 * r;
    for (int a = 0; a < d; ++a) {
      probe = xi;
      probe[a] = xi[a] + h;
      const double up = L.G(x, probe);
      probe[a] = xi[a] - h;
      const double down = L.G(x, probe);
      err = std::max(err, std::abs((up - down) / (2 * h) - grad[a]));
    }
    if (err > 1e-5 * (gn + bound)) record(rep.gradient, "gradient", x, xi, {}, err, 1e-5 * (gn + bound));

    // upper bound from the growth condition
    const double ub = std::abs(L.G(x, zero)) + std::pow(pl, pp) / pp + (1 + L.a_plus) / p * std::pow(r, p);
    if (std::abs(g) > ub * (1 + 1e-10) + 1e-14) record(rep.upper_bound, "upper_bound", x, xi, {}, std::abs(g), ub);
  }
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

/// Index of the strip node above horizontal node j at vertical level k.
std::size_t strip_node(const Grid& g, std::size_t j, int k) {
  return j * static_cast<std::size_t>(g.nodes(g.dim() - 1)) + static_cast<std::size_t>(k);
}

}  // namespace

double NeumannData::compatibility() const { return integral(psi) + integral(h_minus) + integral(h_plus); }

double NeumannData::apply(const SampledField& v) const {
  require(v.grid() == psi.grid(), "Neumann data: field grid does not match");
  const Grid& g = v.grid();
  const Grid& hg = h_minus.grid();
  const int top = g.nodes(g.dim() - 1) - 1;
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += g.weight(i) * psi[i] * v[i];
  for (std::size_t j = 0; j < hg.node_count(); ++j)
    s += hg.weight(j) * (h_minus[j] * v[strip_node(g, j, 0)] + h_plus[j] * v[strip_node(g, j, top)]);
  return s;
}

NeumannData zero_neumann_data(const Grid& g) {
  strip_of(g);
  const Grid hg = horizontal_grid(g);
  return {SampledField::constant(g, 0.0), SampledField::constant(hg, 0.0), SampledField::constant(hg, 0.0)};
}

namespace {

void validate_neumann(const NeumannData& data) {
  strip_of(data.psi.grid());
  const Grid hg = horizontal_grid(data.psi.grid());
  require(data.h_minus.grid() == hg && data.h_plus.grid() == hg,
          "Neumann data: boundary densities must live on the horizontal grid of psi");
}

}  // namespace

SimplexMesh::SimplexMesh(const Grid& g) : grid_(g), dim_(g.dim()) {
  strip_of(g);
  require(dim_ >= 2 && dim_ <= 3, "SimplexMesh: strip grids of dimension 2 or 3");
  std::vector<int> perm(dim_);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> perms;
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));
  volume_ = 1.0;
  for (int a = 0; a < dim_; ++a) volume_ *= g.spacing()[a];
  volume_ /= static_cast<double>(perms.size());

  std::vector<int> cells(dim_);
  std::size_t ncell = 1;
  for (int a = 0; a < dim_; ++a) {
    cells[a] = g.shape()[a];
    ncell *= cells[a];
  }
  vertices_.reserve(ncell * perms.size() * (dim_ + 1));
  std::vector<int> c(dim_), v(dim_);
  for (std::size_t cell = 0; cell < ncell; ++cell) {
    std::size_t rest = cell;
    for (int a = dim_ - 1; a >= 0; --a) {
      c[a] = static_cast<int>(rest % cells[a]);
      rest /= cells[a];
    }
    for (const auto& pm : perms) {
      v = c;
      vertices_.push_back(g.index(v));
      std::array<int, kMaxDim> ax{};
      for (int j = 0; j < dim_; ++j) {
        const int a = pm[j];
        ax[j] = a;
        v[a] += 1;
        if (g.periodic(a) && v[a] == g.nodes(a)) v[a] = 0;
        vertices_.push_back(g.index(v));
      }
      axes_.push_back(ax);
      for (int a = 0; a < dim_; ++a) {
        double off = 0.0;
        for (int j = 0; j < dim_; ++j)
          if (pm[j] == a) off = static_cast<double>(dim_ - j) / (dim_ + 1) * g.spacing()[a];
        centroids_.push_back(g.coordinate(a, c[a]) + off);
      }
    }
  }
}

void SimplexMesh::gradient(std::span<const double> v, std::size_t t, std::span<double> out) const {
  const auto vs = vertices(t);
  const auto ax = axes(t);
  for (int j = 0; j < dim_; ++j) out[ax[j]] = (v[vs[j + 1]] - v[vs[j]]) / grid_.spacing()[ax[j]];
}

namespace {

/// Energy of nodal values v and, optionally, its gradient with respect to every node.
double assemble(const SimplexMesh& mesh, const AdmissibleLagrangian& L, const NeumannData* data,
                std::span<const double> v, std::vector<double>* grad) {
  const int d = mesh.dim();
  const std::size_t n = mesh.simplex_count(), nodes = mesh.grid().node_count();
  const double vol = mesh.simplex_volume();
  const auto& h = mesh.grid().spacing();
  const int chunks = thread_count();
  std::vector<double> partial(chunks, 0.0);
  std::vector<std::vector<double>> local(grad ? chunks : 0);
  parallel_chunks(n, [&](int chunk, std::size_t b, std::size_t e) {
    double xi[kMaxDim], q[kMaxDim];
    std::vector<double>* gl = nullptr;
    if (grad) {
      local[chunk].assign(nodes, 0.0);
      gl = &local[chunk];
    }
    double acc = 0.0;
    for (std::size_t t = b; t < e; ++t) {
      mesh.gradient(v, t, {xi, static_cast<std::size_t>(d)});
      const auto x = mesh.centroid(t);
      acc += L.G(x, {xi, static_cast<std::size_t>(d)});
      if (gl) {
        L.grad_xi(x, {xi, static_cast<std::size_t>(d)}, {q, static_cast<std::size_t>(d)});
        const auto vs = mesh.vertices(t);
        const auto ax = mesh.axes(t);
        for (int j = 0; j < d; ++j) {
          const double c = vol * q[ax[j]] / h[ax[j]];
          (*gl)[vs[j + 1]] += c;
          (*gl)[vs[j]] -= c;
        }
      }
    }
    partial[chunk] = acc;
  });
  double total = 0.0;
  for (double s : partial) total += s;
  total *= vol;
  if (grad) {
    grad->assign(nodes, 0.0);
    for (const auto& l : local)
      if (!l.empty())
        for (std::size_t i = 0; i < nodes; ++i) (*grad)[i] += l[i];
  }
  if (data) {
    const Grid& g = mesh.grid();
    const SampledField field(g, std::vector<double>(v.begin(), v.end()));
    total -= data->apply(field);
    if (grad) {
      const Grid& hg = data->h_minus.grid();
      const int top = g.nodes(g.dim() - 1) - 1;
      for (std::size_t i = 0; i < nodes; ++i) (*grad)[i] -= g.weight(i) * data->psi[i];
      for (std::size_t j = 0; j < hg.node_count(); ++j) {
        (*grad)[strip_node(g, j, 0)] -= hg.weight(j) * data->h_minus[j];
        (*grad)[strip_node(g, j, top)] -= hg.weight(j) * data->h_plus[j];
      }
    }
  }
  return total;
}

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Free-node numbering: interior nodes (Dirichlet) or every node (Neumann).
struct FreeNodes {
  std::vector<long> index;        ///< node -> free index or -1
  std::vector<std::size_t> node;  ///< free index -> node
};

FreeNodes free_nodes(const Grid& g, bool dirichlet) {
  FreeNodes f;
  f.index.assign(g.node_count(), -1);
  const int last = g.dim() - 1, top = g.nodes(last) - 1;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const int k = g.axis_index(i, last);
    if (dirichlet && (k == 0 || k == top)) continue;
    f.index[i] = static_cast<long>(f.node.size());
    f.node.push_back(i);
  }
  return f;
}

/// Σ_T vol w(x_T) |∇v|² as a matrix over all nodes.
/// Weighted P1 stiffness; per-simplex weights take precedence over the point weight.
SparseMatrix stiffness(const SimplexMesh& mesh, const PointFunction& weight,
                       const std::vector<double>* simplex_weight = nullptr) {
  const int d = mesh.dim();
  const auto& h = mesh.grid().spacing();
  std::vector<Triplet> trip;
  trip.reserve(mesh.simplex_count() * d * 4);
  for (std::size_t t = 0; t < mesh.simplex_count(); ++t) {
    const double w = mesh.simplex_volume() * (simplex_weight ? (*simplex_weight)[t]
                                               : weight               ? weight(mesh.centroid(t))
                                                                      : 1.0);
    const auto vs = mesh.vertices(t);
    const auto ax = mesh.axes(t);
    for (int j = 0; j < d; ++j) {
      const double c = w / (h[ax[j]] * h[ax[j]]);
      const auto a = static_cast<long>(vs[j]), b = static_cast<long>(vs[j + 1]);
      trip.emplace_back(a, a, c);
      trip.emplace_back(b, b, c);
      trip.emplace_back(a, b, -c);
      trip.emplace_back(b, a, -c);
    }
  }
  const auto n = static_cast<long>(mesh.grid().node_count());
  SparseMatrix K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

SparseMatrix restrict_matrix(const SparseMatrix& K, const FreeNodes& f) {
  std::vector<Triplet> trip;
  for (int k = 0; k < K.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(K, k); it; ++it) {
      const long r = f.index[it.row()], c = f.index[it.col()];
      if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
    }
  const auto n = static_cast<long>(f.node.size());
  SparseMatrix R(n, n);
  R.setFromTriplets(trip.begin(), trip.end());
  return R;
}

double residual_norm(const std::vector<double>& grad, const FreeNodes& f, const Grid& g) {
  double s = 0.0;
  for (std::size_t i : f.node) s += grad[i] * grad[i] / g.weight(i);
  return std::sqrt(s);
}

void subtract_mean(std::vector<double>& v, const Grid& g) {
  double m = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) m += g.weight(i) * v[i];
  m /= g.volume();
  for (double& x : v) x -= m;
}

/// Descent on the free nodes from u (modified in place), Barzilai-Borwein steps in the metric
/// of P with an Armijo backstop.
/// Secant modulus |∇_ξG(x,ξ) - ∇_ξG(x,0)| / |ξ| per simplex, with |ξ| floored at mu.
std::vector<double> secant_weights(const SimplexMesh& mesh, const AdmissibleLagrangian& L, const std::vector<double>& u) {
  const int d = mesh.dim();
  const std::size_t n = mesh.simplex_count();
  std::vector<double> xi(n * d), w(n);
  double rms = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    mesh.gradient(u, t, {xi.data() + t * d, static_cast<std::size_t>(d)});
    rms += std::pow(norm({xi.data() + t * d, static_cast<std::size_t>(d)}), 2);
  }
  const double mu = std::max(1e-3 * std::sqrt(rms / n), 1e-8);
  parallel_chunks(n, [&](int, std::size_t begin, std::size_t end) {
    double e[kMaxDim], q[kMaxDim], q0[kMaxDim];
    const std::vector<double> zero(d, 0.0);
    for (std::size_t t = begin; t < end; ++t) {
      const std::span<const double> x = mesh.centroid(t);
      const double* v = xi.data() + t * d;
      const double r = norm({v, static_cast<std::size_t>(d)});
      const double m = std::max(r, mu);
      for (int a = 0; a < d; ++a) e[a] = r > 0.0 ? v[a] * m / r : (a == 0 ? m : 0.0);
      L.grad_xi(x, {e, static_cast<std::size_t>(d)}, {q, static_cast<std::size_t>(d)});
      L.grad_xi(x, zero, {q0, static_cast<std::size_t>(d)});
      for (int a = 0; a < d; ++a) q[a] -= q0[a];
      w[t] = std::max(norm({q, static_cast<std::size_t>(d)}) / m, 1e-300);
    }
  });
  return w;
}

SolveDiagnostics descend(const SimplexMesh& mesh, const AdmissibleLagrangian& L, const NeumannData* data,
                         std::vector<double>& u, const SolverOptions& opts) {
  const Grid& g = mesh.grid();
  const bool dirichlet = data == nullptr;
  const FreeNodes f = free_nodes(g, dirichlet);
  const auto nf = static_cast<long>(f.node.size());

  Eigen::SimplicialLDLT<SparseMatrix> solver;
  bool analyzed = false;
  auto set_metric = [&](const std::vector<double>* weights) {
    SparseMatrix P = restrict_matrix(stiffness(mesh, nullptr, weights), f);
    if (!dirichlet) P.coeffRef(0, 0) += P.coeff(0, 0);  // pins the constant mode
    if (!analyzed) solver.analyzePattern(P);
    analyzed = true;
    solver.factorize(P);
    if (solver.info() != Eigen::Success) throw NumericalError("descent: preconditioner factorization failed");
  };
  const bool secant = opts.preconditioned && opts.secant_metric;
  if (opts.preconditioned && !secant) set_metric(nullptr);
  auto direction = [&](const std::vector<double>& grad, Eigen::VectorXd& dir) {
    Eigen::VectorXd gf(nf);
    for (long i = 0; i < nf; ++i) gf[i] = grad[f.node[i]];
    if (opts.preconditioned)
      dir = solver.solve(gf);
    else {
      dir.resize(nf);
      for (long i = 0; i < nf; ++i) dir[i] = gf[i] / g.weight(f.node[i]);
    }
    return gf;
  };

  SolveDiagnostics diag;
  diag.method = "iterative";
  std::vector<double> grad, trial = u, grad_new;
  double E = assemble(mesh, L, data, u, &grad);
  if (secant) {
    const auto w = secant_weights(mesh, L, u);
    set_metric(&w);
  }
  diag.initial_energy = E;
  diag.energy_trace.push_back(E);
  Eigen::VectorXd dir;
  Eigen::VectorXd gf = direction(grad, dir);
  double alpha = 1.0;
  diag.residual = residual_norm(grad, f, g);
  std::vector<double> residuals{diag.residual};
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (diag.residual < opts.tolerance) {
      diag.converged = true;
      diag.stop_reason = "residual";
      break;
    }
    const int window = opts.energy_window;
    if (it >= window) {
      const double old = diag.energy_trace[diag.energy_trace.size() - 1 - window];
      // stagnation counts only while the residual is no longer improving either; the energy
      // resolves residuals down to about sqrt(1e-16 |E|) and no further
      const bool flat = std::abs(old - E) <= opts.energy_tolerance * std::max(std::abs(E), 1e-300);
      if (flat && diag.residual > 0.5 * residuals[residuals.size() - 1 - window]) {
        diag.converged = true;
        diag.stop_reason = "energy";
        break;
      }
    }
    const double slope = gf.dot(dir);
    if (!(slope > 0.0)) {
      diag.stop_reason = "no descent direction";
      break;
    }
    double step = alpha, Et = E;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      trial = u;
      for (long i = 0; i < nf; ++i) trial[f.node[i]] -= step * dir[i];
      Et = assemble(mesh, L, data, trial, nullptr);
      if (std::isfinite(Et) && Et <= E - 1e-4 * step * slope + 1e-12 * std::abs(E)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      diag.stop_reason = "line search stalled";
      break;
    }
    if (Et > E + 1e-12 * std::abs(E)) diag.energy_monotone = false;
    assemble(mesh, L, data, trial, &grad_new);
    if (secant) {
      const auto w = secant_weights(mesh, L, trial);
      set_metric(&w);
    }
    Eigen::VectorXd dir_new;
    const Eigen::VectorXd gf_new = direction(grad_new, dir_new);
    // s = -step dir, P s = -step gf
    const double sPs = step * step * dir.dot(gf);
    const double sy = -step * dir.dot(gf_new - gf);
    alpha = sy > 0.0 ? sPs / sy : 2.0 * step;
    u.swap(trial);
    grad.swap(grad_new);
    gf = gf_new;
    dir = dir_new;
    E = Et;
    diag.energy_trace.push_back(E);
    diag.residual = residual_norm(grad, f, g);
    residuals.push_back(diag.residual);
  }
  if (it == opts.max_iterations) diag.stop_reason = "max iterations";
  diag.iterations = it;
  diag.energy = E;
  return diag;
}

void check_admissible(const AdmissibleLagrangian& L, const Grid& g, const SolverOptions& opts) {
  if (!opts.check_admissibility) return;
  const AdmissibilityReport rep = admissibility_check(L, g, opts.admissibility_trials);
  if (rep.pass()) return;
  const auto& v = rep.violations.front();
  throw InvalidArgument("Lagrangian '" + L.name + "' is not admissible: " + v.condition + " fails at x = " +
                        format_point(v.x) + ", xi = " + format_point(v.xi));
}

}  // namespace

double energy(const SampledField& v, const AdmissibleLagrangian& L, const NeumannData* data) {
  const SimplexMesh mesh(v.grid());
  if (data) {
    validate_neumann(*data);
    require(data->psi.grid() == v.grid(), "energy: Neumann data grid does not match the field");
  }
  return assemble(mesh, L, data, v.values(), nullptr);
}

double gradient_norm_pow(const SampledField& v, double p) {
  const SimplexMesh mesh(v.grid());
  const int d = mesh.dim();
  return mesh.simplex_volume() * parallel_sum(mesh.simplex_count(), [&](std::size_t t) {
           double xi[kMaxDim];
           mesh.gradient(v.values(), t, {xi, static_cast<std::size_t>(d)});
           return std::pow(norm({xi, static_cast<std::size_t>(d)}), p);
         });
}

nlohmann::json SolveDiagnostics::to_json() const {
  nlohmann::json j = {{"method", method},
                      {"energy", energy},
                      {"initial_energy", initial_energy},
                      {"residual", residual},
                      {"iterations", iterations},
                      {"converged", converged},
                      {"stop_reason", stop_reason},
                      {"energy_monotone", energy_monotone}};
  if (direct_difference) j["direct_difference"] = *direct_difference;
  if (iterative_residual) j["iterative_residual"] = *iterative_residual;
  return j;
}

SampledField solve_quadratic(const AdmissibleLagrangian& L, const Grid& grid, const TracePair* pair,
                             const NeumannData* data) {
  require(L.quadratic.has_value() && L.p == 2.0, "solve_quadratic: requires p = 2 and a quadratic Lagrangian");
  require((pair == nullptr) != (data == nullptr), "solve_quadratic: give either Dirichlet or Neumann data");
  const SimplexMesh mesh(grid);
  const int d = mesh.dim();
  const auto& h = grid.spacing();
  const bool dirichlet = pair != nullptr;
  const FreeNodes f = free_nodes(grid, dirichlet);
  const SparseMatrix K = stiffness(mesh, L.quadratic->weight);

  // load: -Σ vol drift·∇φ_i (+ Ψ + Λ)
  std::vector<double> load(grid.node_count(), 0.0);
  if (L.quadratic->drift) {
    double g[kMaxDim];
    for (std::size_t t = 0; t < mesh.simplex_count(); ++t) {
      L.quadratic->drift(mesh.centroid(t), {g, static_cast<std::size_t>(d)});
      const auto vs = mesh.vertices(t);
      const auto ax = mesh.axes(t);
      for (int j = 0; j < d; ++j) {
        const double c = mesh.simplex_volume() * g[ax[j]] / h[ax[j]];
        load[vs[j + 1]] -= c;
        load[vs[j]] += c;
      }
    }
  }
  std::vector<double> u(grid.node_count(), 0.0);
  if (dirichlet) {
    const Grid hg = horizontal_grid(grid);
    require(pair->f_minus.grid() == hg && pair->f_plus.grid() == hg, "solve_quadratic: data grid mismatch");
    const int top = grid.nodes(d - 1) - 1;
    for (std::size_t j = 0; j < hg.node_count(); ++j) {
      u[strip_node(grid, j, 0)] = pair->f_minus[j];
      u[strip_node(grid, j, top)] = pair->f_plus[j];
    }
  } else {
    validate_neumann(*data);
    const Grid& hg = data->h_minus.grid();
    const int top = grid.nodes(d - 1) - 1;
    for (std::size_t i = 0; i < grid.node_count(); ++i) load[i] += grid.weight(i) * data->psi[i];
    for (std::size_t j = 0; j < hg.node_count(); ++j) {
      load[strip_node(grid, j, 0)] += hg.weight(j) * data->h_minus[j];
      load[strip_node(grid, j, top)] += hg.weight(j) * data->h_plus[j];
    }
  }
  // Neumann: node 0 is pinned to zero, then the mean is removed.
  FreeNodes solve_nodes = f;
  if (!dirichlet) {
    solve_nodes.index.assign(grid.node_count(), -1);
    solve_nodes.node.clear();
    for (std::size_t i = 1; i < grid.node_count(); ++i) {
      solve_nodes.index[i] = static_cast<long>(solve_nodes.node.size());
      solve_nodes.node.push_back(i);
    }
  }
  const auto nf = static_cast<long>(solve_nodes.node.size());
  Eigen::VectorXd rhs(nf);
  for (long i = 0; i < nf; ++i) rhs[i] = load[solve_nodes.node[i]];
  if (dirichlet) {
    for (int k = 0; k < K.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(K, k); it; ++it) {
        const long r = solve_nodes.index[it.row()];
        if (r >= 0 && solve_nodes.index[it.col()] < 0) rhs[r] -= it.value() * u[it.col()];
      }
  }
  Eigen::SimplicialLDLT<SparseMatrix> solver(restrict_matrix(K, solve_nodes));
  if (solver.info() != Eigen::Success) throw NumericalError("solve_quadratic: factorization failed");
  const Eigen::VectorXd x = solver.solve(rhs);
  if (solver.info() != Eigen::Success) throw NumericalError("solve_quadratic: solve failed");
  for (long i = 0; i < nf; ++i) u[solve_nodes.node[i]] = x[i];
  if (!dirichlet) subtract_mean(u, grid);
  return SampledField(grid, std::move(u));
}

Solution solve_dirichlet(const AdmissibleLagrangian& L, const TracePair& pair, const Grid& grid,
                         const SolverOptions& opts) {
  strip_of(grid);
  const Grid hg = horizontal_grid(grid);
  require(pair.f_minus.grid() == hg && pair.f_plus.grid() == hg,
          "solve_dirichlet: boundary data must live on the horizontal grid of the strip grid");
  check_admissible(L, grid, opts);
  const SimplexMesh mesh(grid);
  const SampledField start = lift_m1(pair, grid);
  // the lift matches the data on the wall planes; copy them exactly
  std::vector<double> u = start.values();
  const int top = grid.nodes(grid.dim() - 1) - 1;
  for (std::size_t j = 0; j < hg.node_count(); ++j) {
    u[strip_node(grid, j, 0)] = pair.f_minus[j];
    u[strip_node(grid, j, top)] = pair.f_plus[j];
  }

  if (L.quadratic && L.p == 2.0) {
    SampledField direct = solve_quadratic(L, grid, &pair, nullptr);
    Solution sol{direct, {}};
    std::vector<double> grad;
    auto& dg = sol.diagnostics;
    dg.method = "direct";
    dg.initial_energy = assemble(mesh, L, nullptr, u, nullptr);
    dg.energy = assemble(mesh, L, nullptr, direct.values(), &grad);
    dg.energy_trace = {dg.initial_energy, dg.energy};
    dg.residual = residual_norm(grad, free_nodes(grid, true), grid);
    dg.converged = true;
    dg.stop_reason = "direct";
    if (opts.cross_check) {
      SolverOptions bb = opts;
      bb.secant_metric = false;  // constant metric, so the iteration shares nothing with the direct system
      const SolveDiagnostics it = descend(mesh, L, nullptr, u, bb);
      dg.iterations = it.iterations;
      dg.iterative_residual = it.residual;
      dg.energy_monotone = it.energy_monotone;
      dg.direct_difference = lp_norm(SampledField(grid, u) - direct, 2.0);
    }
    return sol;
  }
  SolveDiagnostics dg = descend(mesh, L, nullptr, u, opts);
  return {SampledField(grid, std::move(u)), std::move(dg)};
}

Solution solve_neumann(const AdmissibleLagrangian& L, const NeumannData& data, const SolverOptions& opts,
                       const std::optional<SampledField>& initial) {
  validate_neumann(data);
  const double compat = data.compatibility();
  if (std::abs(compat) > 1e-10) {
    std::ostringstream msg;
    msg << "solve_neumann: compatibility Psi(1) + Lambda(1) = 0 violated (value " << compat << ")";
    throw InvalidArgument(msg.str());
  }
  const Grid& grid = data.psi.grid();
  check_admissible(L, grid, opts);
  const SimplexMesh mesh(grid);
  std::vector<double> u(grid.node_count(), 0.0);
  if (initial) {
    require(initial->grid() == grid, "solve_neumann: initial guess grid mismatch");
    u = initial->values();
  }

  if (L.quadratic && L.p == 2.0) {
    SampledField direct = solve_quadratic(L, grid, nullptr, &data);
    Solution sol{direct, {}};
    std::vector<double> grad;
    auto& dg = sol.diagnostics;
    dg.method = "direct";
    dg.initial_energy = assemble(mesh, L, &data, u, nullptr);
    dg.energy = assemble(mesh, L, &data, direct.values(), &grad);
    dg.energy_trace = {dg.initial_energy, dg.energy};
    dg.residual = residual_norm(grad, free_nodes(grid, false), grid);
    dg.converged = true;
    dg.stop_reason = "direct";
    if (opts.cross_check) {
      SolverOptions bb = opts;
      bb.secant_metric = false;  // constant metric, so the iteration shares nothing with the direct system
      const SolveDiagnostics it = descend(mesh, L, &data, u, bb);
      subtract_mean(u, grid);
      dg.iterations = it.iterations;
      dg.iterative_residual = it.residual;
      dg.energy_monotone = it.energy_monotone;
      dg.direct_difference = lp_norm(SampledField(grid, u) - direct, 2.0);
    }
    return sol;
  }
  SolveDiagnostics dg = descend(mesh, L, &data, u, opts);
  subtract_mean(u, grid);
  return {SampledField(grid, std::move(u)), std::move(dg)};
}

}  // namespace sobotrace
