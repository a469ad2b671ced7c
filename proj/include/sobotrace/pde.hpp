#pragma once
/// Variational Dirichlet and Neumann solvers on strip grids for convex Lagrangians G(x, ξ)
/// of p-growth, with sampled admissibility checks and a-priori energy bounds.
///
/// Discretization: continuous piecewise-linear functions on the Kuhn subdivision of every
/// grid cell (d! simplices per cell), G evaluated at simplex centroids. The gradient of a
/// nodal field on a simplex is a vector of forward differences along the simplex path.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sobotrace/fields.hpp"
#include "sobotrace/report.hpp"
#include "sobotrace/tracelift.hpp"

namespace sobotrace {

using VectorFunction = std::function<void(std::span<const double> x, std::span<double> out)>;
using LagrangianFunction = std::function<double(std::span<const double> x, std::span<const double> xi)>;
using LagrangianGradient =
    std::function<void(std::span<const double> x, std::span<const double> xi, std::span<double> out)>;

/// G(x, ξ) = ½ weight(x) |ξ|² + drift(x)·ξ; enables the direct linear solve at p = 2.
struct QuadraticForm {
  PointFunction weight;  ///< null means 1
  VectorFunction drift;  ///< null means 0
};

/// Convex in ξ, A-|ξ|^p - ψ-(x) <= G(x, ξ), |∇_ξ G(x, ξ)| <= ψ+(x) + A+|ξ|^{p-1}.
struct AdmissibleLagrangian {
  std::string name;
  double p = 2.0;
  double a_minus = 0.5;
  double a_plus = 1.0;
  LagrangianFunction G;
  LagrangianGradient grad_xi;
  PointFunction psi_minus;  ///< null means 0
  PointFunction psi_plus;   ///< null means 0
  std::optional<QuadraticForm> quadratic;

  /// ψ± sampled on a grid (zero fields when absent).
  SampledField psi_minus_field(const Grid& g) const;
  SampledField psi_plus_field(const Grid& g) const;
};

/// Coefficients of G(x, ξ) = weight(x) |ξ|^p / p + drift(x)·ξ.
struct ModelCoefficients {
  PointFunction weight;  ///< null means 1; must take values in [weight_min, weight_max]
  double weight_min = 1.0;
  double weight_max = 1.0;
  VectorFunction drift;  ///< null means 0
  PointFunction drift_norm;  ///< |drift(x)|; derived from drift when null
};

/// Gradient regularization for p < 2: |ξ|^{p-2} ξ is evaluated as (|ξ|² + ε²)^{(p-2)/2} ξ.
constexpr double kGradientRegularization = 1e-8;

/// A- = weight_min/p and ψ- = 0 without drift; with drift, Young's inequality gives
/// A- = weight_min/(2p), ψ- = (weight_min/2)^{-1/(p-1)} |g|^{p'} / p'. A+ = weight_max, ψ+ = |g|.
AdmissibleLagrangian model_lagrangian(double p, const ModelCoefficients& c = {});

/// G = -|ξ|^p / p with declared A± = 1: not convex and not coercive.
AdmissibleLagrangian concave_lagrangian(double p);

struct AdmissibilityViolation {
  std::string condition;  ///< coercivity, growth, convexity, gradient, upper_bound
  std::vector<double> x, xi, eta;
  double lhs = 0.0, rhs = 0.0;
};

struct AdmissibilityReport {
  int trials = 0;
  bool coercivity = true, growth = true, convexity = true, gradient = true, upper_bound = true;
  std::vector<AdmissibilityViolation> violations;  ///< first witness per failed condition
  bool pass() const { return coercivity && growth && convexity && gradient && upper_bound; }
  nlohmann::json to_json() const;
};

/// Samples x uniformly in the grid's box and ξ, η with log-uniform magnitudes in [1e-3, 1e3].
/// Checks the coercivity and growth conditions, midpoint convexity, ∇_ξG against central
/// differences (1e-5 relative) and |G(x,ξ)| <= |G(x,0)| + |ψ+|^{p'}/p' + (1+A+)/p |ξ|^p.
AdmissibilityReport admissibility_check(const AdmissibleLagrangian& L, const Grid& grid, int trials,
                                        std::uint64_t seed = 1);

/// Ψ(v) = ∫ ψ v and Λ(f) = ∫ h+ f+ + ∫ h- f-; ψ lives on the strip grid, h± on its horizontal grid.
struct NeumannData {
  SampledField psi;
  SampledField h_minus, h_plus;

  /// Ψ(1) + Λ(1).
  double compatibility() const;
  /// Ψ(v) + Λ(Tr v) with trapezoid weights.
  double apply(const SampledField& v) const;
};

NeumannData zero_neumann_data(const Grid& g);

/// Kuhn simplices of a strip grid (periodic horizontal axes, non-periodic vertical axis).
class SimplexMesh {
 public:
  explicit SimplexMesh(const Grid& g);

  const Grid& grid() const { return grid_; }
  int dim() const { return dim_; }
  std::size_t simplex_count() const { return axes_.size(); }
  double simplex_volume() const { return volume_; }
  /// Node indices v_0..v_d; v_j = v_{j-1} + e_{axis(j)}.
  std::span<const std::size_t> vertices(std::size_t t) const {
    return {vertices_.data() + t * (dim_ + 1), static_cast<std::size_t>(dim_ + 1)};
  }
  std::span<const int> axes(std::size_t t) const { return {axes_[t].data(), static_cast<std::size_t>(dim_)}; }
  std::span<const double> centroid(std::size_t t) const {
    return {centroids_.data() + t * dim_, static_cast<std::size_t>(dim_)};
  }
  /// ∇v on simplex t.
  void gradient(std::span<const double> v, std::size_t t, std::span<double> out) const;

 private:
  Grid grid_;
  int dim_ = 0;
  double volume_ = 0.0;
  std::vector<std::size_t> vertices_;
  std::vector<std::array<int, kMaxDim>> axes_;
  std::vector<double> centroids_;
};

/// ∫ G(x, ∇v) over the strip, minus Ψ(v) + Λ(Tr v) when data is given.
double energy(const SampledField& v, const AdmissibleLagrangian& L, const NeumannData* data = nullptr);

/// ∫ |∇v|^p with the piecewise-linear gradient.
double gradient_norm_pow(const SampledField& v, double p);

struct SolverOptions {
  double tolerance = 1e-8;         ///< on the residual norm
  double energy_tolerance = 1e-12; ///< relative energy change over `energy_window` iterations
  int energy_window = 5;
  int max_iterations = 100000;
  bool preconditioned = true;      ///< descend in a Laplacian-type metric instead of the lumped L² one
  /// With `preconditioned`: reweight the metric every step by the secant modulus
  /// |∇_ξG(x,ξ) - ∇_ξG(x,0)| / |ξ| of the current iterate; otherwise use the constant-coefficient
  /// Laplacian with Barzilai-Borwein steps.
  bool secant_metric = true;
  bool cross_check = true;         ///< at p = 2 with a quadratic G, also run the iterative path
  bool check_admissibility = true;
  int admissibility_trials = 200;
};

struct SolveDiagnostics {
  std::string method;  ///< direct or iterative
  double energy = 0.0;
  double initial_energy = 0.0;
  /// sqrt(Σ r_i² / w_i) over free nodes, r the discrete weak-form residual (≈ L² norm of the
  /// strong residual div ∇_ξG(·,∇u) + ψ).
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  bool energy_monotone = true;  ///< every accepted step decreased the energy (up to 1e-12 relative)
  std::vector<double> energy_trace;
  /// L² distance between the iterative and direct solutions (p = 2 quadratic only).
  std::optional<double> direct_difference;
  std::optional<double> iterative_residual;

  nlohmann::json to_json() const;
};

struct Solution {
  SampledField u;
  SolveDiagnostics diagnostics;
};

/// Minimizes ∫G(x,∇v) over nodal fields with boundary planes fixed to the pair, starting from
/// lift_m1(pair). A quadratic G at p = 2 is solved directly. Throws InvalidArgument when the
/// admissibility check fails.
Solution solve_dirichlet(const AdmissibleLagrangian& L, const TracePair& pair, const Grid& grid,
                         const SolverOptions& opts = {});

/// Minimizes ∫G(x,∇v) - Ψ(v) - Λ(Tr v) over all nodal fields, returned with zero mean.
/// Throws InvalidArgument when |Ψ(1) + Λ(1)| > 1e-10 or the admissibility check fails.
Solution solve_neumann(const AdmissibleLagrangian& L, const NeumannData& data, const SolverOptions& opts = {},
                       const std::optional<SampledField>& initial = std::nullopt);

/// Direct solve of the p = 2 quadratic problem (Dirichlet when data is null, Neumann otherwise).
SampledField solve_quadratic(const AdmissibleLagrangian& L, const Grid& grid, const TracePair* pair,
                             const NeumannData* data);

/// Fixed test fields on the strip grid: horizontal Fourier modes |k|_∞ <= max_mode times
/// vertical profiles, plus smooth bumps of radius a quarter of the height on a coarse lattice.
/// With `vanish_on_walls` the profiles are sin(πjt) and every field is zero on both boundary
/// planes; otherwise they are t - 1/2, cos(πjt) and the wall layers exp(-2π|k|t),
/// exp(-2π|k|(1-t)). Constants are excluded.
std::vector<SampledField> test_dictionary(const Grid& g, bool vanish_on_walls, int max_mode = 8);

/// max over the dictionary of |DF(u)[v]| / ‖v‖_2, the Neumann form including -Ψ - Λ.
double weak_residual(const SampledField& u, const AdmissibleLagrangian& L, const NeumannData* data,
                     const std::vector<SampledField>& dictionary);

/// max over the dictionary of |Ψ(v) + Λ(Tr v)| / ‖∇v‖_p: a lower bound for the dual norm.
double dual_norm_lower_bound(const NeumannData& data, double p, const std::vector<SampledField>& dictionary);

/// ∫|∇u|^p <= c (∫|G(x,0)| + |ψ-| + |ψ+|^{p'} + ∫|f+ - f-|^p + |f-|^p + |f+|^p), the seminorms
/// of order 1 - 1/p screened at a = 1/2. c = max(1, (1 + A+) c_lift / p) / A- with the frozen
/// strip lift constant c_lift.
InequalityReport dirichlet_energy_bound(const SampledField& u, const AdmissibleLagrangian& L);

/// ∫|∇u|^p <= c (∫|G(x,0)| + |ψ-| + D^{p'}) with D the dictionary lower bound of the dual norm
/// of Ψ + Λ. c = (2/A-) max(1, (p A-/2)^{-1/(p-1)} / p') times the frozen surrogate factor.
InequalityReport neumann_energy_bound(const SampledField& u, const AdmissibleLagrangian& L, const NeumannData& data);

/// Largest (D_discrete / D_dictionary)^{p'} over the Neumann reference family for the model
/// Lagrangian, where the discrete dual norm equals ‖∇u‖_p^{p-1}.
double measure_neumann_surrogate(int dim, double p);

// ---------------------------------------------------------------------------
// JSON problems

struct PdeProblem {
  enum class Kind { Dirichlet, Neumann } kind = Kind::Dirichlet;
  Grid grid;
  AdmissibleLagrangian lagrangian;
  TracePair pair;     ///< Dirichlet data
  NeumannData data;   ///< Neumann data
  SolverOptions solver;
};

/// Parses a problem description; field references are either file paths (fields format,
/// relative to base_dir) or {"constant": c, "modes": [{"amplitude", "wavevector", "phase"}]}.
PdeProblem problem_from_json(const nlohmann::json& j, const std::string& base_dir = ".");

struct PdeReport {
  Solution solution;
  AdmissibilityReport admissibility;
  std::vector<InequalityReport> checks;
  nlohmann::json to_json() const;
};

PdeReport run_problem(const PdeProblem& problem);

}  // namespace sobotrace
