#pragma once
/// Traces and liftings on strips R^{N-1} x (b-, b+) and on domains between two graphs.
///
/// A strip grid has periodic horizontal axes (the torus cell standing in for R^{N-1})
/// and a non-periodic vertical axis stored last, whose end planes are the walls.
/// Graph domains are sampled on the enclosing box cell x [min eta-, max eta+].

#include <optional>
#include <vector>

#include "json.hpp"
#include "sobotrace/fields.hpp"
#include "sobotrace/mollifiers.hpp"
#include "sobotrace/report.hpp"

namespace sobotrace {

struct StripDomain {
  double b_minus = 0.0;
  double b_plus = 1.0;
  Box horizontal;  ///< periodic cell over R^{N-1}

  double height() const { return b_plus - b_minus; }
  int horizontal_dim() const { return horizontal.dim(); }
};

StripDomain make_strip(const Box& horizontal, double b_minus, double b_plus);
/// Validates the strip layout of a grid and returns its domain.
StripDomain strip_of(const Grid& g);
Grid make_strip_grid(const StripDomain& strip, const std::vector<int>& horizontal_shape, int vertical_cells);
/// The horizontal factor of a strip or box grid.
Grid horizontal_grid(const Grid& g);

struct TracePair {
  SampledField f_minus, f_plus;
};

/// f_k^± for k = 0..order-1 on a shared horizontal grid.
struct TraceJet {
  int order = 0;
  std::vector<SampledField> minus, plus;
};

TraceJet make_jet(std::vector<SampledField> minus, std::vector<SampledField> plus);

/// theta(tau) on [0, 1]: 1 on [0, delta], 0 on [1 - delta, 1], a smoothstep of the
/// given order (C^order) in between. Constant outside [0, 1].
struct CutoffProfile {
  double delta = 0.25;
  int order = 2;  ///< 2 is the quintic smoothstep

  double operator()(double tau) const;
  double derivative(double tau) const;
};

enum class TraceMode {
  BoundaryPlane,  ///< values on the wall planes
  Extrapolated,   ///< linear extrapolation 2 u_1 - u_2 from the first two interior planes
};

TracePair trace_pair(const SampledField& u, TraceMode mode = TraceMode::BoundaryPlane);

/// A bundle of inequality reports with a combined verdict.
struct CheckResult {
  std::vector<InequalityReport> reports;
  nlohmann::json info = nlohmann::json::object();

  bool pass() const { return all_pass(reports); }
  const InequalityReport& find(const std::string& id) const;
  nlohmann::json to_json() const;
};

/// 3^p beta_{N-1} p^p / (p-1)^p, the constant of the trace seminorm estimate.
double strip_trace_constant(int horizontal_dim, double p);

/// ∫|Tr+ u - Tr- u|^p <= b^{p-1} ‖∂_N u‖_p^p  (id "est1") and, per wall,
/// |Tr± u|^p in the seminorm of order 1 - 1/p screened at b <= C ‖∇u‖_p^p  (ids "est2_minus", "est2_plus").
CheckResult trace_check_m1(const SampledField& u, double p);

/// p = 1: ∫|Tr+ u - Tr- u| <= ∫|∂_N u|  ("eq1") and, for each eps and wall, the supremum
/// over grid shifts |h'| <= eps of ∫|Tr u(x'+h') - Tr u(x')| against ∫ over both wall bands
/// of width eps of |∇u|. The proven constant 3 decides pass; the constant-1 form is
/// reported in the extras.
CheckResult trace_check_p1(const SampledField& u, const std::vector<double>& eps);

struct LiftOptions {
  double a = 0.5;                     ///< screening scale; mollifier support radius a / (b+ - b-)
  std::optional<Mollifier> mollifier;  ///< default: build_moment_mollifier(d, 1, 1) for m = 1
  CutoffProfile cutoff{};
};

/// u = theta u- + (1 - theta) u+ with u- = phi_{x_N - b-} * f-, u+ = phi_{b+ - x_N} * f+
/// (convolutions over the horizontal torus, evaluated spectrally). `grid` is a strip grid
/// whose horizontal factor matches the data.
SampledField lift_m1(const TracePair& pair, const Grid& grid, const LiftOptions& opts = {});

/// Jet lifting u- = Σ_k t^k / k! phi_t * f_k- with t = x_N - b- (and t = b+ - x_N, signs
/// (-t)^k, on top) using the moment mollifier with k = m vanishing moments, smoothness m,
/// blended by a cutoff of order max(2, m).
SampledField lift_general(const TraceJet& jet, const Grid& grid, double a = 0.5);

/// Wall values of ∂_N^k u for k < m from one-sided stencils of max(k+3, m+1) nodes.
TraceJet wall_jets(const SampledField& u, int m);

/// Q_{i,m,n} = Σ_{k=0}^{m-i-n-1} (-1)^k/k! (∇^i f+_{k+n} + (-1)^{k+1} ∇^i f-_{k+n}) (height/2)^k,
/// one component per horizontal multi-index of order i (lexicographic; a single field for i = 0).
std::vector<SampledField> q_polynomial(const TraceJet& jet, int i, int m, int n, double height);

/// For i + l <= m - 1: ∫|Q_{i,m,l}|^p <= b^{(m-i-l)p-1} ‖∇^m u‖_p^p (ids "q_i_l"), and for every
/// vertical wall, Σ_{|beta| = m-1} |Tr ∂^beta u|^p_{screened} <= C Σ_beta ‖∇∂^beta u‖_p^p
/// ("seminorm_minus", "seminorm_plus").
CheckResult trace_check_higher(const SampledField& u, int m, double p);

struct ByPartsResult {
  double lhs = 0.0;  ///< Σ (-1)^k/k! (f^(k)(b) + (-1)^{k+1} f^(k)(0)) (b/2)^k
  double rhs = 0.0;  ///< 1/(m-1)! ∫_0^b f^(m)(t) (b/2 - t)^{m-1} dt
  double residual = 0.0;         ///< |lhs - rhs|
  double taylor_residual = 0.0;  ///< max over nodes of |f(t) - Σ (-1)^k/k! f^(k)(b)(b-t)^k + 1/(m-1)! ∫_t^b f^(m)(τ)(t-τ)^{m-1} dτ|
  nlohmann::json to_json() const;
};

/// f on a non-periodic 1-D grid over [lo, lo + b]. Derivatives use (m+2)-node stencils;
/// integrals integrate the piecewise-linear interpolant of f^(m) against the exact weight.
ByPartsResult by_parts_check(const SampledField& f, int m);

struct StructureResult {
  double lhs = 0.0;  ///< ∫_{cell x (0,b)} |v|^p
  double rhs = 0.0;  ///< screened seminorm^p of f, order 1 - 1/p, radius a
  double rhs_error = 0.0;
  double ratio = 0.0;
  nlohmann::json to_json() const;
};

/// v(x', t) = t^{-N} ∫ f(y') psi((x'-y')/t) dy' for the zero-mean radial kernel psi^{e_N}
/// of the m = 1 mollifier scaled into B'(0, a/b).
StructureResult structure_estimate(const SampledField& f, double a, double b, double p);

// ---------------------------------------------------------------------------
// Domains between two graphs.

struct GraphDomain {
  SampledField eta_minus, eta_plus;  ///< on the horizontal grid
  double lipschitz_L = 0.0;          ///< |eta-|_{0,1} + |eta+|_{0,1} from grid differences

  SampledField gap() const { return eta_plus - eta_minus; }
  bool flat() const;
};

GraphDomain make_graph_domain(SampledField eta_minus, SampledField eta_plus);
/// Lipschitz seminorm estimate: the largest forward-difference gradient length.
double lipschitz_estimate(const SampledField& eta);
/// Box grid over cell x [min eta-, max eta+].
Grid make_graph_grid(const GraphDomain& domain, int vertical_cells);

/// Traces u(x', eta±(x')) by vertical linear interpolation.
TracePair graph_traces(const SampledField& u, const GraphDomain& domain);

/// ∫_Omega g for a field on the box grid: per column, the piecewise-linear interpolant
/// integrated exactly from eta- to eta+.
double graph_integral(const SampledField& g, const GraphDomain& domain);

struct FlattenResult {
  SampledField first;      ///< w(y) = u(y', y_N + eta-(y')) on cell x [0, max gap]
  SampledField inside;     ///< 1 where y_N <= gap(y'), else 0
  SampledField reference;  ///< u(y', eta- + tau gap) on cell x [0, 1]
  SampledField jacobian;   ///< gap(y'), the volume weight of the reference stage
};

FlattenResult flatten(const SampledField& u, const GraphDomain& domain, int reference_cells = 0);
/// ∫ over the first-stage image {0 < y_N < gap(y')} of g (column integrals as above).
double flattened_integral(const SampledField& w, const GraphDomain& domain);

/// ∫|Tr+ - Tr-|^p / gap^{p-1} <= ‖∂_N u‖_p^p ("trace1") and per wall the seminorm of
/// order 1 - 1/p screened at gap / (2 max(L, 1)) bounded by (1+L)^p C ‖∇u‖_p^p
/// ("trace2_minus", "trace2_plus"). Flat domains coinciding with the grid delegate to
/// trace_check_m1.
CheckResult graph_trace_check(const SampledField& u, const GraphDomain& domain, double p);

/// u = theta u- + (1 - theta) u+, u-(x) = (phi_t * f-)(x') with t = x_N - eta-(x'), mollifier
/// support radius a, and theta = cutoff((x_N - eta-) / gap). The formulas extend evenly
/// across the graphs, so the box grid carries a smooth field.
SampledField graph_lift_m1(const TracePair& pair, const GraphDomain& domain, const Grid& grid, double a = 0.5,
                           const CutoffProfile& cutoff = {});

// ---------------------------------------------------------------------------
// Energy bounds for the lifts, with calibrated constants.

struct LiftEnergy {
  double energy = 0.0;       ///< ‖∇u‖_p^p
  double jump = 0.0;         ///< ∫|f+ - f-|^p / sigma^{p-1} (sigma = b, or the local gap)
  double seminorms = 0.0;    ///< |f-|^p + |f+|^p, order 1 - 1/p, screened at a (strip) or a gap (graph)
  double seminorm_error = 0.0;
  double ratio = 0.0;        ///< energy / (jump + seminorms)
};

LiftEnergy strip_lift_energy(const TracePair& pair, const SampledField& lifted, double a, double p);
/// The (1+L)^p factor is not included in `ratio`.
LiftEnergy graph_lift_energy(const TracePair& pair, const SampledField& lifted, const GraphDomain& domain, double a,
                             double p);

}  // namespace sobotrace
