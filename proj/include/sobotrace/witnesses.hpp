#pragma once
/// Functions separating the screened spaces from the homogeneous fractional spaces,
/// and the growth experiments that exhibit the separation numerically.

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace sobotrace {

/// u(x) = f(|x|) on R^N with f(r) = ∫_0^r dt / ((2+t)^{N/p} log(2+t)^{2/p}).
/// f is tabulated on log-spaced nodes up to radius 1e4 (16-point Gauss-Legendre per
/// interval, checked against the 8-point rule) and evaluated between nodes by the same rule.
class ConeWitness {
 public:
  ConeWitness(int dim, double p);

  int dim() const { return dim_; }
  double p() const { return p_; }
  double profile(double r) const;             ///< f(r), r >= 0
  double profile_derivative(double r) const;  ///< f'(r)
  double operator()(double r) const { return profile(r); }
  /// |f|_{0,1} = 1 / (2^{N/p} (log 2)^{2/p}) = f'(0).
  double lipschitz_constant() const;
  /// Largest difference quotient between consecutive table nodes.
  double max_table_slope() const;
  /// Largest |16-point - 8-point| panel difference seen while building the table.
  double table_error() const { return table_error_; }
  double table_radius() const { return nodes_.back(); }
  const std::vector<double>& table_nodes() const { return nodes_; }
  const std::vector<double>& table_values() const { return values_; }

 private:
  int dim_;
  double p_;
  std::vector<double> nodes_, values_;
  double table_error_ = 0.0;
};

ConeWitness cone_witness(int dim, double p);

/// A radial function f(|x|) on R^N, N in {1, 2, 3}.
struct RadialProfile {
  int dim = 1;
  std::function<double(double)> f;
};

RadialProfile radial_profile(const ConeWitness& w);

/// ∫_{B(0,R)} ∫_{B(0,R), |x-y| < cut} |f(|x|) - f(|y|)|^p / |x-y|^{sp+N} dy dx for every R in
/// `radii` (increasing); cut = infinity gives the full seminorm^p on the ball. The integrand is
/// reduced to the radial variables with the angular factor in closed form (N = 1, 3) or by
/// graded Gauss-Legendre (N = 2); contributions accumulate outward, so the values are nested.
std::vector<double> radial_seminorm_pow(const RadialProfile& u, double cut, double s, double p,
                                        const std::vector<double>& radii);

/// Least-squares slope of log(y) against log(x) over the last min(3, n) points.
double tail_slope(const std::vector<double>& x, const std::vector<double>& y);

struct GrowthRow {
  double cutoff = 0.0;
  double screened = 0.0;  ///< seminorm^p
  double full = 0.0;      ///< seminorm^p
  double slope = 0.0;     ///< full-seminorm slope fitted over the rows so far (0 for the first)
};

struct GrowthTable {
  std::vector<GrowthRow> rows;
  double full_slope = 0.0;     ///< over the last three cutoffs
  double expected_slope = 0.0; ///< p (1 - s)
  bool full_monotone = true;
  bool full_diverges = false;  ///< slope >= 0.5 and monotone increase
  std::vector<double> screened_increments;
  bool screened_increments_decreasing = true;
  double screened_bound = 0.0;  ///< the explicit bound on the whole-space screened seminorm^p (cut 1)

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// Screened (|h| < sigma) and full seminorm^p of u restricted to B(0, R) for each cutoff R.
/// `screened_bound` is (alpha_N beta_N |f|_{0,1}^p + beta_N^2 / log 2) / ((1-s) p), valid for the
/// cone witness with sigma = 1; it is left 0 otherwise.
GrowthTable divergence_experiment(const RadialProfile& u, double sigma, double s, double p,
                                  const std::vector<double>& radii, double lipschitz = 0.0);
GrowthTable divergence_experiment(const ConeWitness& w, double sigma, double s, double p,
                                  const std::vector<double>& radii);

/// u(x) = 1/x_N on V x (0, b), V = (0, 1)^{N-1}, with screening sigma(x) = 1/2 (x_N / b)^r.
struct VanishingWitness {
  int dim = 2;
  double p = 2.0, s = 0.5, r = 4.0, b = 1.0;

  /// (2 - 1/p) / (1 - s); r must exceed it.
  double threshold() const { return (2.0 - 1.0 / p) / (1.0 - s); }
  double sigma(double x_n) const;
};

/// Validates N in {2, 3}, p >= 1, 0 < s < 1, b > 0 and r > threshold.
VanishingWitness vanishing_witness(int dim, double p, double s, double r, double b = 1.0);

struct VanishingRow {
  double delta = 0.0;
  double screened = 0.0;  ///< seminorm^p over V x (delta, b)
  double full = 0.0;
};

struct VanishingTable {
  std::vector<VanishingRow> rows;
  double full_slope = 0.0;  ///< of log(full) against log(1/delta), last three cutoffs
  double expected_slope = 0.0;  ///< (1 + s) p - 1
  std::vector<double> screened_increments;
  std::vector<double> increment_ratios;
  bool ratios_below_one = true;
  bool ratios_decreasing = true;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// Seminorms of the witness on V x (delta, b) for decreasing delta. The V-integrations are
/// reduced to the autocorrelation of the unit cube, leaving a graded 2-D quadrature.
VanishingTable vanishing_witness_experiment(const VanishingWitness& w, const std::vector<double>& deltas);

enum class BoundaryDatum { ConeWitness, Bump, Constant };

struct NoExtensionRow {
  double cell = 0.0;               ///< horizontal period L
  double energy = 0.0;             ///< ‖∇u‖_p^p of the lift over cell x (0, 1)
  double boundary_full = 0.0;      ///< full seminorm^p of the datum on (-L/2, L/2), order 1 - 1/p
  double boundary_screened = 0.0;  ///< screened at a = 1/2 on the periodic cell
};

struct NoExtensionReport {
  double p = 2.0;
  BoundaryDatum datum = BoundaryDatum::ConeWitness;
  std::vector<NoExtensionRow> rows;
  double energy_spread = 1.0;  ///< max / min energy (1 when all vanish)
  bool energy_bounded = true;  ///< spread <= 2
  double boundary_slope = 0.0; ///< log-log slope of boundary_full against the cell size
  bool boundary_monotone = true;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// Lifts the datum (f- = f+ = f(|x'|) restricted to the periodic cell (-L/2, L/2)) into the
/// unit strip with lift_m1 for each cell size L, and reports the lift energy against the full
/// boundary seminorm. Horizontal dimension 1; `nodes_per_unit` horizontal nodes per unit length.
NoExtensionReport no_extension_demo(double p, BoundaryDatum datum = BoundaryDatum::ConeWitness,
                                    const std::vector<double>& cells = {20.0, 60.0, 200.0}, int nodes_per_unit = 8,
                                    int vertical_cells = 16);

std::string to_string(BoundaryDatum d);
BoundaryDatum boundary_datum_from_string(const std::string& s);

}  // namespace sobotrace
