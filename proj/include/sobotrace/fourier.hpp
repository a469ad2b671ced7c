#pragma once
/// The p = 2 screening multiplier m(xi) = ∫_{B(0,1)} |e^{2πi h·xi} - 1|^2 / |h|^{d+2s} dh,
/// its two-sided bounds, and the Plancherel form of the screened seminorm on a torus.

#include <ostream>
#include <span>
#include <vector>

#include "json.hpp"
#include "sobotrace/fields.hpp"
#include "sobotrace/seminorms.hpp"

namespace sobotrace {

struct MultiplierSample {
  std::vector<double> xi;
  double m_value = 0.0;
  double s = 0.0;
  int dim = 0;
};

/// ∫_{B(0,R)} 4 sin^2(π h_1 c) / |h|^{d+q} dh for 0 < q < 2.
double ball_multiplier_integral(int d, double c, double R, double q);

MultiplierSample multiplier_m(std::span<const double> xi, double s);
double multiplier_m_radial(double norm, double s, int d);

struct MultiplierRow {
  double norm = 0.0;
  double m = 0.0;
  bool high_frequency = true;  ///< |xi| >= 1/2 uses c1, c2; otherwise c3
  double lower = 0.0, upper = 0.0;
  bool pass = true;
};

struct MultiplierBoundsResult {
  double s = 0.0;
  int dim = 0;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
  std::vector<MultiplierRow> rows;
  bool pass = true;
  nlohmann::json to_json() const;
};

/// c1 |xi|^{2s} <= m <= c2 |xi|^{2s} for |xi| >= 1/2 and c3 |xi|^2 <= m <= 4 c3 |xi|^2 below.
/// Samples are magnitudes along e_1; zero is skipped (both bounds are vacuous there).
MultiplierBoundsResult multiplier_bounds_check(double s, int d, const std::vector<double>& norms);

/// Columns: norm,m,lower,upper.
void write_multiplier_csv(const MultiplierBoundsResult& r, std::ostream& out);

struct PlancherelResult {
  double direct = 0.0;     ///< screened seminorm squared with sigma = 1
  double direct_error = 0.0;
  double spectral = 0.0;   ///< |cell| Σ_k |c_k|^2 m(k / L)
  double relative_discrepancy = 0.0;
  nlohmann::json to_json() const;
};

/// Requires every axis periodic.
PlancherelResult seminorm_plancherel_check(const SampledField& f, double s, const SeminormOptions& opts = {});

}  // namespace sobotrace
