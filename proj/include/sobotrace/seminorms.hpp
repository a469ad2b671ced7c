#pragma once
/// Screened and full fractional seminorms, integer Sobolev seminorms, the trace
/// pair norm, and the seminorm inequalities (Poincaré, doubling, interpolation,
/// L^p equivalence).

#include <functional>
#include <memory>
#include <span>

#include "json.hpp"
#include "sobotrace/fields.hpp"
#include "sobotrace/report.hpp"

namespace sobotrace {

/// Interaction radius sigma(x) limiting the inner integration variable to |h| < sigma(x).
class ScreeningFunction {
 public:
  enum class Kind { Constant, PowerLaw, GraphGap, Infinite };

  static ScreeningFunction constant(double a);
  /// sigma(x) = 1/2 ((x_axis - a) / (b - a))^r.
  static ScreeningFunction power_law(int axis, double a, double b, double r);
  /// sigma(x') = scale * (eta_plus(x') - eta_minus(x')).
  static ScreeningFunction graph_gap(double scale, SampledField eta_minus, SampledField eta_plus);
  static ScreeningFunction infinite();

  Kind kind() const { return kind_; }
  bool finite() const { return kind_ != Kind::Infinite; }
  double operator()(std::span<const double> x) const;
  /// Minimum over the nodes of a grid.
  double infimum(const Grid& g) const;
  nlohmann::json to_json() const;

 private:
  Kind kind_ = Kind::Infinite;
  int axis_ = 0;
  double a_ = 1.0, b_ = 1.0, r_ = 1.0;
  std::shared_ptr<const SampledField> eta_minus_, eta_plus_;
};

struct SeminormOptions {
  double radial_ratio = 1.15;  ///< geometric grading of radial shells
  int angles = 0;              ///< directions per circle; 0 selects 32 (d=2) or 24x12 (d=3)
  bool core_correction = false; ///< add the Lipschitz core estimate below spacing/2 to the value
  bool estimate_error = true;  ///< recompute with doubled shells to estimate the error
};

struct SeminormResult {
  double value = 0.0;                    ///< the seminorm (p-th root taken)
  double quadrature_error_estimate = 0.0;
  double power = 0.0;                    ///< value^p
  double power_error = 0.0;              ///< error estimate on value^p
  double s = 0.0, p = 0.0;
  nlohmann::json sigma;
  nlohmann::json to_json() const;
};

/// ∫_U ∫_{H(x)} |f(x+h) - f(x)|^p / |h|^{sp+N} dh dx with H(x) = B(0, sigma(x)) ∩ (U - x),
/// N the dimension of f's grid. Periodic axes represent the whole line.
SeminormResult screened_seminorm(const SampledField& f, const ScreeningFunction& sigma, double s, double p,
                                 const SeminormOptions& opts = {});

/// ‖∇^m u‖_p with Euclidean length over multi-indices of order m.
double sobolev_seminorm(const SampledField& u, int m, double p);
double sobolev_seminorm_pow(const SampledField& u, int m, double p);

struct XNormResult {
  double weighted_jump = 0.0;   ///< (∫ |f+ - f-|^p / sigma^{p-1})^{1/p}
  SeminormResult minus, plus;
  double value = 0.0;
};

/// Norm of a boundary pair; sigma must be finite.
XNormResult xspace_norm(const SampledField& f_minus, const SampledField& f_plus, const ScreeningFunction& sigma,
                        double s, double p, const SeminormOptions& opts = {});

struct PoincareResult {
  double lhs = 0.0, rhs = 0.0, constant_bound = 0.0, ratio = 0.0;
  bool pass = true;
};

/// ∫_B |f - f_E|^p <= 2^{sp+N} (r^{sp+N}/|E|) ∫_B ∫_E |f(y)-f(z)|^p / |y-z|^{sp+N},
/// evaluated as exact discrete sums over grid nodes (trapezoid weights).
PoincareResult poincare_check(const SampledField& f, std::span<const double> center, double r,
                              const std::function<bool(std::span<const double>)>& in_E, double s, double p);

struct DoublingResult {
  double ratio = 1.0, lower = 1.0, upper = 0.0, slack = 0.0;
  bool pass = true;
};

/// |f|^p_(2r) / |f|^p_(r) within [1, 1 + 2^{p(1-s)}] on a torus.
DoublingResult doubling_check(const SampledField& f, double r, double s, double p, const SeminormOptions& opts = {});

struct InterpolationResult {
  double lhs = 0.0, rhs = 0.0, slack = 0.0, s = 0.0;
  bool pass = true;
};

/// |f|_s <= |f|_{s1}^theta |f|_{s2}^{1-theta}, s = theta s1 + (1-theta) s2.
/// theta = 1 is accepted as a degenerate identity case.
InterpolationResult interpolation_check(const SampledField& f, double s1, double s2, double theta, double p,
                                        const ScreeningFunction& sigma, const SeminormOptions& opts = {});

struct EquivalenceResult {
  double lp = 0.0, screened = 0.0, full = 0.0;
  double constant = 0.0;          ///< assembled C
  double measured_constant = 1.0; ///< (‖f‖ + |f|_full) / (‖f‖ + |f|_sigma)
  double slack = 0.0;
  bool lower_pass = true, upper_pass = true;
};

/// ‖f‖ + |f|_sigma <= ‖f‖ + |f|_full <= C (‖f‖ + |f|_sigma) with
/// C = 1 + (2^p beta_N / (sp sigma_-^{sp}))^{1/p}. Requires a non-periodic domain.
EquivalenceResult inhomogeneous_equivalence_check(const SampledField& f, const ScreeningFunction& sigma, double s,
                                                  double p, const SeminormOptions& opts = {});

}  // namespace sobotrace
