#pragma once
/// Radial mollifiers phi(x) = (1-|x|^2)^{m+1} psi(|x|^2) with unit mass and
/// vanishing moments, their scalings, and the derivative kernels psi^alpha.

#include <span>
#include <vector>

#include "json.hpp"
#include "sobotrace/fields.hpp"
#include "sobotrace/polynomial.hpp"

namespace sobotrace {

struct Mollifier {
  int dim = 1;            ///< d = N - 1
  int smoothness_m = 1;
  int moment_order_k = 1;
  std::vector<double> psi_coeffs;     ///< psi(s) = sum_j psi_coeffs[j] s^j
  std::vector<double> radial_coeffs;  ///< P(s) = (1-s)^{m+1} psi(s)
  Polynomial profile{1};              ///< phi on the closed unit ball as a polynomial in x

  /// phi(x), zero outside the unit ball.
  double operator()(std::span<const double> x) const;
  /// phi at radius r (zero for r >= 1).
  double radial(double r) const;
};

Mollifier build_moment_mollifier(int d, int k, int m);

/// eps^{-d} phi(x / eps).
double eval_scaled(const Mollifier& phi, double eps, std::span<const double> x);

/// Kernel psi^alpha on R^{N-1}; alpha has N = d + 1 entries, the last one vertical.
struct DerivativeKernel {
  MultiIndex alpha;
  Polynomial poly{1};

  int dim() const { return poly.dim(); }
  double operator()(std::span<const double> y) const;
};

DerivativeKernel derivative_kernel(const Mollifier& phi, const MultiIndex& alpha);

/// Integral of a polynomial over the unit ball in R^d, exact up to rounding
/// (radial Gauss-Legendre times closed-form sphere moments).
double ball_integral(const Polynomial& poly);

struct MomentResidual {
  MultiIndex alpha;
  double value = 0.0;     ///< ∫ x^alpha phi
  double expected = 0.0;  ///< 1 for alpha = 0, otherwise 0
};

/// Moments ∫ x^alpha phi for all |alpha| <= max_order, by radial quadrature whose
/// order is doubled until two refinements agree to 1e-11.
std::vector<MomentResidual> moment_residuals(const Mollifier& phi, int max_order);

/// Fourier transform ξ ↦ ∫ Q(|x|^2) e^{-2πi x·ξ} dx of a polynomial profile Q supported on
/// the closed unit ball of R^d, as a function of |ξ|. Evaluated in closed form by expanding
/// Q in powers of (1 - |x|^2), each of which has a Bessel-function transform.
class RadialFourier {
 public:
  RadialFourier() = default;
  /// s_coeffs[j] multiplies s^j with s = |x|^2.
  RadialFourier(const std::vector<double>& s_coeffs, int d);
  double operator()(double norm) const;
  int dim() const { return dim_; }

 private:
  int dim_ = 1;
  std::vector<double> u_coeffs_;  ///< Q = Σ_i u_coeffs_[i] (1 - s)^i
};

RadialFourier mollifier_fourier(const Mollifier& phi);
/// Transform of the vertical derivative kernel psi^{e_N} = -d phi - x·∇phi (radial, zero mean).
RadialFourier vertical_kernel_fourier(const Mollifier& phi);

nlohmann::json to_json(const Mollifier& phi);

}  // namespace sobotrace
