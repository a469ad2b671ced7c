#include "sobotrace/mollifiers.hpp"

#include <Eigen/Dense>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>

#include "sobotrace/common.hpp"
#include "sobotrace/quadrature.hpp"

namespace sobotrace {

namespace {

double horner(const std::vector<double>& c, double s) {
  double acc = 0.0;
  for (std::size_t j = c.size(); j-- > 0;) acc = acc * s + c[j];
  return acc;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// ∫_{S^{d-1}} z^alpha dσ.
double sphere_moment(const MultiIndex& alpha) {
  double num = 2.0;
  int total = 0;
  for (int a : alpha) {
    if (a % 2) return 0.0;
    num *= std::tgamma(0.5 * (a + 1));
    total += a;
  }
  return num / std::tgamma(0.5 * (total + static_cast<int>(alpha.size())));
}

}  // namespace

double Mollifier::radial(double r) const {
  if (r >= 1.0) return 0.0;
  return horner(radial_coeffs, r * r);
}

double Mollifier::operator()(std::span<const double> x) const {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += x[a] * x[a];
  if (s >= 1.0) return 0.0;
  return horner(radial_coeffs, s);
}

Mollifier build_moment_mollifier(int d, int k, int m) {
  require(d >= 1 && d <= kMaxDim, "mollifier: dimension must be in [1, 4]");
  require(k >= 1, "mollifier: moment order k must be >= 1");
  require(m >= 1, "mollifier: smoothness m must be >= 1");
  if (k > 8) warn("mollifier: moment order k > 8, Gram system is ill-conditioned");
  const int l = (k + 1) / 2;
  // <s^i, s^j> = 1/2 ∫_0^1 s^{i+j} s^{(d-2)/2} (1-s)^{m+1} ds = 1/2 B(i+j+d/2, m+2).
  Eigen::MatrixXd gram(l + 1, l + 1);
  for (int i = 0; i <= l; ++i)
    for (int j = 0; j <= l; ++j) gram(i, j) = 0.5 * std::beta(i + j + 0.5 * d, m + 2.0);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(l + 1);
  // Unit mass: ∫phi = beta_d ∫_0^1 r^{d-1} phi(r) dr = beta_d <1, psi>.
  rhs(0) = 1.0 / sphere_surface(d);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (!lu.isInvertible()) throw NumericalError("mollifier: singular Gram matrix");
  Eigen::VectorXd c = lu.solve(rhs);

  Mollifier phi;
  phi.dim = d;
  phi.smoothness_m = m;
  phi.moment_order_k = k;
  phi.psi_coeffs.assign(c.data(), c.data() + c.size());
  // P(s) = (1-s)^{m+1} psi(s).
  std::vector<double> one_minus(m + 2);
  for (int j = 0; j <= m + 1; ++j) one_minus[j] = binomial(m + 1, j) * ((j % 2) ? -1.0 : 1.0);
  phi.radial_coeffs.assign(m + 2 + l, 0.0);
  for (int i = 0; i <= m + 1; ++i)
    for (int j = 0; j <= l; ++j) phi.radial_coeffs[i + j] += one_minus[i] * phi.psi_coeffs[j];
  // Expand P(|x|^2) into monomials of x.
  Polynomial r2(d);
  for (int a = 0; a < d; ++a) {
    MultiIndex e(d, 0);
    e[a] = 2;
    r2.add_term(e, 1.0);
  }
  Polynomial power = Polynomial::constant(d, 1.0);
  Polynomial prof(d);
  for (std::size_t j = 0; j < phi.radial_coeffs.size(); ++j) {
    prof = prof + power * phi.radial_coeffs[j];
    power = power * r2;
  }
  phi.profile = prof;
  return phi;
}

double eval_scaled(const Mollifier& phi, double eps, std::span<const double> x) {
  require(eps > 0.0, "eval_scaled: eps must be positive");
  double y[kMaxDim];
  for (int a = 0; a < phi.dim; ++a) y[a] = x[a] / eps;
  return std::pow(eps, -phi.dim) * phi(std::span<const double>(y, phi.dim));
}

double DerivativeKernel::operator()(std::span<const double> y) const {
  double s = 0.0;
  for (int a = 0; a < dim(); ++a) s += y[a] * y[a];
  if (s >= 1.0) return 0.0;
  return poly.evaluate(y);
}

DerivativeKernel derivative_kernel(const Mollifier& phi, const MultiIndex& alpha) {
  const int d = phi.dim;
  require(static_cast<int>(alpha.size()) == d + 1, "derivative_kernel: alpha must have d + 1 entries");
  int order = 0;
  for (int a : alpha) {
    require(a >= 0, "derivative_kernel: negative multi-index entry");
    order += a;
  }
  require(order <= phi.smoothness_m, "derivative_kernel: |alpha| exceeds mollifier smoothness");
  Polynomial k = phi.profile;
  int current = 0;
  // Vertical steps: psi^{beta+e_N} = -(|beta|+N-1) psi^beta - grad psi^beta . y.
  for (int step = 0; step < alpha[d]; ++step) {
    Polynomial next = k * (-static_cast<double>(current + d));
    for (int a = 0; a < d; ++a) next = next + (k.derivative(a) * Polynomial::variable(d, a)) * -1.0;
    k = next;
    ++current;
  }
  for (int a = 0; a < d; ++a)
    for (int step = 0; step < alpha[a]; ++step) {
      k = k.derivative(a);
      ++current;
    }
  return DerivativeKernel{alpha, k};
}

double ball_integral(const Polynomial& poly) {
  const int d = poly.dim();
  double total = 0.0;
  for (const auto& [e, c] : poly.terms()) {
    const double sph = sphere_moment(e);
    if (sph == 0.0) continue;
    int deg = 0;
    for (int v : e) deg += v;
    // ∫_0^1 r^{deg + d - 1} dr
    total += c * sph / (deg + d);
  }
  return total;
}

std::vector<MomentResidual> moment_residuals(const Mollifier& phi, int max_order) {
  std::vector<MomentResidual> out;
  const int d = phi.dim;
  for (int order = 0; order <= max_order; ++order) {
    for (const auto& alpha : multi_indices(d, order)) {
      MomentResidual r;
      r.alpha = alpha;
      r.expected = order == 0 ? 1.0 : 0.0;
      const double sph = sphere_moment(alpha);
      if (sph != 0.0) {
        auto radial_integral = [&](int n) {
          const GaussRule& g = gauss_legendre(n);
          double acc = 0.0;
          for (std::size_t q = 0; q < g.nodes.size(); ++q) {
            const double rr = 0.5 * (g.nodes[q] + 1.0);
            acc += 0.5 * g.weights[q] * std::pow(rr, order + d - 1) * phi.radial(rr);
          }
          return acc;
        };
        double prev = radial_integral(8), cur = prev;
        for (int n : {16, 32, 64}) {
          cur = radial_integral(n);
          if (std::abs(cur - prev) <= 1e-11) break;
          prev = cur;
        }
        r.value = sph * cur;
      }
      out.push_back(r);
    }
  }
  return out;
}

RadialFourier::RadialFourier(const std::vector<double>& s_coeffs, int d) : dim_(d) {
  require(d >= 1, "radial fourier: dimension must be >= 1");
  // s^j = (1 - u)^j with u = 1 - s.
  u_coeffs_.assign(s_coeffs.size(), 0.0);
  for (std::size_t j = 0; j < s_coeffs.size(); ++j)
    for (std::size_t i = 0; i <= j; ++i)
      u_coeffs_[i] += s_coeffs[j] * binomial(static_cast<int>(j), static_cast<int>(i)) * ((i % 2) ? -1.0 : 1.0);
}

double RadialFourier::operator()(double norm) const {
  using std::numbers::pi;
  norm = std::abs(norm);
  const double x = pi * norm;
  double total = 0.0;
  for (std::size_t i = 0; i < u_coeffs_.size(); ++i) {
    if (u_coeffs_[i] == 0.0) continue;
    // ∫ (1-|y|^2)_+^δ e^{-2πi y·ξ} dy = Γ(δ+1) π^{-δ} |ξ|^{-d/2-δ} J_{d/2+δ}(2π|ξ|).
    const double delta = static_cast<double>(i);
    const double nu = 0.5 * dim_ + delta;
    double value;
    if (x < 2.0) {
      // Power series of the same expression; no cancellation for small arguments.
      double term = 1.0 / std::tgamma(nu + 1.0), sum = term;
      for (int k = 1; k <= 60; ++k) {
        term *= -x * x / (k * (k + nu));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
      }
      value = std::tgamma(delta + 1.0) * std::pow(pi, 0.5 * dim_) * sum;
    } else {
      value = std::tgamma(delta + 1.0) * std::pow(pi, -delta) * std::pow(norm, -nu) *
              boost::math::cyl_bessel_j(nu, 2.0 * x);
    }
    total += u_coeffs_[i] * value;
  }
  return total;
}

RadialFourier mollifier_fourier(const Mollifier& phi) { return RadialFourier(phi.radial_coeffs, phi.dim); }

RadialFourier vertical_kernel_fourier(const Mollifier& phi) {
  // x·∇ P(|x|^2) = 2 s P'(s).
  const auto& c = phi.radial_coeffs;
  std::vector<double> k(c.size(), 0.0);
  for (std::size_t j = 0; j < c.size(); ++j) k[j] = -(phi.dim + 2.0 * j) * c[j];
  return RadialFourier(k, phi.dim);
}

nlohmann::json to_json(const Mollifier& phi) {
  return {{"dim", phi.dim}, {"m", phi.smoothness_m}, {"k", phi.moment_order_k}, {"psi_coeffs", phi.psi_coeffs}};
}

}  // namespace sobotrace
