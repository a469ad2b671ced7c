#include <cmath>
#include <functional>
#include <numbers>
#include <tuple>

#include "doctest.h"
#include "sobotrace/common.hpp"
#include "sobotrace/mollifiers.hpp"
#include "sobotrace/quadrature.hpp"
#include "verify/oracles.hpp"

using namespace sobotrace;
using std::numbers::pi;

using verify::monomial;

TEST_CASE("mollifier mass and vanishing moments against the quadrature oracle") {
  struct Case {
    int d, k, m;
    double tol;
  };
  for (Case c : {Case{1, 1, 2, 1e-10}, Case{1, 2, 2, 1e-10}, Case{2, 4, 3, 1e-9}, Case{2, 2, 2, 1e-9}}) {
    Mollifier phi = build_moment_mollifier(c.d, c.k, c.m);
    for (int order = 0; order <= c.k; ++order)
      for (const auto& alpha : multi_indices(c.d, order)) {
        const double v = verify::ball_integral_oracle(c.d, [&](std::span<const double> x) { return monomial(alpha, x) * phi(x); });
        CHECK(std::abs(v - (order == 0 ? 1.0 : 0.0)) <= c.tol);
      }
    for (const auto& r : moment_residuals(phi, c.k)) CHECK(std::abs(r.value - r.expected) <= 1e-9);
  }
}

TEST_CASE("mollifier is supported in the unit ball, radial, and C^m at the boundary") {
  Mollifier phi = build_moment_mollifier(2, 2, 2);
  double out[2] = {0.8, 0.7};
  CHECK(phi(out) == 0.0);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    double x[2] = {rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7)};
    double y[2] = {-x[1], x[0]};
    double z[2] = {x[1], -x[0]};
    CHECK(phi(x) == phi(y));
    CHECK(phi(x) == phi(z));
    CHECK(phi.profile.evaluate(x) == doctest::Approx(phi(x)).epsilon(1e-12));
  }
  // (1 - s)^{m+1} factor: derivatives up to order m vanish at r = 1.
  Polynomial p = phi.profile;
  double edge[2] = {1.0, 0.0};
  for (int k = 0; k <= phi.smoothness_m; ++k) {
    CHECK(std::abs(p.evaluate(edge)) < 1e-9);
    p = p.derivative(0);
  }
}

TEST_CASE("eval_scaled") {
  Mollifier phi = build_moment_mollifier(1, 2, 2);
  double x[1] = {0.15};
  CHECK(eval_scaled(phi, 0.1, x) == 0.0);
  CHECK_THROWS_AS(eval_scaled(phi, 0.0, x), InvalidArgument);
  double y[1] = {0.3};
  CHECK(eval_scaled(phi, 1.0, y) == phi(y));
  for (double eps : {0.1, 0.2}) {
    const int n = 20000;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      double p[1] = {-1.0 + 2.0 * i / n};
      acc += (i == 0 || i == n ? 0.5 : 1.0) * eval_scaled(phi, eps, p);
    }
    CHECK(std::abs(acc * 2.0 / n - 1.0) < 1e-6);
  }
}

TEST_CASE("derivative kernels have zero mean") {
  for (auto [d, m] : {std::pair{1, 2}, std::pair{2, 2}, std::pair{1, 3}}) {
    Mollifier phi = build_moment_mollifier(d, m, m);
    DerivativeKernel k0 = derivative_kernel(phi, MultiIndex(d + 1, 0));
    double x[2] = {0.3, 0.1};
    CHECK(k0(x) == doctest::Approx(phi(x)));
    for (int order = 1; order <= m; ++order)
      for (const auto& alpha : multi_indices(d + 1, order)) {
        DerivativeKernel k = derivative_kernel(phi, alpha);
        const double mean = verify::ball_integral_oracle(d, [&](std::span<const double> y) { return k(y); });
        CHECK(std::abs(mean) <= 1e-9);
        CHECK(std::abs(ball_integral(k.poly)) <= 1e-9);
      }
    CHECK_THROWS_AS(derivative_kernel(phi, [&] { MultiIndex a(d + 1, 0); a[0] = m + 1; return a; }()), InvalidArgument);
  }
}

TEST_CASE("derivative kernels satisfy the scaling identity against finite differences") {
  // F(x', x_N) = x_N^{-d} phi((x' - y') / x_N); ∂^α F = x_N^{-(|α|+d)} psi^α((x' - y') / x_N).
  for (int d : {1, 2}) {
    Mollifier phi = build_moment_mollifier(d, 2, 2);
    Rng rng(17 + d);
    for (int order = 1; order <= 2; ++order)
      for (const auto& alpha : multi_indices(d + 1, order)) CHECK(verify::kernel_scaling_error(phi, alpha, rng) <= 1e-4);
  }
}

TEST_CASE("mollifier argument validation") {
  CHECK_THROWS_AS(build_moment_mollifier(0, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(build_moment_mollifier(1, 0, 1), InvalidArgument);
  CHECK_THROWS_AS(build_moment_mollifier(1, 1, 0), InvalidArgument);
  auto j = to_json(build_moment_mollifier(1, 2, 2));
  CHECK(j["psi_coeffs"].size() == 2);
}

namespace {

// Hankel-type oracle: |S^{d-1}| ∫_0^1 r^{d-1} k(r) mean_{S^{d-1}} cos(2π ρ r ω_1) dr, with the
// sphere mean written out per dimension (cos t, J_0(t), sin t / t).
double oracle_radial_transform(int d, const std::function<double(double)>& k, double rho) {
  auto mean = [d](double t) {
    if (d == 1) return std::cos(t);
    if (d == 2) return std::cyl_bessel_j(0.0, t);
    return t == 0.0 ? 1.0 : std::sin(t) / t;
  };
  const int panels = 8 + static_cast<int>(4 * rho);
  return sphere_surface(d) *
         integrate_composite([&](double r) { return std::pow(r, d - 1) * k(r) * mean(2 * pi * rho * r); }, 0.0, 1.0,
                             panels, 16);
}

}  // namespace

TEST_CASE("closed-form mollifier transform matches the radial quadrature oracle") {
  for (auto [d, k, m] : {std::tuple{1, 1, 1}, {1, 2, 2}, {2, 2, 2}, {2, 4, 3}, {3, 3, 2}}) {
    const Mollifier phi = build_moment_mollifier(d, k, m);
    const RadialFourier ft = mollifier_fourier(phi);
    const RadialFourier vt = vertical_kernel_fourier(phi);
    MultiIndex en(d + 1, 0);
    en[d] = 1;
    const DerivativeKernel psi = derivative_kernel(phi, en);
    auto psi_radial = [&](double r) {
      std::vector<double> y(d, 0.0);
      y[0] = r;
      return psi(y);
    };
    CHECK(ft(0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(vt(0.0)) <= 1e-10);
    for (double rho : {0.1, 0.5, 0.63, 0.7, 1.3, 3.0, 7.5}) {
      CAPTURE(d);
      CAPTURE(rho);
      const double ref = oracle_radial_transform(d, [&](double r) { return phi.radial(r); }, rho);
      CHECK(std::abs(ft(rho) - ref) <= 1e-11);
      const double vref = oracle_radial_transform(d, psi_radial, rho);
      CHECK(std::abs(vt(rho) - vref) <= 1e-10);
    }
  }
}

TEST_CASE("transform of the moment mollifier is flat to the moment order") {
  // 1 - phî(ρ) = O(ρ^{k+1}) (the first nonvanishing even moment is of order k+1 or k+2).
  const Mollifier phi = build_moment_mollifier(2, 4, 3);
  const RadialFourier ft = mollifier_fourier(phi);
  const double e1 = std::abs(1.0 - ft(0.02)), e2 = std::abs(1.0 - ft(0.04));
  CHECK(std::log2(e2 / e1) >= 5.5);
}
