#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "sobotrace/common.hpp"
#include "sobotrace/fourier.hpp"
#include "sobotrace/quadrature.hpp"

using namespace sobotrace;
using std::numbers::pi;

namespace {

// Term-by-term integration of the Taylor series of 2(1 - cos(2π c h_1)) over the unit
// ball, using ∫_{S^{d-1}} ω_1^{2k} = β_d (2k-1)!! / (d (d+2) ... (d+2k-2)).
// Reliable for c <= 1 where the alternating terms stay small.
double series_multiplier(double c, double s, int d) {
  double total = 0.0;
  double term = 1.0;    // (2πc)^{2k} / (2k)!
  double sphere = 1.0;  // ∫ ω_1^{2k} / β_d
  for (int k = 1; k <= 60; ++k) {
    term *= (2 * pi * c) * (2 * pi * c) / ((2.0 * k - 1) * (2.0 * k));
    sphere *= (2.0 * k - 1) / (d + 2.0 * k - 2);
    const double t = 2.0 * term * sphere / (2.0 * k - 2.0 * s);
    total += (k % 2 == 1) ? t : -t;
  }
  return sphere_surface(d) * total;
}

}  // namespace

TEST_CASE("multiplier matches the series oracle") {
  for (int d : {1, 2, 3}) {
    for (double s : {0.25, 0.5, 0.75}) {
      for (double c : {0.05, 0.3, 0.5, 1.0}) {
        const double m = multiplier_m_radial(c, s, d);
        const double ref = series_multiplier(c, s, d);
        CAPTURE(d);
        CAPTURE(s);
        CAPTURE(c);
        CHECK(std::abs(m - ref) <= 1e-9 * ref);
      }
    }
  }
}

TEST_CASE("multiplier at high frequency against a direct polar oracle in 2-D") {
  // Composite Gauss-Legendre in the angle and in u = r^{1/5}, which makes the
  // r^{1-2s} = r^{0.2} behaviour at the origin smooth.
  const double s = 0.4, c = 6.0;
  auto radial = [&](double a) {
    return integrate_composite(
        [&](double u) {
          if (u <= 0.0) return 0.0;
          const double r = std::pow(u, 5);
          const double v = std::sin(pi * r * a) / r;
          return 4.0 * v * v * u * 5.0 * std::pow(u, 4);
        },
        0.0, 1.0, 64, 16);
  };
  const double ref = 4.0 * integrate_composite([&](double t) { return radial(c * std::cos(t)); }, 0.0, 0.5 * pi, 24, 16);
  const double m = multiplier_m_radial(c, s, 2);
  CHECK(std::abs(m - ref) <= 1e-7 * ref);
}

TEST_CASE("multiplier examples") {
  double zero[2] = {0.0, 0.0};
  CHECK(multiplier_m(zero, 0.5).m_value == 0.0);
  double a[2] = {0.7, -1.3}, b[2] = {-0.7, 1.3}, c[2] = {1.3, 0.7};
  const double ma = multiplier_m(a, 0.3).m_value;
  CHECK(std::abs(multiplier_m(b, 0.3).m_value - ma) <= 1e-12 * ma);
  CHECK(std::abs(multiplier_m(c, 0.3).m_value - ma) <= 1e-12 * ma);

  // d = 1, s = 1/2, xi = 1: 8 ∫_0^1 sin^2(πh)/h^2 dh by an adaptive quadrature of the original form.
  double one[1] = {1.0};
  const double ref = 8.0 * integrate_adaptive(
                               [](double h) {
                                 const double v = std::sin(pi * h);
                                 return h == 0.0 ? pi * pi : v * v / (h * h);
                               },
                               0.0, 1.0, 1e-13);
  CHECK(std::abs(multiplier_m(one, 0.5).m_value - ref) <= 1e-6 * ref);
  CHECK_THROWS_AS(multiplier_m(one, 1.0), InvalidArgument);
}

TEST_CASE("multiplier is nondecreasing along rays") {
  for (int d : {1, 2}) {
    double prev = 0.0;
    for (double c = 0.1; c <= 8.0; c *= 1.3) {
      const double m = multiplier_m_radial(c, 0.4, d);
      CHECK(m >= prev);
      prev = m;
    }
  }
}

TEST_CASE("two-sided multiplier bounds") {
  const std::vector<double> norms = {0.0, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  for (int d : {1, 2}) {
    for (double s : {0.25, 0.5, 0.75}) {
      MultiplierBoundsResult r = multiplier_bounds_check(s, d, norms);
      CHECK(r.pass);
      CHECK(r.rows.size() == norms.size() - 1);
      CHECK(r.c3 == doctest::Approx(pi * pi * (sphere_surface(d) / d) / (2 - 2 * s)));
      CHECK(r.c1 < r.c2);
    }
  }
  MultiplierBoundsResult r = multiplier_bounds_check(0.5, 1, {0.1, 1.0});
  std::ostringstream csv;
  write_multiplier_csv(r, csv);
  const std::string text = csv.str();
  CHECK(text.rfind("norm,m,lower,upper\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("Plancherel identity for the screened seminorm") {
  Grid g = make_grid(make_box({0.0}, {1.0}, {true}), {512});
  SampledField c = SampledField::constant(g, 2.0);
  PlancherelResult z = seminorm_plancherel_check(c, 0.5);
  CHECK(z.direct == 0.0);
  CHECK(z.spectral == doctest::Approx(0.0).epsilon(1e-20));

  SampledField cosf = sample([](std::span<const double> x) { return std::cos(2 * pi * x[0]); }, g);
  PlancherelResult r = seminorm_plancherel_check(cosf, 0.5);
  const double m1 = multiplier_m_radial(1.0, 0.5, 1);
  CHECK(std::abs(r.spectral - m1 / 2) <= 1e-10 * m1);
  CHECK(r.relative_discrepancy <= 1e-2);

  // Periodized Gaussian on a cell of side 4.
  Grid g4 = make_grid(make_box({0.0}, {4.0}, {true}), {512});
  auto bump = [](std::span<const double> x) {
    double v = 0.0;
    for (int j = -2; j <= 2; ++j) v += std::exp(-(x[0] - 2.0 + 4.0 * j) * (x[0] - 2.0 + 4.0 * j) / 0.5);
    return v;
  };
  CHECK(seminorm_plancherel_check(sample(bump, g4), 0.5).relative_discrepancy <= 1e-2);

  Grid line = make_grid(make_box({0.0}, {1.0}), {16});
  CHECK_THROWS_AS(seminorm_plancherel_check(SampledField::constant(line, 1.0), 0.5), InvalidArgument);
}

TEST_CASE("Plancherel discrepancy decreases under refinement") {
  std::vector<double> lh, le;
  for (int n : {32, 64, 128}) {
    Grid g = make_grid(make_box({0.0, 0.0}, {1.0, 1.0}, {true, true}), {n, n});
    SampledField f = sample(
        [](std::span<const double> x) { return std::sin(2 * pi * x[0]) * std::cos(2 * pi * x[1]) + 0.3 * std::cos(4 * pi * x[0]); },
        g);
    PlancherelResult r = seminorm_plancherel_check(f, 0.5);
    lh.push_back(std::log(1.0 / n));
    le.push_back(std::log(r.relative_discrepancy));
  }
  CHECK(fit_slope(lh, le) >= 1.0);
}
