#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sobotrace/calibration.hpp"
#include "sobotrace/quadrature.hpp"
#include "sobotrace/seminorms.hpp"
#include "sobotrace/tracelift.hpp"
#include "verify/oracles.hpp"

using namespace sobotrace;
using std::numbers::pi;

namespace {

StripDomain unit_strip(int d = 1) {
  return make_strip(make_box(std::vector<double>(d, 0.0), std::vector<double>(d, 1.0), std::vector<bool>(d, true)),
                    0.0, 1.0);
}

SampledField horizontal_mode(const Grid& hg, double k, double phase, bool cosine = false) {
  return sample(
      [=](std::span<const double> x) {
        const double arg = 2 * pi * k * x[0] + phase;
        return cosine ? std::cos(arg) : std::sin(arg);
      },
      hg);
}

double pair_error(const TracePair& a, const TracePair& b, double p) {
  return std::pow(lp_norm_pow(a.f_minus - b.f_minus, p) + lp_norm_pow(a.f_plus - b.f_plus, p), 1.0 / p);
}

}  // namespace

TEST_CASE("cutoff profile plateaus and smoothness") {
  for (int order : {1, 2, 3, 4}) {
    CutoffProfile c{0.25, order};
    CHECK(c(0.0) == 1.0);
    CHECK(c(0.25) == 1.0);
    CHECK(c(0.75) == 0.0);
    CHECK(c(1.0) == 0.0);
    CHECK(c(-1.0) == 1.0);
    CHECK(c(2.0) == 0.0);
    CHECK(std::abs(c(0.5) - 0.5) <= 1e-14);
    double prev = 1.0;
    for (int i = 0; i <= 400; ++i) {
      const double t = i / 400.0;
      CHECK(c(t) <= prev + 1e-15);
      prev = c(t);
      // derivative against a centered difference (order 1 has kinks in S'' at the plateau edges)
      if (t > 0.01 && t < 0.99) {
        const double h = 1e-6;
        CHECK(std::abs(c.derivative(t) - (c(t + h) - c(t - h)) / (2 * h)) <= 1e-5);
      }
    }
    CHECK(c.derivative(0.25) == 0.0);
    CHECK(c.derivative(0.75) == 0.0);
  }
}

TEST_CASE("strip grid layout and trace planes") {
  const StripDomain st = make_strip(make_box({0.0}, {2.0}, {true}), -0.5, 1.0);
  const Grid g = make_strip_grid(st, {16}, 8);
  CHECK(g.nodes(0) == 16);
  CHECK(g.nodes(1) == 9);
  CHECK(strip_of(g).height() == doctest::Approx(1.5));
  const Grid hg = horizontal_grid(g);
  CHECK(hg.dim() == 1);
  CHECK(hg.nodes(0) == 16);

  SampledField u = sample([](std::span<const double> x) { return x[0] + 3 * x[1]; }, g);
  TracePair t = trace_pair(u);
  SampledField expect_lo = sample([](std::span<const double> x) { return x[0] - 1.5; }, hg);
  SampledField expect_hi = sample([](std::span<const double> x) { return x[0] + 3.0; }, hg);
  CHECK((t.f_minus - expect_lo).max_abs() <= 1e-14);
  CHECK((t.f_plus - expect_hi).max_abs() <= 1e-14);
  // linear in x_N: extrapolation is exact
  TracePair e = trace_pair(u, TraceMode::Extrapolated);
  CHECK((e.f_minus - expect_lo).max_abs() <= 1e-13);
  CHECK((e.f_plus - expect_hi).max_abs() <= 1e-13);

  CHECK_THROWS_AS(make_strip(make_box({0.0}, {1.0}, {true}), 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(strip_of(make_grid(make_box({0.0, 0.0}, {1.0, 1.0}, {false, false}), {4, 4})), InvalidArgument);
}

TEST_CASE("first-order trace estimate: equality case and constants") {
  const StripDomain st = unit_strip();
  const Grid g = make_strip_grid(st, {256}, 256);
  SampledField u = sample([](std::span<const double> x) { return x[1] * (1 + 0.5 * std::sin(2 * pi * x[0])); }, g);
  for (double p : {1.5, 2.0, 3.0}) {
    CheckResult r = trace_check_m1(u, p);
    const auto& est1 = r.find("est1");
    CHECK(est1.constant == 1.0);  // b = 1
    CHECK(std::abs(est1.lhs - est1.rhs) <= 0.03 * est1.rhs);
    CHECK(r.pass());
  }
  // both sides equal ∫|w|^2 = 1 + 1/8
  const auto& e2 = trace_check_m1(u, 2.0).find("est1");
  CHECK(std::abs(e2.lhs - 1.125) <= 1e-10);

  CheckResult c = trace_check_m1(SampledField::constant(g, 2.0), 2.0);
  for (const auto& rep : c.reports) {
    CHECK(rep.lhs == 0.0);
    CHECK(rep.rhs == 0.0);
    CHECK(rep.pass);
  }
  CHECK(strip_trace_constant(1, 2.0) == doctest::Approx(9.0 * 2.0 * 4.0));
}

TEST_CASE("first-order trace estimates hold on random strip fields") {
  Rng rng(101);
  const Grid g = make_strip_grid(unit_strip(), {64}, 32);
  for (double p : {1.5, 2.0, 3.0}) {
    for (int trial = 0; trial < 20; ++trial) {
      SampledField u = verify::random_strip_field(g, rng);
      CheckResult r = trace_check_m1(u, p);
      INFO("p = " << p << ", trial " << trial << ": " << r.to_json().dump());
      CHECK(r.pass());
      CHECK(r.find("est1").lhs > 0.0);
    }
  }
}

TEST_CASE("p = 1 trace checks") {
  const Grid g = make_strip_grid(unit_strip(), {128}, 64);
  SampledField lin = sample([](std::span<const double> x) { return x[1] * (1 + 0.5 * std::sin(2 * pi * x[0])); }, g);
  CheckResult eq = trace_check_p1(lin, {0.25});
  const auto& e1 = eq.find("eq1");
  CHECK(std::abs(e1.lhs - e1.rhs) <= 1e-10);

  CheckResult zero = trace_check_p1(SampledField::constant(g, -1.0), {0.25, 0.125});
  for (const auto& rep : zero.reports) CHECK(rep.lhs == 0.0);

  Rng rng(102);
  for (int trial = 0; trial < 5; ++trial) {
    SampledField u = verify::random_strip_field(g, rng);
    CheckResult r = trace_check_p1(u, {0.25, 0.125, 0.0625});
    INFO(r.to_json().dump());
    CHECK(r.pass());
    CHECK(r.info.at("sup_decreasing").get<bool>());
  }
  CHECK_THROWS_AS(trace_check_p1(lin, {2.0}), InvalidArgument);
}

TEST_CASE("first-order lift: constants, linearity and trace recovery") {
  const StripDomain st = unit_strip();
  {
    const Grid g = make_strip_grid(st, {64}, 32);
    const Grid hg = horizontal_grid(g);
    SampledField c = SampledField::constant(hg, 1.75);
    SampledField u = lift_m1({c, c}, g);
    CHECK((u - SampledField::constant(g, 1.75)).max_abs() <= 1e-13);
    CHECK(sobolev_seminorm_pow(u, 1, 2.0) <= 1e-20);
    CHECK_THROWS_AS(lift_m1({c, c}, g, {.a = 0.0}), InvalidArgument);
  }
  {
    Rng rng(103);
    const Grid g = make_strip_grid(st, {64}, 48);
    const Grid hg = horizontal_grid(g);
    SampledField f1 = verify::random_trig_field(hg, rng), f2 = verify::random_trig_field(hg, rng);
    SampledField g1 = verify::random_trig_field(hg, rng), g2 = verify::random_trig_field(hg, rng);
    const double al = 0.7, be = -2.3;
    SampledField lhs = lift_m1({al * f1 + be * g1, al * f2 + be * g2}, g);
    SampledField rhs = al * lift_m1({f1, f2}, g) + be * lift_m1({g1, g2}, g);
    CHECK((lhs - rhs).max_abs() <= 1e-12);
    // boundary planes carry the data exactly
    TracePair t = trace_pair(lift_m1({f1, f2}, g));
    CHECK((t.f_minus - f1).max_abs() == 0.0);
    CHECK((t.f_plus - f2).max_abs() == 0.0);
  }
  {
    const std::vector<int> shapes = {64, 128, 256};
    std::vector<double> errs;
    for (int n : shapes) {
      const Grid g = make_strip_grid(st, {n}, n);
      const Grid hg = horizontal_grid(g);
      TracePair data{horizontal_mode(hg, 1, 0.0), horizontal_mode(hg, 2, 0.0, true)};
      errs.push_back(pair_error(trace_pair(lift_m1(data, g), TraceMode::Extrapolated), data, 2.0));
    }
    CHECK(verify::refinement_order(shapes, errs) >= 0.9);
  }
}

TEST_CASE("first-order lift energy bound with the frozen constant") {
  const Grid g = make_strip_grid(unit_strip(), {128}, 96);
  const Grid hg = horizontal_grid(g);
  Rng rng(104);
  for (double p : {1.5, 2.0, 3.0}) {
    const double c = lookup_constant(lift_energy_constants, 2, p);
    for (int trial = 0; trial < 20; ++trial) {
      TracePair data{verify::random_trig_field(hg, rng), verify::random_trig_field(hg, rng)};
      LiftEnergy e = strip_lift_energy(data, lift_m1(data, g), 0.5, p);
      INFO("p = " << p << " ratio " << e.ratio);
      CHECK(e.energy <= c * (e.jump + e.seminorms + e.seminorm_error));
    }
  }
  CHECK_THROWS_AS(lookup_constant(lift_energy_constants, 2, 2.5), InvalidArgument);
}

TEST_CASE("frozen lift constants reproduce from the reference family") {
  for (double p : {1.5, 2.0, 3.0}) {
    const double measured = measure_lift_reference(2, p);
    const double frozen = lookup_constant(lift_energy_constants, 2, p);
    CHECK(calibration_safety * measured <= frozen);
    CHECK(calibration_safety * measured >= 0.99 * frozen);
  }
}

TEST_CASE("general lift: trivial jets and the linear profile") {
  const StripDomain st = unit_strip();
  const Grid g = make_strip_grid(st, {64}, 64);
  const Grid hg = horizontal_grid(g);
  SampledField zero = SampledField::constant(hg, 0.0), one = SampledField::constant(hg, 1.0);
  {
    SampledField c = SampledField::constant(hg, -0.4);
    SampledField u = lift_general(make_jet({c, zero}, {c, zero}), g);
    CHECK((u - SampledField::constant(g, -0.4)).max_abs() <= 1e-13);
  }
  {
    TraceJet jet = make_jet({zero, one}, {one, one});
    SampledField u = lift_general(jet, g);
    SampledField xn = sample([](std::span<const double> x) { return x[1]; }, g);
    CHECK((u - xn).max_abs() <= 1e-12);
    TraceJet w = wall_jets(u, 2);
    for (int k = 0; k < 2; ++k) {
      CHECK((w.minus[k] - jet.minus[k]).max_abs() <= 1e-9);
      CHECK((w.plus[k] - jet.plus[k]).max_abs() <= 1e-9);
    }
    for (int i = 0; i <= 1; ++i)
      for (int n = 0; i + n <= 1; ++n)
        for (const auto& q : q_polynomial(jet, i, 2, n, 1.0)) CHECK(q.max_abs() <= 1e-10);
  }
  CHECK_THROWS_AS(make_jet({zero}, {zero, zero}), InvalidArgument);
  CHECK_THROWS_AS(lift_general(TraceJet{}, g), InvalidArgument);
}

TEST_CASE("general lift recovers wall jets at first order or better") {
  const StripDomain st = unit_strip();
  const std::vector<int> shapes = {64, 128, 256};
  for (int m : {2, 3}) {
    std::vector<double> errs;
    for (int n : shapes) {
      const Grid g = make_strip_grid(st, {n}, n);
      const Grid hg = horizontal_grid(g);
      std::vector<SampledField> fm, fp;
      for (int k = 0; k < m; ++k) {
        fm.push_back(horizontal_mode(hg, 1, k));
        fp.push_back(horizontal_mode(hg, 2, 0.5 * k, true));
      }
      TraceJet jet = make_jet(fm, fp);
      TraceJet w = wall_jets(lift_general(jet, g), m);
      double e = 0.0;
      for (int k = 0; k < m; ++k) e += lp_norm_pow(w.minus[k] - fm[k], 2) + lp_norm_pow(w.plus[k] - fp[k], 2);
      errs.push_back(std::sqrt(e));
    }
    INFO("m = " << m);
    CHECK(verify::refinement_order(shapes, errs) >= 0.9);
  }
}

TEST_CASE("wall jets of polynomial profiles are exact") {
  const Grid g = make_strip_grid(make_strip(make_box({0.0}, {1.0}, {true}), 0.0, 2.0), {16}, 24);
  SampledField u = sample([](std::span<const double> x) { return 1 + x[1] - 0.5 * x[1] * x[1] + 0.25 * std::pow(x[1], 3); }, g);
  TraceJet j = wall_jets(u, 3);
  // u(2) = 3, u'(2) = 2, u''(2) = 2
  CHECK(std::abs(j.minus[0][0] - 1.0) <= 1e-10);
  CHECK(std::abs(j.minus[1][0] - 1.0) <= 1e-9);
  CHECK(std::abs(j.minus[2][0] + 1.0) <= 1e-8);
  CHECK(std::abs(j.plus[0][3] - 3.0) <= 1e-10);
  CHECK(std::abs(j.plus[1][3] - 2.0) <= 1e-9);
  CHECK(std::abs(j.plus[2][3] - 2.0) <= 1e-8);
}

TEST_CASE("compatibility polynomials") {
  const Grid hg = make_grid(make_box({0.0}, {1.0}, {true}), {32});
  SampledField a = SampledField::constant(hg, 2.0), b = SampledField::constant(hg, 5.0);
  TraceJet jet = make_jet({a}, {b});
  auto q = q_polynomial(jet, 0, 1, 0, 1.0);
  REQUIRE(q.size() == 1);
  CHECK((q[0] - SampledField::constant(hg, 3.0)).max_abs() == 0.0);
  CHECK_THROWS_AS(q_polynomial(jet, 1, 1, 0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(q_polynomial(jet, 0, 2, 0, 1.0), InvalidArgument);

  // m = 2 by hand: Q_{0,2,0} = f0+ - f0- - (f1+ + f1-) h/2, with the horizontal gradient for i = 1
  SampledField s = horizontal_mode(hg, 1, 0.0), c = horizontal_mode(hg, 1, 0.0, true);
  TraceJet j2 = make_jet({s, c}, {c, s});
  auto q0 = q_polynomial(j2, 0, 2, 0, 2.0);
  CHECK((q0[0] - (c - s - (s + c))).max_abs() <= 1e-14);
  auto q1 = q_polynomial(j2, 1, 2, 0, 2.0);
  REQUIRE(q1.size() == 1);
  SampledField dq = sample([](std::span<const double> x) { return -2 * pi * (std::sin(2 * pi * x[0]) + std::cos(2 * pi * x[0])); }, hg);
  CHECK((q1[0] - dq).max_abs() <= 0.1);
}

TEST_CASE("higher-order trace estimates") {
  const StripDomain st = unit_strip();
  {
    // quadratic in x_N with m = 3: the compatibility terms vanish
    const Grid g = make_strip_grid(st, {64}, 64);
    SampledField u = sample([](std::span<const double> x) { return x[1] * x[1] * std::sin(2 * pi * x[0]) + x[1] * std::cos(2 * pi * x[0]); }, g);
    CheckResult r = trace_check_higher(u, 3, 2.0);
    CHECK(r.pass());
    CHECK(r.find("q_0_0").lhs <= 1e-12);
    CHECK(r.find("q_0_1").lhs <= 1e-12);
    CHECK(r.find("q_0_2").lhs <= 1e-12);
  }
  {
    const Grid g = make_strip_grid(st, {128}, 128);
    SampledField u = sample([](std::span<const double> x) { return x[1] * x[1] * (1 + 0.5 * std::cos(2 * pi * x[0])); }, g);
    CheckResult r = trace_check_higher(u, 2, 2.0);
    CHECK(r.pass());
    CHECK(r.find("q_0_0").lhs > 0.0);
  }
  Rng rng(105);
  const Grid g = make_strip_grid(st, {64}, 64);
  for (double p : {1.5, 2.0}) {
    for (int trial = 0; trial < 10; ++trial) {
      SampledField u = verify::random_strip_field(g, rng);
      CheckResult r = trace_check_higher(u, 2, p);
      INFO(r.to_json().dump());
      CHECK(r.pass());
    }
  }
}

TEST_CASE("by-parts identities: exact on polynomials") {
  {
    const Grid g = make_grid(make_box({0.0}, {2.0}), {16});
    ByPartsResult r = by_parts_check(sample([](std::span<const double> x) { return x[0]; }, g), 1);
    CHECK(std::abs(r.lhs - 2.0) <= 1e-12);
    CHECK(std::abs(r.rhs - 2.0) <= 1e-12);
  }
  {
    const Grid g = make_grid(make_box({0.0}, {1.0}), {16});
    ByPartsResult r = by_parts_check(sample([](std::span<const double> x) { return x[0] * x[0]; }, g), 2);
    CHECK(std::abs(r.lhs) <= 1e-12);
    CHECK(std::abs(r.rhs) <= 1e-12);
  }
  // Sample rounding is amplified by h^{-m} in the derivative stencils, so exactness is
  // checked on a coarse grid.
  for (int m = 1; m <= 4; ++m) {
    for (int deg = 0; deg <= m; ++deg) {
      const Grid g = make_grid(make_box({0.0}, {1.3}), {8});
      ByPartsResult r = by_parts_check(
          sample([=](std::span<const double> x) { return std::pow(x[0], deg) - 0.3 * x[0] + 0.1; }, g), m);
      INFO("m = " << m << ", degree " << deg);
      CHECK(r.residual <= 1e-12);
      CHECK(r.taylor_residual <= 1e-12);
    }
  }
  CHECK_THROWS_AS(by_parts_check(SampledField::constant(make_grid(make_box({0.0}, {1.0}), {3}), 1.0), 3),
                  InvalidArgument);
}

TEST_CASE("by-parts identities converge at second order on smooth functions") {
  const std::vector<int> shapes = {64, 128, 256, 512};
  for (int m : {2, 3}) {
    // sin on [0, pi]: both sides of the by-parts identity vanish by symmetry, so the
    // inverted Taylor formula carries the refinement study there
    std::vector<double> taylor, generic;
    for (int n : shapes) {
      const Grid g = make_grid(make_box({0.0}, {pi}), {n});
      ByPartsResult r = by_parts_check(sample([](std::span<const double> x) { return std::sin(x[0]); }, g), m);
      CHECK(std::abs(r.lhs) <= 1e-8);
      CHECK(r.residual <= 1e-8);
      taylor.push_back(r.taylor_residual);
      const Grid g2 = make_grid(make_box({0.0}, {2.0}), {n});
      generic.push_back(by_parts_check(sample([](std::span<const double> x) { return std::sin(x[0]); }, g2), m).residual);
    }
    INFO("m = " << m);
    CHECK(verify::refinement_order(shapes, taylor) >= 1.8);
    CHECK(verify::refinement_order(shapes, generic) >= 1.8);
    CHECK(verify::refinement_order(shapes, generic) <= 2.3);
  }
}

TEST_CASE("convolution structure estimate with the frozen constant") {
  const Grid hg = make_grid(make_box({0.0}, {1.0}, {true}), {128});
  Rng rng(106);
  for (double p : {1.5, 2.0, 3.0}) {
    const double c = lookup_constant(structure_constants, 2, p);
    CHECK(calibration_safety * measure_structure_reference(p) <= c);
    for (int trial = 0; trial < 10; ++trial) {
      StructureResult r = structure_estimate(verify::random_trig_field(hg, rng), 0.5, 1.0, p);
      INFO("p = " << p << " ratio " << r.ratio);
      CHECK(r.lhs <= c * (r.rhs + r.rhs_error));
    }
  }
  // the kernel has zero mean: constants produce nothing
  StructureResult z = structure_estimate(SampledField::constant(hg, 4.0), 0.5, 1.0, 2.0);
  CHECK(z.lhs <= 1e-16);
  CHECK_THROWS_AS(structure_estimate(SampledField::constant(hg, 1.0), 1.0, 0.5, 2.0), InvalidArgument);
}

TEST_CASE("graph domains: flat reductions") {
  const StripDomain st = unit_strip();
  const Grid g = make_strip_grid(st, {64}, 48);
  const Grid hg = horizontal_grid(g);
  GraphDomain flat = make_graph_domain(SampledField::constant(hg, 0.0), SampledField::constant(hg, 1.0));
  CHECK(flat.flat());
  CHECK(flat.lipschitz_L == 0.0);
  Rng rng(107);
  SampledField u = verify::random_strip_field(g, rng);
  CHECK(graph_trace_check(u, flat, 2.0).to_json() == trace_check_m1(u, 2.0).to_json());

  TracePair data{verify::random_trig_field(hg, rng), verify::random_trig_field(hg, rng)};
  CHECK((graph_lift_m1(data, flat, g) - lift_m1(data, g)).max_abs() <= 1e-10);

  FlattenResult fl = flatten(u, flat);
  CHECK((fl.first - u).max_abs() <= 1e-14);
  CHECK((fl.inside - SampledField::constant(g, 1.0)).max_abs() == 0.0);
  CHECK_THROWS_AS(graph_lift_m1(data, flat, g, 1.0), InvalidArgument);
}

TEST_CASE("graph domains: affine flattening and volume preservation") {
  const Grid hg = make_grid(make_box({0.0}, {1.0}, {true}), {32});
  {
    GraphDomain dom = make_graph_domain(SampledField::constant(hg, 0.0), SampledField::constant(hg, 2.0));
    const Grid g = make_graph_grid(dom, 16);
    SampledField u = sample([](std::span<const double> x) { return x[1]; }, g);
    FlattenResult fl = flatten(u, dom, 8);
    CHECK((fl.first - u).max_abs() <= 1e-14);
    SampledField twice = sample([](std::span<const double> x) { return 2 * x[1]; }, fl.reference.grid());
    CHECK((fl.reference - twice).max_abs() <= 1e-14);
    CHECK((fl.jacobian - SampledField::constant(hg, 2.0)).max_abs() == 0.0);
  }
  const Grid hg2 = make_grid(make_box({0.0}, {1.0}, {true}), {128});
  SampledField em = sample([](std::span<const double> x) { return 0.1 * std::cos(2 * pi * x[0]); }, hg2);
  SampledField ep = sample([](std::span<const double> x) { return 1 + 0.25 * std::sin(2 * pi * x[0]); }, hg2);
  GraphDomain dom = make_graph_domain(em, ep);
  CHECK(dom.lipschitz_L == doctest::Approx(0.2 * pi + 0.5 * pi).epsilon(1e-2));
  const Grid g = make_graph_grid(dom, 128);
  SampledField u = sample([](std::span<const double> x) { return std::exp(-4 * (x[1] - 0.5) * (x[1] - 0.5)) * (2 + std::sin(2 * pi * x[0])); }, g);
  FlattenResult fl = flatten(u, dom);
  for (double p : {1.0, 2.0, 3.0}) {
    const double a = graph_integral(u.map([p](double v) { return std::pow(std::abs(v), p); }), dom);
    const double b = flattened_integral(fl.first.map([p](double v) { return std::pow(std::abs(v), p); }), dom);
    CHECK(std::abs(a - b) <= 1e-2 * a);
  }
  // the reference stage integrates against the gap
  const double vol = graph_integral(SampledField::constant(g, 1.0), dom);
  CHECK(std::abs(vol - 1.0) <= 1e-3);
  CHECK(std::abs(integral(fl.jacobian) - vol) <= 1e-3);
}

TEST_CASE("graph domains: trace estimates and lift") {
  const Grid hg = make_grid(make_box({0.0}, {1.0}, {true}), {128});
  SampledField em = SampledField::constant(hg, 0.0);
  SampledField ep = sample([](std::span<const double> x) { return 1 + 0.25 * std::sin(2 * pi * x[0]); }, hg);
  GraphDomain dom = make_graph_domain(em, ep);
  const Grid g = make_graph_grid(dom, 128);
  SampledField bump = sample([](std::span<const double> x) {
    return std::exp(-10 * ((x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5)));
  }, g);
  for (double p : {1.5, 2.0, 3.0}) CHECK(graph_trace_check(bump, dom, p).pass());
  for (const auto& rep : graph_trace_check(SampledField::constant(g, 3.0), dom, 2.0).reports) CHECK(rep.lhs == 0.0);

  SampledField c = SampledField::constant(hg, 0.3);
  CHECK((graph_lift_m1({c, c}, dom, g) - SampledField::constant(g, 0.3)).max_abs() <= 1e-13);

  std::vector<double> errs;
  const std::vector<int> shapes = {64, 128, 256};
  for (int n : shapes) {
    const Grid hgn = make_grid(make_box({0.0}, {1.0}, {true}), {n});
    GraphDomain d = make_graph_domain(SampledField::constant(hgn, 0.0),
                                      sample([](std::span<const double> x) { return 1 + 0.25 * std::sin(2 * pi * x[0]); }, hgn));
    const Grid gn = make_graph_grid(d, n);
    TracePair data{horizontal_mode(hgn, 1, 0.0), 0.5 * horizontal_mode(hgn, 2, 0.0, true)};
    SampledField u = graph_lift_m1(data, d, gn);
    errs.push_back(pair_error(graph_traces(u, d), data, 2.0));
    for (double p : {1.5, 2.0, 3.0}) {
      LiftEnergy e = graph_lift_energy(data, u, d, 0.5, p);
      const double c_p = std::pow(1 + d.lipschitz_L, p) * lookup_constant(lift_energy_constants, 2, p);
      CHECK(e.energy <= c_p * (e.jump + e.seminorms + e.seminorm_error));
    }
  }
  // traces land on the data up to interpolation error
  CHECK(errs.back() <= 1e-6);
  CHECK(errs.back() < errs.front());
}
