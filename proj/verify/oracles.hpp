#pragma once
/// Independent reference computations and random-input generators used by the
/// unit tests, the acceptance battery and the CLI suite. Nothing in the core
/// library depends on this module.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sobotrace/common.hpp"
#include "sobotrace/fields.hpp"
#include "sobotrace/mollifiers.hpp"
#include "sobotrace/pde.hpp"
#include "sobotrace/seminorms.hpp"

namespace sobotrace::verify {

/// Random trigonometric polynomial with modes |k_a| <= max_mode on each axis,
/// amplitudes decaying like 1/(1+|k|^2). Smooth and periodic on periodic axes.
SampledField random_trig_field(const Grid& g, Rng& rng, int max_mode = 3);

/// Random smooth field on a grid whose last axis is vertical and non-periodic: products of
/// horizontal trigonometric modes (|k_a| <= max_mode) with vertical profiles
/// cos(pi j t + phase), t in [0, 1] across the box, j = 0..3. Wall values differ.
SampledField random_strip_field(const Grid& g, Rng& rng, int max_mode = 2);

/// Sum of a few smooth compact bumps (C^2, support radius `radius`) placed inside
/// the box, keeping their supports away from non-periodic boundaries.
SampledField random_bump_field(const Grid& g, Rng& rng, int bumps = 2, double radius = 0.25);

/// Direct double Riemann sum over all node pairs (diagonal excluded), with periodic
/// images on periodic axes: sum_x sum_{y != x, |y-x| < sigma(x)} w_x w_y |f(y)-f(x)|^p / |y-x|^{sp+N}.
/// Returns the p-th power.
double brute_force_seminorm_pow(const SampledField& f, const ScreeningFunction& sigma, double s, double p);

/// Integral over the unit ball of R^d, d in {1, 2}: composite Gauss-Legendre on [-1, 1]
/// for d = 1, polar coordinates (Gauss-Legendre in r, 64-point trapezoid in the angle) for
/// d = 2. The panel count doubles until two refinements agree to 1e-11.
double ball_integral_oracle(int d, const std::function<double(std::span<const double>)>& integrand);

/// x^alpha.
double monomial(const MultiIndex& alpha, std::span<const double> x);

/// Largest relative deviation, over `trials` random points with |z| < 0.8, between nested
/// central differences (step 1e-4) of F(x', x_N) = x_N^{-d} phi((x' - y') / x_N) and the
/// scaling identity x_N^{-(|alpha|+d)} psi^alpha((x' - y') / x_N). The relative scale is
/// floored at 1e-2 x_N^{-(|alpha|+d)}.
double kernel_scaling_error(const Mollifier& phi, const MultiIndex& alpha, Rng& rng, int trials = 100);

/// Least-squares slope of log(error) against log(1/n): the observed convergence order.
double refinement_order(const std::vector<int>& shapes, const std::vector<double>& errors);

/// Model Lagrangian with a random smooth weight in [1 - spread, 1 + spread] (spread <= 0.5)
/// and, when `with_drift`, a random smooth drift of size about 0.5.
AdmissibleLagrangian random_model_lagrangian(const Grid& g, double p, Rng& rng, bool with_drift);

/// Random smooth Dirichlet data on the horizontal grid of a strip grid.
TracePair random_dirichlet_data(const Grid& g, Rng& rng);

/// Random smooth Neumann data made compatible by shifting psi by a constant.
NeumannData random_neumann_data(const Grid& g, Rng& rng);

}  // namespace sobotrace::verify
