#pragma once
/// Quadrature rules and geometric constants shared by the numerical modules.

#include <functional>
#include <vector>

namespace sobotrace {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Supported orders: 1..10, 12, 16, 20, 24, 32, 40, 48, 64.
const GaussRule& gauss_legendre(int n);

/// Volume of the unit ball in R^d (alpha_d).
double unit_ball_volume(int d);
/// Surface measure of the unit sphere S^{d-1} in R^d (beta_d); beta_1 = 2.
double sphere_surface(int d);

/// Adaptive Gauss-Kronrod on a finite interval.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-12, double* error = nullptr);

/// Double-exponential quadrature, tolerant of integrable endpoint singularities.
double integrate_singular(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-12, double* error = nullptr);

/// Composite Gauss-Legendre with `panels` equal panels of order `order`.
double integrate_composite(const std::function<double(double)>& f, double a, double b,
                           int panels, int order);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace sobotrace
