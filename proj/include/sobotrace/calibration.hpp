#pragma once
/// Frozen constants for energy bounds whose constants are only known to exist.
///
/// Each constant is twice the largest ratio observed on a fixed reference family
/// (see the measure_* functions, which the `calibrate` command reruns). Tests and the
/// acceptance battery treat the frozen values as hard constants.

#include <vector>

namespace sobotrace {

struct CalibratedConstant {
  int dim;   ///< ambient dimension N
  double p;
  double value;
};

inline constexpr double calibration_safety = 2.0;

/// ‖∇u‖_p^p <= c (b^{1-p} ∫|f+ - f-|^p + |f-|^p + |f+|^p) for u = lift_m1(f-, f+), a = 1/2, b = 1.
inline const std::vector<CalibratedConstant> lift_energy_constants = {
    {2, 1.5, 3.32}, {2, 2.0, 5.71}, {2, 3.0, 17.93},
    {3, 1.5, 3.30}, {3, 2.0, 5.63}, {3, 3.0, 17.51},
};

/// ∫_{cell x (0,b)} |t^{-1} psi_{t a/b} * f|^p <= c |f|^p (order 1 - 1/p, screened at a), a = 1/2, b = 1, N = 2.
inline const std::vector<CalibratedConstant> structure_constants = {
    {2, 1.5, 0.0940}, {2, 2.0, 0.0372}, {2, 3.0, 0.00492},
};

/// Factor on the Neumann energy bound covering the gap between the discrete dual norm of the
/// data and its dictionary lower bound (see measure_neumann_surrogate in pde.hpp). Reference
/// family: flux h- = -1, h+ = 1; h+ = cos(2 pi k x_1); h- = sin, h+ = cos; psi = cos(2 pi k x_1) cos(pi x_N);
/// k in {1, 2, 4, 8} on a 64 x 32 unit strip (N = 2), k <= 3 on 16^2 x 16 (N = 3).
inline const std::vector<CalibratedConstant> neumann_surrogate_constants = {
    {2, 1.5, 4.43}, {2, 2.0, 4.02}, {2, 3.0, 4.17},
    {3, 1.5, 4.39}, {3, 2.0, 4.02}, {3, 3.0, 4.21},
};

/// Throws if (dim, p) was not calibrated.
double lookup_constant(const std::vector<CalibratedConstant>& table, int dim, double p);

/// Reference family for the lift constant: the constant jump f- = 0, f+ = 1 and the
/// single modes f- = sin(2 pi k x_1), f+ = cos(2 pi k x_1), k in {1, 2, 4, 8, 16}, on the
/// unit strip (horizontal shape 128 x 96 for N = 2, 32^2 x 32 for N = 3). Returns the
/// largest energy ratio.
double measure_lift_reference(int dim, double p);

/// Reference family for the structure constant: f = sin(2 pi k x), k in {1, 2, 4, 8, 16},
/// on 128 periodic nodes. Returns the largest ratio.
double measure_structure_reference(double p);

}  // namespace sobotrace
