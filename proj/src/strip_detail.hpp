#pragma once
// Column access for grids whose last axis is vertical (stride 1).

#include <optional>

#include "sobotrace/fields.hpp"

namespace sobotrace::detail {

struct Columns {
  std::size_t count = 0;  ///< horizontal nodes
  int nv = 0;             ///< vertical nodes
  double lo = 0.0, dz = 0.0;
};

Columns columns_of(const Grid& g);

/// Linear interpolation in a column; positions within 1e-9 cells of a node return the node value.
double column_value(const double* col, const Columns& c, double z);

/// ∫_a^b of the piecewise-linear interpolant of a column (a, b clamped to the column).
double column_integral(const double* col, const Columns& c, double a, double b);

/// Horizontal plane j of a field on a grid with vertical last axis.
SampledField plane(const SampledField& u, const Grid& horizontal, int j);

/// u on the grid with every shape halved, when that grid keeps at least
/// `min_vertical_nodes` vertical nodes.
std::optional<SampledField> coarse_copy(const SampledField& u, int min_vertical_nodes);

}  // namespace sobotrace::detail
