#pragma once
/// Uniform tensor grids, sampled fields, finite-difference jets and L^p norms.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace sobotrace {

using MultiIndex = std::vector<int>;
using PointFunction = std::function<double(std::span<const double>)>;

constexpr int kMaxDim = 4;

/// Axis-aligned box; periodic axes are identified end to end.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<bool> periodic;

  int dim() const { return static_cast<int>(lo.size()); }
  double extent(int axis) const { return hi[axis] - lo[axis]; }
  bool operator==(const Box&) const = default;
};

/// Validating constructor; an empty periodic vector means all axes non-periodic.
Box make_box(std::vector<double> lo, std::vector<double> hi, std::vector<bool> periodic = {});

/// Uniform grid over a box. A periodic axis with shape n carries n nodes (node n is
/// node 0); a non-periodic axis carries n + 1 nodes including both endpoints.
/// Node storage is row-major with the last axis fastest.
class Grid {
 public:
  Grid() = default;
  Grid(Box box, std::vector<int> shape);

  int dim() const { return box_.dim(); }
  const Box& box() const { return box_; }
  const std::vector<int>& shape() const { return shape_; }
  const std::vector<double>& spacing() const { return spacing_; }
  bool periodic(int axis) const { return box_.periodic[axis]; }
  int nodes(int axis) const { return nodes_[axis]; }
  std::size_t stride(int axis) const { return strides_[axis]; }
  std::size_t node_count() const { return count_; }

  std::size_t index(std::span<const int> multi) const;
  void multi_index(std::size_t idx, std::span<int> out) const;
  int axis_index(std::size_t idx, int axis) const {
    return static_cast<int>((idx / strides_[axis]) % nodes_[axis]);
  }
  double coordinate(int axis, int i) const { return box_.lo[axis] + i * spacing_[axis]; }
  void point(std::size_t idx, std::span<double> out) const;
  std::vector<double> point(std::size_t idx) const;

  /// Trapezoid weight of one node along one axis (full weight on periodic axes).
  double axis_weight(int axis, int i) const;
  /// Product trapezoid weight of a node.
  double weight(std::size_t idx) const;
  std::vector<double> weights() const;
  /// Sum of trapezoid weights = measure of the box.
  double volume() const;

  bool can_subsample(int factor) const;
  Grid subsampled(int factor) const;

  bool operator==(const Grid& o) const { return box_ == o.box_ && shape_ == o.shape_; }

 private:
  Box box_;
  std::vector<int> shape_;
  std::vector<double> spacing_;
  std::vector<int> nodes_;
  std::vector<std::size_t> strides_;
  std::size_t count_ = 0;
};

Grid make_grid(const Box& box, const std::vector<int>& shape);

/// Immutable-by-convention field of finite node values on a grid.
class SampledField {
 public:
  SampledField() = default;
  SampledField(Grid grid, std::vector<double> values);
  static SampledField constant(const Grid& grid, double c);

  const Grid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Multilinear interpolation; periodic axes wrap, others clamp to the box.
  /// Multilinear interpolation of (values - offset); constants minus themselves give exactly 0.
  double interpolate(std::span<const double> x, double offset = 0.0) const;

  SampledField operator+(const SampledField& o) const;
  SampledField operator-(const SampledField& o) const;
  SampledField operator*(double c) const;
  SampledField map(const std::function<double(double)>& fn) const;
  SampledField subsampled(int factor) const;

  double max_abs() const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

inline SampledField operator*(double c, const SampledField& f) { return f * c; }

/// Evaluates f at every node; a non-finite value is an error naming the node.
SampledField sample(const PointFunction& f, const Grid& grid);

/// Derivatives ∂^α for all |α| <= order, with ∇^0 u = u.
struct JetField {
  int order = 0;
  SampledField base;
  std::map<MultiIndex, SampledField> derivatives;

  const SampledField& at(const MultiIndex& alpha) const;
};

/// All multi-indices of the given dimension and total order, lexicographic.
std::vector<MultiIndex> multi_indices(int dim, int order);

/// Finite-difference weights (Fornberg) for the derivative of order k at x0
/// from values at the given nodes.
std::vector<double> fd_weights(const std::vector<double>& nodes, double x0, int k);

/// One-axis derivative of order k, second-order accurate: central stencils in the
/// interior and on periodic axes, shifted (k+2)-point stencils near boundaries.
SampledField partial_derivative(const SampledField& u, int axis, int k);

/// ∂^α u by composing one-axis derivatives.
SampledField derivative(const SampledField& u, const MultiIndex& alpha);

/// Jet of all derivatives through order m.
/// Requires at least 2m+1 nodes on every non-periodic axis.
JetField gradient_m(const SampledField& u, int m);

/// Pointwise Euclidean length of ∇^k u (each multi-index counted once).
SampledField gradient_magnitude(const SampledField& u, int k);

/// Trapezoid integral of the field.
double integral(const SampledField& u);
/// Trapezoid approximation of ∫|u|^p (the p-th power of the norm).
double lp_norm_pow(const SampledField& u, double p);
double lp_norm(const SampledField& u, double p);

/// Binary field format: one line of JSON header, then little-endian float64 values.
void write_field(std::ostream& out, const SampledField& f);
SampledField read_field(std::istream& in);
void write_field_file(const std::string& path, const SampledField& f);
SampledField read_field_file(const std::string& path);
/// CSV with columns x0..x{d-1},value.
void write_field_csv(std::ostream& out, const SampledField& f);

/// Warns when data on a periodic axis is not contained in the cell with one
/// support diameter of margin. Returns true when the margin is sufficient.
bool check_support_margin(const SampledField& f, double threshold = 1e-12);

}  // namespace sobotrace
