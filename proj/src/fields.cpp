#include "sobotrace/fields.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "sobotrace/common.hpp"

namespace sobotrace {

Box make_box(std::vector<double> lo, std::vector<double> hi, std::vector<bool> periodic) {
  require(!lo.empty() && lo.size() == hi.size(), "box: lo and hi must have equal nonzero length");
  require(static_cast<int>(lo.size()) <= kMaxDim, "box: dimension exceeds " + std::to_string(kMaxDim));
  if (periodic.empty()) periodic.assign(lo.size(), false);
  require(periodic.size() == lo.size(), "box: periodic flags length mismatch");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    require(std::isfinite(lo[i]) && std::isfinite(hi[i]), "box: non-finite bound");
    require(lo[i] < hi[i], "box: degenerate axis " + std::to_string(i) + " (lo >= hi)");
  }
  return Box{std::move(lo), std::move(hi), std::move(periodic)};
}

Grid::Grid(Box box, std::vector<int> shape) : box_(std::move(box)), shape_(std::move(shape)) {
  box_ = make_box(box_.lo, box_.hi, box_.periodic);
  require(static_cast<int>(shape_.size()) == box_.dim(), "grid: shape length must match box dimension");
  const int d = box_.dim();
  spacing_.resize(d);
  nodes_.resize(d);
  strides_.resize(d);
  for (int i = 0; i < d; ++i) {
    require(shape_[i] >= 2, "grid: shape entries must be >= 2");
    spacing_[i] = box_.extent(i) / shape_[i];
    nodes_[i] = box_.periodic[i] ? shape_[i] : shape_[i] + 1;
  }
  std::size_t s = 1;
  for (int i = d - 1; i >= 0; --i) {
    strides_[i] = s;
    s *= static_cast<std::size_t>(nodes_[i]);
  }
  count_ = s;
}

Grid make_grid(const Box& box, const std::vector<int>& shape) { return Grid(box, shape); }

std::size_t Grid::index(std::span<const int> multi) const {
  std::size_t idx = 0;
  for (int a = 0; a < dim(); ++a) idx += static_cast<std::size_t>(multi[a]) * strides_[a];
  return idx;
}

void Grid::multi_index(std::size_t idx, std::span<int> out) const {
  for (int a = 0; a < dim(); ++a) out[a] = axis_index(idx, a);
}

void Grid::point(std::size_t idx, std::span<double> out) const {
  for (int a = 0; a < dim(); ++a) out[a] = coordinate(a, axis_index(idx, a));
}

std::vector<double> Grid::point(std::size_t idx) const {
  std::vector<double> x(dim());
  point(idx, x);
  return x;
}

double Grid::axis_weight(int axis, int i) const {
  if (periodic(axis)) return spacing_[axis];
  return (i == 0 || i == shape_[axis]) ? 0.5 * spacing_[axis] : spacing_[axis];
}

double Grid::weight(std::size_t idx) const {
  double w = 1.0;
  for (int a = 0; a < dim(); ++a) w *= axis_weight(a, axis_index(idx, a));
  return w;
}

std::vector<double> Grid::weights() const {
  std::vector<double> w(count_);
  for (std::size_t i = 0; i < count_; ++i) w[i] = weight(i);
  return w;
}

double Grid::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) v *= box_.extent(a);
  return v;
}

bool Grid::can_subsample(int factor) const {
  for (int a = 0; a < dim(); ++a)
    if (shape_[a] % factor != 0 || shape_[a] / factor < 2) return false;
  return true;
}

Grid Grid::subsampled(int factor) const {
  require(can_subsample(factor), "grid: shape not divisible by subsampling factor");
  std::vector<int> s(shape_);
  for (int& v : s) v /= factor;
  return Grid(box_, s);
}

SampledField::SampledField(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  require(values_.size() == grid_.node_count(), "field: value count does not match grid node count");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      std::ostringstream msg;
      msg << "field: non-finite value at node " << i << " (";
      auto x = grid_.point(i);
      for (std::size_t a = 0; a < x.size(); ++a) msg << (a ? ", " : "") << x[a];
      msg << ")";
      throw InvalidArgument(msg.str());
    }
  }
}

SampledField SampledField::constant(const Grid& grid, double c) {
  return SampledField(grid, std::vector<double>(grid.node_count(), c));
}

double SampledField::interpolate(std::span<const double> x, double offset) const {
  const int d = grid_.dim();
  int i0[kMaxDim], i1[kMaxDim];
  double fr[kMaxDim];
  for (int a = 0; a < d; ++a) {
    const double h = grid_.spacing()[a];
    double t = (x[a] - grid_.box().lo[a]) / h;
    if (grid_.periodic(a)) {
      const int n = grid_.nodes(a);
      double fl = std::floor(t);
      double f = t - fl;
      long k = static_cast<long>(fl) % n;
      if (k < 0) k += n;
      i0[a] = static_cast<int>(k);
      i1[a] = (i0[a] + 1) % n;
      fr[a] = f;
    } else {
      const int n = grid_.shape()[a];
      t = std::clamp(t, 0.0, static_cast<double>(n));
      int k = std::min(static_cast<int>(t), n - 1);
      i0[a] = k;
      i1[a] = k + 1;
      fr[a] = t - k;
    }
  }
  double acc = 0.0;
  const int corners = 1 << d;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t idx = 0;
    for (int a = 0; a < d; ++a) {
      const bool hi = (c >> a) & 1;
      w *= hi ? fr[a] : 1.0 - fr[a];
      idx += static_cast<std::size_t>(hi ? i1[a] : i0[a]) * grid_.stride(a);
    }
    if (w != 0.0) acc += w * (values_[idx] - offset);
  }
  return acc;
}

SampledField SampledField::operator+(const SampledField& o) const {
  require(grid_ == o.grid_, "field: grid mismatch in sum");
  std::vector<double> v(values_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.values_[i];
  return SampledField(grid_, std::move(v));
}

SampledField SampledField::operator-(const SampledField& o) const {
  require(grid_ == o.grid_, "field: grid mismatch in difference");
  std::vector<double> v(values_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.values_[i];
  return SampledField(grid_, std::move(v));
}

SampledField SampledField::operator*(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= c;
  return SampledField(grid_, std::move(v));
}

SampledField SampledField::map(const std::function<double(double)>& fn) const {
  std::vector<double> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(values_[i]);
  return SampledField(grid_, std::move(v));
}

SampledField SampledField::subsampled(int factor) const {
  Grid g = grid_.subsampled(factor);
  std::vector<double> v(g.node_count());
  std::vector<int> m(g.dim());
  for (std::size_t i = 0; i < v.size(); ++i) {
    g.multi_index(i, m);
    for (int& k : m) k *= factor;
    v[i] = values_[grid_.index(m)];
  }
  return SampledField(g, std::move(v));
}

double SampledField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

SampledField sample(const PointFunction& f, const Grid& grid) {
  std::vector<double> v(grid.node_count());
  std::vector<double> x(grid.dim());
  for (std::size_t i = 0; i < v.size(); ++i) {
    grid.point(i, x);
    v[i] = f(x);
  }
  return SampledField(grid, std::move(v));
}

const SampledField& JetField::at(const MultiIndex& alpha) const {
  auto it = derivatives.find(alpha);
  require(it != derivatives.end(), "jet: requested derivative not present");
  return it->second;
}

std::vector<MultiIndex> multi_indices(int dim, int order) {
  std::vector<MultiIndex> out;
  MultiIndex cur(dim, 0);
  std::function<void(int, int)> rec = [&](int axis, int left) {
    if (axis == dim - 1) {
      cur[axis] = left;
      out.push_back(cur);
      return;
    }
    for (int k = left; k >= 0; --k) {
      cur[axis] = k;
      rec(axis + 1, left - k);
    }
  };
  if (dim == 0) return out;
  rec(0, order);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> fd_weights(const std::vector<double>& x, double x0, int k) {
  // Fornberg's recursion for arbitrarily spaced nodes.
  const int n = static_cast<int>(x.size());
  require(n > k, "fd_weights: need more nodes than the derivative order");
  std::vector<std::vector<double>> c(n, std::vector<double>(k + 1, 0.0));
  double c1 = 1.0, c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, k);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int q = mn; q >= 1; --q) c[i][q] = c1 * (q * c[i - 1][q - 1] - c5 * c[i - 1][q]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int q = mn; q >= 1; --q) c[j][q] = (c4 * c[j][q] - q * c[j][q - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][k];
  return w;
}

namespace {

struct Stencil {
  std::vector<int> offsets;
  std::vector<double> weights;
};

Stencil make_stencil(int first, int count, int at, int k, double h) {
  std::vector<double> nodes(count);
  Stencil s;
  for (int q = 0; q < count; ++q) {
    nodes[q] = first + q;
    s.offsets.push_back(first + q - at);
  }
  s.weights = fd_weights(nodes, at, k);
  const double scale = std::pow(h, -k);
  for (double& w : s.weights) w *= scale;
  return s;
}

}  // namespace

SampledField partial_derivative(const SampledField& u, int axis, int k) {
  const Grid& g = u.grid();
  require(axis >= 0 && axis < g.dim(), "partial_derivative: axis out of range");
  require(k >= 0, "partial_derivative: negative order");
  if (k == 0) return u;
  const int n = g.nodes(axis);
  const double h = g.spacing()[axis];
  const int r = (k + 1) / 2;
  std::vector<Stencil> per_node;
  if (g.periodic(axis)) {
    require(n >= 2 * r + 1, "partial_derivative: too few periodic nodes for the stencil");
    per_node.push_back(make_stencil(-r, 2 * r + 1, 0, k, h));
  } else {
    const int wide = k + 2;
    require(n >= wide, "partial_derivative: too few nodes on a non-periodic axis");
    per_node.resize(n);
    for (int i = 0; i < n; ++i) {
      if (i - r >= 0 && i + r <= n - 1)
        per_node[i] = make_stencil(i - r, 2 * r + 1, i, k, h);
      else if (i - r < 0)
        per_node[i] = make_stencil(0, wide, i, k, h);
      else
        per_node[i] = make_stencil(n - wide, wide, i, k, h);
    }
  }
  const std::size_t stride = g.stride(axis);
  const auto& in = u.values();
  std::vector<double> out(in.size());
  const bool per = g.periodic(axis);
  parallel_chunks(in.size(), [&](int, std::size_t b, std::size_t e) {
    for (std::size_t idx = b; idx < e; ++idx) {
      const int j = g.axis_index(idx, axis);
      const std::size_t base = idx - static_cast<std::size_t>(j) * stride;
      const Stencil& s = per ? per_node[0] : per_node[j];
      double acc = 0.0;
      for (std::size_t q = 0; q < s.offsets.size(); ++q) {
        int jj = j + s.offsets[q];
        if (per) jj = ((jj % n) + n) % n;
        acc += s.weights[q] * in[base + static_cast<std::size_t>(jj) * stride];
      }
      out[idx] = acc;
    }
  });
  return SampledField(g, std::move(out));
}

SampledField derivative(const SampledField& u, const MultiIndex& alpha) {
  require(static_cast<int>(alpha.size()) == u.grid().dim(), "derivative: multi-index dimension mismatch");
  SampledField cur = u;
  for (int a = 0; a < u.grid().dim(); ++a)
    if (alpha[a] > 0) cur = partial_derivative(cur, a, alpha[a]);
  return cur;
}

JetField gradient_m(const SampledField& u, int m) {
  const Grid& g = u.grid();
  require(m >= 0, "gradient_m: negative order");
  for (int a = 0; a < g.dim(); ++a)
    if (!g.periodic(a))
      require(g.nodes(a) >= std::max(2 * m + 1, m + 2),
              "gradient_m: need at least 2m+1 nodes on non-periodic axis " + std::to_string(a));
  JetField jet;
  jet.order = m;
  jet.base = u;
  for (int k = 0; k <= m; ++k)
    for (const auto& alpha : multi_indices(g.dim(), k)) jet.derivatives.emplace(alpha, derivative(u, alpha));
  return jet;
}

SampledField gradient_magnitude(const SampledField& u, int k) {
  std::vector<double> acc(u.size(), 0.0);
  for (const auto& alpha : multi_indices(u.grid().dim(), k)) {
    SampledField d = derivative(u, alpha);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += d[i] * d[i];
  }
  for (double& v : acc) v = std::sqrt(v);
  return SampledField(u.grid(), std::move(acc));
}

double integral(const SampledField& u) {
  const Grid& g = u.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += g.weight(i) * u[i];
  return acc;
}

double lp_norm_pow(const SampledField& u, double p) {
  require(p >= 1.0, "lp_norm: p must be >= 1");
  const Grid& g = u.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += g.weight(i) * std::pow(std::abs(u[i]), p);
  return acc;
}

double lp_norm(const SampledField& u, double p) { return std::pow(lp_norm_pow(u, p), 1.0 / p); }

namespace {

nlohmann::json header_json(const SampledField& f) {
  const Grid& g = f.grid();
  nlohmann::json periodic = nlohmann::json::array();
  for (bool b : g.box().periodic) periodic.push_back(b);
  return {{"format", "sobotrace-field"}, {"version", 1},          {"dim", g.dim()},
          {"shape", g.shape()},          {"lo", g.box().lo},      {"hi", g.box().hi},
          {"periodic", periodic},        {"count", g.node_count()}};
}

}  // namespace

void write_field(std::ostream& out, const SampledField& f) {
  out << header_json(f).dump() << '\n';
  for (double v : f.values()) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.write(buf, 8);
  }
  if (!out) throw std::runtime_error("field: write failed");
}

SampledField read_field(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("field: missing header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("field: malformed header: ") + e.what());
  }
  if (h.value("format", "") != "sobotrace-field") throw InvalidArgument("field: unknown format tag");
  std::vector<bool> periodic;
  for (const auto& b : h.at("periodic")) periodic.push_back(b.get<bool>());
  Box box = make_box(h.at("lo").get<std::vector<double>>(), h.at("hi").get<std::vector<double>>(), periodic);
  Grid g(box, h.at("shape").get<std::vector<int>>());
  if (h.at("count").get<std::size_t>() != g.node_count()) throw InvalidArgument("field: count mismatch");
  std::vector<double> v(g.node_count());
  for (double& x : v) {
    char buf[8];
    in.read(buf, 8);
    if (!in) throw InvalidArgument("field: truncated payload");
    std::uint64_t bits;
    std::memcpy(&bits, buf, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    x = std::bit_cast<double>(bits);
  }
  return SampledField(g, std::move(v));
}

void write_field_file(const std::string& path, const SampledField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("field: cannot open " + path);
  write_field(out, f);
}

SampledField read_field_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("field: cannot open " + path);
  return read_field(in);
}

void write_field_csv(std::ostream& out, const SampledField& f) {
  const Grid& g = f.grid();
  for (int a = 0; a < g.dim(); ++a) out << 'x' << a << ',';
  out << "value\n";
  out << std::setprecision(17);
  std::vector<double> x(g.dim());
  for (std::size_t i = 0; i < f.size(); ++i) {
    g.point(i, x);
    for (double c : x) out << c << ',';
    out << f[i] << '\n';
  }
}

bool check_support_margin(const SampledField& f, double threshold) {
  const Grid& g = f.grid();
  bool ok = true;
  for (int a = 0; a < g.dim(); ++a) {
    if (!g.periodic(a)) continue;
    const int n = g.nodes(a);
    std::vector<bool> active(n, false);
    for (std::size_t i = 0; i < f.size(); ++i)
      if (std::abs(f[i]) > threshold) active[g.axis_index(i, a)] = true;
    // Longest run of inactive nodes on the circle.
    int best = 0, run = 0;
    for (int k = 0; k < 2 * n; ++k) {
      run = active[k % n] ? 0 : run + 1;
      best = std::max(best, std::min(run, n));
    }
    const double diameter = (n - best) * g.spacing()[a];
    if (diameter > 0.5 * g.box().extent(a)) {
      warn("data on periodic axis " + std::to_string(a) + " has support diameter " + std::to_string(diameter) +
           " without one diameter of margin in the cell");
      ok = false;
    }
  }
  return ok;
}

}  // namespace sobotrace
