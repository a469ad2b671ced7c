#include "sobotrace/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "sobotrace/common.hpp"

namespace sobotrace {

namespace {

template <int N>
GaussRule make_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  GaussRule r;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  // Boost stores the non-negative half; node 0 is the centre when N is odd.
  for (std::size_t i = x.size(); i-- > 0;) {
    if (x[i] == 0.0) continue;
    r.nodes.push_back(-x[i]);
    r.weights.push_back(w[i]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.nodes.push_back(x[i]);
    r.weights.push_back(w[i]);
  }
  return r;
}

GaussRule build(int n) {
  switch (n) {
    case 1: return GaussRule{{0.0}, {2.0}};
    case 2: return make_rule<2>();
    case 3: return make_rule<3>();
    case 4: return make_rule<4>();
    case 5: return make_rule<5>();
    case 6: return make_rule<6>();
    case 7: return make_rule<7>();
    case 8: return make_rule<8>();
    case 9: return make_rule<9>();
    case 10: return make_rule<10>();
    case 12: return make_rule<12>();
    case 16: return make_rule<16>();
    case 20: return make_rule<20>();
    case 24: return make_rule<24>();
    case 32: return make_rule<32>();
    case 40: return make_rule<40>();
    case 48: return make_rule<48>();
    case 64: return make_rule<64>();
    default: throw InvalidArgument("unsupported Gauss-Legendre order " + std::to_string(n));
  }
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::mutex m;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build(n)).first;
  return it->second;
}

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

double sphere_surface(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double* error) {
  double err = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, rel_tol, &err);
  if (error) *error = err;
  return v;
}

double integrate_singular(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double* error) {
  static thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  double err = 0.0;
  double v = integrator.integrate(f, a, b, rel_tol, &err);
  if (error) *error = err;
  return v;
}

double integrate_composite(const std::function<double(double)>& f, double a, double b,
                           int panels, int order) {
  const GaussRule& g = gauss_legendre(order);
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double mid = a + (k + 0.5) * h;
    double acc = 0.0;
    for (std::size_t q = 0; q < g.nodes.size(); ++q) acc += g.weights[q] * f(mid + 0.5 * h * g.nodes[q]);
    total += 0.5 * h * acc;
  }
  return total;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "slope fit needs at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace sobotrace
