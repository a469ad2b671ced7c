#include "sobotrace/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include "sobotrace/common.hpp"

namespace sobotrace {

Polynomial Polynomial::constant(int dim, double c) {
  Polynomial p(dim);
  p.add_term(MultiIndex(dim, 0), c);
  return p;
}

Polynomial Polynomial::variable(int dim, int axis) {
  Polynomial p(dim);
  MultiIndex e(dim, 0);
  e[axis] = 1;
  p.add_term(e, 1.0);
  return p;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [e, c] : terms_) {
    int s = 0;
    for (int v : e) s += v;
    d = std::max(d, s);
  }
  return d;
}

void Polynomial::add_term(const MultiIndex& exponent, double coeff) {
  require(static_cast<int>(exponent.size()) == dim_, "polynomial: exponent dimension mismatch");
  if (coeff == 0.0) return;
  auto [it, inserted] = terms_.emplace(exponent, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
}

Polynomial Polynomial::derivative(int axis) const {
  Polynomial out(dim_);
  for (const auto& [e, c] : terms_) {
    if (e[axis] == 0) continue;
    MultiIndex f = e;
    f[axis] -= 1;
    out.add_term(f, c * e[axis]);
  }
  return out;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial out = *this;
  for (const auto& [e, c] : o.terms_) out.add_term(e, c);
  return out;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  Polynomial out(dim_);
  for (const auto& [e1, c1] : terms_)
    for (const auto& [e2, c2] : o.terms_) {
      MultiIndex e(dim_);
      for (int a = 0; a < dim_; ++a) e[a] = e1[a] + e2[a];
      out.add_term(e, c1 * c2);
    }
  return out;
}

Polynomial Polynomial::operator*(double c) const {
  Polynomial out(dim_);
  for (const auto& [e, v] : terms_) out.add_term(e, v * c);
  return out;
}

double Polynomial::evaluate(std::span<const double> x) const {
  const int deg = degree();
  // powers[a][k] = x_a^k
  double powers[kMaxDim][64];
  require(deg < 64 && dim_ <= kMaxDim, "polynomial: degree or dimension too large");
  for (int a = 0; a < dim_; ++a) {
    powers[a][0] = 1.0;
    for (int k = 1; k <= deg; ++k) powers[a][k] = powers[a][k - 1] * x[a];
  }
  double acc = 0.0;
  for (const auto& [e, c] : terms_) {
    double t = c;
    for (int a = 0; a < dim_; ++a) t *= powers[a][e[a]];
    acc += t;
  }
  return acc;
}

void Polynomial::gradient(std::span<const double> x, std::span<double> out) const {
  for (int a = 0; a < dim_; ++a) out[a] = derivative(a).evaluate(x);
}

}  // namespace sobotrace
