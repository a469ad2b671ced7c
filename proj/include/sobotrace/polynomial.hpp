#pragma once
/// Multivariate polynomials with exact differentiation, used for mollifier
/// profiles and their derivative kernels.

#include <map>
#include <span>

#include "sobotrace/fields.hpp"

namespace sobotrace {

class Polynomial {
 public:
  explicit Polynomial(int dim = 1) : dim_(dim) {}
  static Polynomial constant(int dim, double c);
  static Polynomial variable(int dim, int axis);

  int dim() const { return dim_; }
  int degree() const;
  const std::map<MultiIndex, double>& terms() const { return terms_; }
  void add_term(const MultiIndex& exponent, double coeff);

  Polynomial derivative(int axis) const;
  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double c) const;

  double evaluate(std::span<const double> x) const;
  /// Gradient at x, written to out (length dim).
  void gradient(std::span<const double> x, std::span<double> out) const;

 private:
  int dim_;
  std::map<MultiIndex, double> terms_;
};

}  // namespace sobotrace
