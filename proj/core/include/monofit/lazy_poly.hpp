#pragma once

#include <vector>

#include "monofit/polynomials.hpp"

namespace monofit {

/// c_0 + c_1 (x - center) + ... in the local monomial basis.
class LocalPolynomial final : public Polynomial {
 public:
  LocalPolynomial() = default;
  LocalPolynomial(double center, std::vector<double> coeffs);

  double value(double x) const override;
  double derivative(double x) const override;
  int degree() const override;

  double center() const { return center_; }
  const std::vector<double>& coeffs() const { return c_; }

  /// Derivative as a local polynomial around the same center.
  LocalPolynomial differentiate() const;
  /// Antiderivative around the same center, equal to `at_center` at the center.
  LocalPolynomial antidifferentiate(double at_center = 0.0) const;
  /// Same polynomial expanded about another center.
  LocalPolynomial recentered(double center) const;

  LocalPolynomial operator-(const LocalPolynomial& o) const;
  LocalPolynomial operator*(double s) const;

 private:
  double center_ = 0.0;
  std::vector<double> c_{0.0};
};

/// constant + sum of c_i p_i, evaluated term by term.
class PolySum final : public Polynomial {
 public:
  struct Term {
    double coefficient = 0.0;
    PolyPtr poly;
  };

  explicit PolySum(double constant = 0.0) : constant_(constant) {}

  void add(double coefficient, PolyPtr p);
  void add_constant(double c) { constant_ += c; }

  double value(double x) const override;
  double derivative(double x) const override;
  int degree() const override;
  void values(std::span<const double> xs, std::span<double> out) const override;
  void derivatives(std::span<const double> xs, std::span<double> out) const override;

  double constant() const { return constant_; }
  const std::vector<Term>& terms() const { return terms_; }

 private:
  double constant_ = 0.0;
  std::vector<Term> terms_;
  int degree_ = 0;
};

/// a(x) b(x).
class PolyProduct final : public Polynomial {
 public:
  PolyProduct(PolyPtr a, PolyPtr b);

  double value(double x) const override;
  double derivative(double x) const override;
  int degree() const override { return a_->degree() + b_->degree(); }

 private:
  PolyPtr a_, b_;
};

}  // namespace monofit
