#include "monofit/lazy_poly.hpp"

#include <algorithm>

#include "monofit/errors.hpp"

namespace monofit {

LocalPolynomial::LocalPolynomial(double center, std::vector<double> coeffs)
    : center_(center), c_(std::move(coeffs)) {
  if (c_.empty()) c_.push_back(0.0);
}

double LocalPolynomial::value(double x) const {
  const double u = x - center_;
  double s = 0.0;
  for (std::size_t k = c_.size(); k-- > 0;) s = s * u + c_[k];
  return s;
}

double LocalPolynomial::derivative(double x) const {
  const double u = x - center_;
  double s = 0.0;
  for (std::size_t k = c_.size(); k-- > 1;) s = s * u + static_cast<double>(k) * c_[k];
  return s;
}

int LocalPolynomial::degree() const {
  for (std::size_t k = c_.size(); k-- > 0;)
    if (c_[k] != 0.0) return static_cast<int>(k);
  return 0;
}

LocalPolynomial LocalPolynomial::differentiate() const {
  std::vector<double> d(std::max<std::size_t>(1, c_.size() - 1), 0.0);
  for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
  return {center_, std::move(d)};
}

LocalPolynomial LocalPolynomial::antidifferentiate(double at_center) const {
  std::vector<double> a(c_.size() + 1, 0.0);
  a[0] = at_center;
  for (std::size_t k = 0; k < c_.size(); ++k) a[k + 1] = c_[k] / static_cast<double>(k + 1);
  return {center_, std::move(a)};
}

LocalPolynomial LocalPolynomial::recentered(double center) const {
  // Taylor coefficients at the new center via repeated synthetic division.
  std::vector<double> a = c_;
  const double s = center - center_;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = n - 1; k > i; --k) a[k - 1] += s * a[k];
  return {center, std::move(a)};
}

LocalPolynomial LocalPolynomial::operator-(const LocalPolynomial& o) const {
  const LocalPolynomial other = o.center_ == center_ ? o : o.recentered(center_);
  std::vector<double> r(std::max(c_.size(), other.c_.size()), 0.0);
  for (std::size_t k = 0; k < c_.size(); ++k) r[k] += c_[k];
  for (std::size_t k = 0; k < other.c_.size(); ++k) r[k] -= other.c_[k];
  return {center_, std::move(r)};
}

LocalPolynomial LocalPolynomial::operator*(double s) const {
  std::vector<double> r = c_;
  for (double& v : r) v *= s;
  return {center_, std::move(r)};
}

void PolySum::add(double coefficient, PolyPtr p) {
  require(p != nullptr, "null polynomial term");
  if (coefficient == 0.0) return;
  degree_ = std::max(degree_, p->degree());
  terms_.push_back({coefficient, std::move(p)});
}

double PolySum::value(double x) const {
  double s = constant_;
  for (const auto& t : terms_) s += t.coefficient * t.poly->value(x);
  return s;
}

double PolySum::derivative(double x) const {
  double s = 0.0;
  for (const auto& t : terms_) s += t.coefficient * t.poly->derivative(x);
  return s;
}

int PolySum::degree() const { return degree_; }

void PolySum::values(std::span<const double> xs, std::span<double> out) const {
  std::fill(out.begin(), out.end(), constant_);
  std::vector<double> buf(xs.size());
  for (const auto& t : terms_) {
    t.poly->values(xs, buf);
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] += t.coefficient * buf[i];
  }
}

void PolySum::derivatives(std::span<const double> xs, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> buf(xs.size());
  for (const auto& t : terms_) {
    t.poly->derivatives(xs, buf);
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] += t.coefficient * buf[i];
  }
}

PolyProduct::PolyProduct(PolyPtr a, PolyPtr b) : a_(std::move(a)), b_(std::move(b)) {
  require(a_ != nullptr && b_ != nullptr, "null polynomial factor");
}

double PolyProduct::value(double x) const { return a_->value(x) * b_->value(x); }

double PolyProduct::derivative(double x) const {
  return a_->derivative(x) * b_->value(x) + a_->value(x) * b_->derivative(x);
}

}  // namespace monofit
