#pragma once

#include <initializer_list>
#include <utility>
#include <vector>

namespace abbias {

/// Real polynomial in the activity probability p, stored as ascending
/// coefficients: {c0, c1, c2} is c0 + c1*p + c2*p^2. The treatment-effect
/// and control-outcome curves are polynomials so models stay serializable.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(std::initializer_list<double> coeffs) : coeffs_(coeffs) {}
  explicit Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}

  double operator()(double p) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
      acc = acc * p + *it;
    return acc;
  }

  const std::vector<double>& coeffs() const { return coeffs_; }
  bool is_zero() const {
    for (double c : coeffs_)
      if (c != 0.0) return false;
    return true;
  }

 private:
  std::vector<double> coeffs_;
};

}  // namespace abbias
