#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace talbot {

// Exact rational number with gcd-reduced terms and positive denominator.
// Bloch tilts are declared as rationals so block reduction stays exact;
// recovering a rational from a floating tilt would be ill-posed.
class Rational {
 public:
  constexpr Rational() = default;

  Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw std::invalid_argument("Rational: zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double value() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }
  bool is_zero() const { return num_ == 0; }

  Rational times(std::int64_t k) const { return Rational(num_ * k, den_); }

  friend bool operator==(const Rational&, const Rational&) = default;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace talbot
