#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>

#include "commcost/errors.hpp"

namespace commcost {

/// Exact non-negative rational, always stored in lowest terms.
class Ratio {
 public:
  constexpr Ratio() = default;
  Ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) throw ParameterError("Ratio: zero denominator");
    const auto g = std::gcd(num, den);
    num_ = num / g;
    den_ = den / g;
  }

  std::uint64_t num() const noexcept { return num_; }
  std::uint64_t den() const noexcept { return den_; }
  double value() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend bool operator==(const Ratio&, const Ratio&) = default;

  friend Ratio operator*(const Ratio& a, const Ratio& b) {
    // cross-reduce first so the products stay small
    const auto g1 = std::gcd(a.num_, b.den_);
    const auto g2 = std::gcd(b.num_, a.den_);
    return Ratio((a.num_ / g1) * (b.num_ / g2), (a.den_ / g2) * (b.den_ / g1));
  }

  friend bool operator<(const Ratio& a, const Ratio& b) {
    return static_cast<unsigned __int128>(a.num_) * b.den_ <
           static_cast<unsigned __int128>(b.num_) * a.den_;
  }

  friend std::ostream& operator<<(std::ostream& os, const Ratio& r) {
    return os << r.num_ << '/' << r.den_;
  }

 private:
  std::uint64_t num_ = 0;
  std::uint64_t den_ = 1;
};

}  // namespace commcost
