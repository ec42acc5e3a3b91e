#pragma once

#include <cmath>
#include <compare>
#include <ostream>

#include "clustergas/errors.hpp"

namespace clustergas {

/// Energy on R ∪ {+∞}. The infinite state is an explicit flag; the stored
/// double is never used as a stand-in for infinity.
class ExtendedReal {
public:
  constexpr ExtendedReal() = default;
  constexpr ExtendedReal(double v) : value_(v) {}  // NOLINT(implicit)

  static constexpr ExtendedReal infinity() {
    ExtendedReal e;
    e.infinite_ = true;
    return e;
  }

  constexpr bool is_infinite() const { return infinite_; }
  constexpr bool is_finite() const { return !infinite_; }

  /// Finite value; throws if infinite.
  double value() const {
    if (infinite_) throw DomainError("ExtendedReal::value() on +infinity");
    return value_;
  }

  /// exp(-beta * x), with exp(-beta * inf) = 0 for beta > 0.
  double boltzmann(double beta) const {
    return infinite_ ? 0.0 : std::exp(-beta * value_);
  }

  ExtendedReal& operator+=(const ExtendedReal& o) {
    if (infinite_ || o.infinite_) {
      infinite_ = true;
      value_ = 0.0;
    } else {
      value_ += o.value_;
    }
    return *this;
  }
  friend ExtendedReal operator+(ExtendedReal a, const ExtendedReal& b) { return a += b; }

  /// Scaling by a strictly positive factor.
  friend ExtendedReal operator*(double lambda, const ExtendedReal& e) {
    if (!(lambda > 0.0)) throw DomainError("ExtendedReal scaling requires a positive factor");
    return e.infinite_ ? infinity() : ExtendedReal(lambda * e.value_);
  }

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }
  friend std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.infinite_ && b.infinite_) return std::partial_ordering::equivalent;
    if (a.infinite_) return std::partial_ordering::greater;
    if (b.infinite_) return std::partial_ordering::less;
    return a.value_ <=> b.value_;
  }

  friend std::ostream& operator<<(std::ostream& os, const ExtendedReal& e) {
    if (e.infinite_) return os << "inf";
    return os << e.value_;
  }

private:
  double value_ = 0.0;
  bool infinite_ = false;
};

}  // namespace clustergas
