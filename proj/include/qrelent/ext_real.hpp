#ifndef QRELENT_EXT_REAL_HPP
#define QRELENT_EXT_REAL_HPP

#include <cmath>
#include <cstdio>
#include <string>

#include "qrelent/errors.hpp"

namespace qrelent {

// A nonnegative-leaning extended real: either a finite double or +infinity.
// +infinity is absorbing under addition and positive scaling.  Subtraction is
// only defined between finite values; callers branch on is_finite() first.
class ExtReal {
 public:
  constexpr ExtReal() = default;

  static ExtReal finite(double x) {
    if (std::isnan(x) || std::isinf(x)) throw NotFinite("ExtReal::finite needs a finite value");
    ExtReal r;
    r.value_ = x;
    return r;
  }

  static constexpr ExtReal infinity() {
    ExtReal r;
    r.inf_ = true;
    return r;
  }

  bool is_finite() const { return !inf_; }
  bool is_infinite() const { return inf_; }

  double value() const {
    if (inf_) throw Error("ExtReal: value() on +infinity");
    return value_;
  }

  double value_or(double fallback) const { return inf_ ? fallback : value_; }

  friend ExtReal operator+(ExtReal a, ExtReal b) {
    if (a.inf_ || b.inf_) return infinity();
    return finite(a.value_ + b.value_);
  }

  friend ExtReal operator+(ExtReal a, double b) { return a + finite(b); }
  friend ExtReal operator+(double a, ExtReal b) { return finite(a) + b; }

  // Scaling by c > 0; c == 0 maps everything (including +infinity) to 0,
  // matching the convention 0 * (+infinity) = 0 used throughout.
  friend ExtReal operator*(double c, ExtReal a) {
    if (c < 0) throw NegativeInput("ExtReal: negative scale");
    if (c == 0.0) return finite(0.0);
    if (a.inf_) return infinity();
    return finite(c * a.value_);
  }

  friend bool operator==(ExtReal a, ExtReal b) {
    if (a.inf_ || b.inf_) return a.inf_ == b.inf_;
    return a.value_ == b.value_;
  }

  friend bool operator<(ExtReal a, ExtReal b) {
    if (a.inf_) return false;
    if (b.inf_) return true;
    return a.value_ < b.value_;
  }

  friend bool operator<=(ExtReal a, ExtReal b) { return a < b || a == b; }
  friend bool operator>(ExtReal a, ExtReal b) { return b < a; }
  friend bool operator>=(ExtReal a, ExtReal b) { return b <= a; }

 private:
  double value_ = 0.0;
  bool inf_ = false;
};

inline ExtReal max(ExtReal a, ExtReal b) { return a < b ? b : a; }

inline std::string to_string(ExtReal x) {
  if (x.is_infinite()) return "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x.value());
  return buf;
}

}  // namespace qrelent

#endif  // QRELENT_EXT_REAL_HPP
