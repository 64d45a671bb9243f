#pragma once

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace stochak {

// Extended real used for values that can legitimately be -infinity
// (boundary capital with relative risk aversion above one). Deliberately
// not a floating NaN/-inf so that numerical failures stay distinguishable
// from boundary values.
class ExtReal {
 public:
  ExtReal() : value_(0.0), neg_inf_(false) {}

  static ExtReal finite(double v) {
    if (!std::isfinite(v)) throw std::domain_error("ExtReal: non-finite value");
    ExtReal r;
    r.value_ = v;
    return r;
  }
  static ExtReal neg_inf() {
    ExtReal r;
    r.neg_inf_ = true;
    return r;
  }

  bool is_neg_inf() const { return neg_inf_; }
  bool is_finite() const { return !neg_inf_; }

  // Throws when the value is -infinity; callers must branch first.
  double value() const {
    if (neg_inf_) throw std::domain_error("ExtReal: value() on -inf");
    return value_;
  }

  // Finite value, or -HUGE_VAL for the marker (for reporting only).
  double value_or_neg_inf() const { return neg_inf_ ? -HUGE_VAL : value_; }

  friend ExtReal operator+(ExtReal a, ExtReal b) {
    if (a.neg_inf_ || b.neg_inf_) return neg_inf();
    return finite(a.value_ + b.value_);
  }
  friend ExtReal operator-(ExtReal a, double b) {
    if (a.neg_inf_) return neg_inf();
    return finite(a.value_ - b);
  }
  friend bool operator==(const ExtReal& a, const ExtReal& b) {
    if (a.neg_inf_ != b.neg_inf_) return false;
    return a.neg_inf_ || a.value_ == b.value_;
  }

  friend std::ostream& operator<<(std::ostream& os, const ExtReal& x) {
    if (x.neg_inf_) return os << "-inf";
    return os << x.value_;
  }

 private:
  double value_;
  bool neg_inf_;
};

}  // namespace stochak
