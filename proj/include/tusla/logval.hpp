#pragma once

#include <cmath>
#include <limits>

namespace tusla {

// Nonnegative real number carried as its natural logarithm, so products and
// sums of astronomically large or small quantities stay representable.
// Zero is encoded as lg = -inf.
class LogVal {
 public:
  LogVal() : lg_(-std::numeric_limits<double>::infinity()) {}  // zero

  static LogVal from_value(double v);
  static LogVal from_lg(double lg) {
    LogVal x;
    x.lg_ = lg;
    return x;
  }
  static LogVal exp_of(double e) { return from_lg(e); }  // e^e
  static LogVal one() { return from_lg(0.0); }

  double lg() const { return lg_; }
  double log10() const { return lg_ / 2.302585092994046; }
  double value() const { return std::exp(lg_); }  // saturates to 0 or inf
  bool is_zero() const { return std::isinf(lg_) && lg_ < 0; }

  LogVal pow(double e) const {
    if (is_zero()) {
      if (e > 0) return LogVal();
      if (e == 0) return one();
      return from_lg(std::numeric_limits<double>::infinity());
    }
    return from_lg(lg_ * e);
  }
  LogVal sqrt() const { return pow(0.5); }

  friend LogVal operator*(LogVal a, LogVal b) {
    if (a.is_zero() || b.is_zero()) return LogVal();
    return from_lg(a.lg_ + b.lg_);
  }
  friend LogVal operator/(LogVal a, LogVal b) {
    if (a.is_zero()) return LogVal();
    return from_lg(a.lg_ - b.lg_);
  }
  friend LogVal operator+(LogVal a, LogVal b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const double hi = a.lg_ > b.lg_ ? a.lg_ : b.lg_;
    const double lo = a.lg_ > b.lg_ ? b.lg_ : a.lg_;
    return from_lg(hi + std::log1p(std::exp(lo - hi)));
  }
  friend bool operator<(LogVal a, LogVal b) { return a.lg_ < b.lg_; }
  friend bool operator<=(LogVal a, LogVal b) { return a.lg_ <= b.lg_; }
  friend bool operator>(LogVal a, LogVal b) { return a.lg_ > b.lg_; }
  friend bool operator>=(LogVal a, LogVal b) { return a.lg_ >= b.lg_; }

  static LogVal min(LogVal a, LogVal b) { return a < b ? a : b; }
  static LogVal max(LogVal a, LogVal b) { return a < b ? b : a; }

 private:
  double lg_;
};

// ln C(n, k) for real n >= k >= 0 via lgamma.
double log_binomial(double n, double k);

// integral of exp(t^2) over [lo, hi] with 0 <= lo <= hi, as a LogVal.
// Uses a power series for moderate endpoints, the asymptotic expansion of
// exp(x^2)/(2x) for large ones, and falls back to direct quadrature when
// the endpoint difference nearly cancels.
LogVal log_integral_exp_t2(double lo, double hi);

}  // namespace tusla
