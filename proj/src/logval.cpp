#include "tusla/logval.hpp"

#include <stdexcept>

namespace tusla {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double lse(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

// ln of integral of exp(t^2) over [0, x].
double lg_int_zero_to(double x) {
  if (x <= 0.0) return kNegInf;
  if (x < 30.0) {
    // sum over k of x^(2k+1) / (k! (2k+1)); terms peak near k = x^2
    const double lgx = std::log(x);
    double lgfact = 0.0;
    double acc = kNegInf;
    for (int k = 0; k < 200000; ++k) {
      if (k > 0) lgfact += std::log(static_cast<double>(k));
      const double term =
          (2.0 * k + 1.0) * lgx - lgfact - std::log(2.0 * k + 1.0);
      acc = lse(acc, term);
      if (static_cast<double>(k) > x * x && term < acc - 60.0) break;
    }
    return acc;
  }
  // exp(x^2)/(2x) * (1 + 1/(2x^2) + 3/(2x^2)^2 * ...), error below 1e-15
  const double inv = 1.0 / (2.0 * x * x);
  double s = 1.0, term = 1.0;
  for (int k = 1; k <= 12; ++k) {
    term *= (2.0 * k - 1.0) * inv;
    s += term;
  }
  return x * x - std::log(2.0 * x) + std::log(s);
}

}  // namespace

LogVal LogVal::from_value(double v) {
  if (std::isnan(v) || v < 0.0)
    throw std::invalid_argument("LogVal: value must be nonnegative");
  if (v == 0.0) return LogVal();
  return from_lg(std::log(v));
}

double log_binomial(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

LogVal log_integral_exp_t2(double lo, double hi) {
  if (lo < 0.0 || hi < lo)
    throw std::invalid_argument("log_integral_exp_t2: need 0 <= lo <= hi");
  if (hi == lo) return LogVal();
  const double lgb = lg_int_zero_to(hi);
  if (lo == 0.0) return LogVal::from_lg(lgb);
  const double lga = lg_int_zero_to(lo);
  const double gap = lgb - lga;
  if (gap > 1e-3)
    return LogVal::from_lg(lgb + std::log1p(-std::exp(-gap)));
  // nearly-cancelling difference means a narrow interval: integrate it
  // directly with a midpoint rule, factoring out the endpoint maximum
  const int n = 4096;
  const double dt = (hi - lo) / n;
  const double mx = hi * hi;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = lo + (i + 0.5) * dt;
    s += std::exp(t * t - mx);
  }
  return LogVal::from_lg(mx + std::log(s) + std::log(dt));
}

}  // namespace tusla
