#include "tusla/core.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tusla {

bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_sq(const Vec& v) { return dot(v, v); }

double norm(const Vec& v) { return std::sqrt(norm_sq(v)); }

ParamVector::ParamVector(Vec values) : v_(std::move(values)) {
  if (!all_finite(v_))
    throw std::invalid_argument("ParamVector: non-finite entry");
}

ParamVector ParamVector::zeros(std::size_t d) {
  return ParamVector(Vec(d, 0.0));
}

double ParamVector::norm() const { return tusla::norm(v_); }

DataSample::DataSample(Vec values) : v_(std::move(values)) {
  if (!all_finite(v_))
    throw std::invalid_argument("DataSample: non-finite entry");
}

std::uint64_t RngStream::next_u64() {
  state_ += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double RngStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

std::uint64_t RngStream::uniform_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t rej = (max % n + 1) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x <= max - rej) return x % n;
  }
}

GradientOracle::GradientOracle(std::size_t d, std::size_t m, double q,
                               double r, double rho,
                               std::shared_ptr<const DataLaw> law)
    : d_(d), m_(m), q_(q), r_(r), rho_(rho), law_(std::move(law)) {}

void GradientOracle::eval_H(const Vec& theta, const double* x,
                            Vec& out) const {
  Vec g(d_);
  eval_F(theta, x, out);
  eval_G(theta, x, g);
  for (std::size_t i = 0; i < d_; ++i) out[i] += g[i];
}

double GradientOracle::u_exact(const Vec&) const {
  throw std::logic_error("u_exact: not available for this oracle");
}

void GradientOracle::h_exact(const Vec&, Vec&) const {
  throw std::logic_error("h_exact: not available for this oracle");
}

void GradientOracle::batch_H(const Vec& theta, const double* const* rows,
                             std::size_t n, Vec& out) const {
  out.assign(d_, 0.0);
  Vec h(d_);
  for (std::size_t k = 0; k < n; ++k) {
    eval_H(theta, rows[k], h);
    for (std::size_t i = 0; i < d_; ++i) out[i] += h[i];
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < d_; ++i) out[i] *= inv;
}

double GradientOracle::batch_U(const Vec& theta, const double* const* rows,
                               std::size_t n) const {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += eval_U(theta, rows[k]);
  return s / static_cast<double>(n);
}

ParamVector stochastic_gradient(const GradientOracle& oracle,
                                const ParamVector& theta,
                                const std::vector<DataSample>& batch) {
  if (batch.empty())
    throw std::invalid_argument("stochastic_gradient: empty batch");
  if (theta.dim() != oracle.dim_param())
    throw std::invalid_argument("stochastic_gradient: parameter dimension " +
                                std::to_string(theta.dim()) + ", oracle needs " +
                                std::to_string(oracle.dim_param()));
  std::vector<const double*> rows(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    if (batch[k].dim() != oracle.dim_data())
      throw std::invalid_argument("stochastic_gradient: sample dimension " +
                                  std::to_string(batch[k].dim()) +
                                  ", oracle needs " +
                                  std::to_string(oracle.dim_data()));
    rows[k] = batch[k].values().data();
  }
  Vec out;
  oracle.batch_H(theta.values(), rows.data(), rows.size(), out);
  if (!all_finite(out))
    throw std::runtime_error("stochastic_gradient: non-finite gradient");
  return ParamVector(std::move(out));
}

}  // namespace tusla
