#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace tusla {

using Vec = std::vector<double>;

bool all_finite(const Vec& v);
double dot(const Vec& a, const Vec& b);
double norm_sq(const Vec& v);
double norm(const Vec& v);

// Parameter vector with a fixed dimension; non-finite entries are rejected
// at construction so downstream code can assume finiteness.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(Vec values);
  static ParamVector zeros(std::size_t d);

  std::size_t dim() const { return v_.size(); }
  const Vec& values() const { return v_; }
  double operator[](std::size_t i) const { return v_[i]; }
  double norm() const;

 private:
  Vec v_;
};

// One data sample x in R^m; finite entries enforced.
class DataSample {
 public:
  DataSample() = default;
  explicit DataSample(Vec values);
  std::size_t dim() const { return v_.size(); }
  const Vec& values() const { return v_; }
  double operator[](std::size_t i) const { return v_[i]; }

 private:
  Vec v_;
};

// Deterministic 64-bit generator (splitmix64) with uniform and Gaussian
// output.  The sequence depends only on the seed, never on the platform;
// each stream has a single owner (no sharing across threads).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double uniform01();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();     // N(0,1), Marsaglia polar method with cached spare
  std::uint64_t uniform_below(std::uint64_t n);  // unbiased, rejection

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[uniform_below(i)]);
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

class DataLaw;

// A problem bundle: per-sample objective U, gradient split H = F + G,
// optional closed forms of u = E[U] and h = grad u, and the sampling law
// of the data.  Implementations are immutable and re-entrant.
class GradientOracle {
 public:
  virtual ~GradientOracle() = default;

  std::size_t dim_param() const { return d_; }
  std::size_t dim_data() const { return m_; }
  double q() const { return q_; }
  double r() const { return r_; }
  double rho() const { return rho_; }
  const std::shared_ptr<const DataLaw>& data_law() const { return law_; }

  virtual double eval_U(const Vec& theta, const double* x) const = 0;
  virtual void eval_F(const Vec& theta, const double* x, Vec& out) const = 0;
  virtual void eval_G(const Vec& theta, const double* x, Vec& out) const = 0;
  virtual void eval_H(const Vec& theta, const double* x, Vec& out) const;

  virtual bool has_u_exact() const { return false; }
  virtual double u_exact(const Vec& theta) const;
  virtual bool has_h_exact() const { return false; }
  virtual void h_exact(const Vec& theta, Vec& out) const;

  // Mean of H (resp. U) over a batch of sample rows, accumulated strictly
  // left to right so results are reproducible bit for bit.
  virtual void batch_H(const Vec& theta, const double* const* rows,
                       std::size_t n, Vec& out) const;
  virtual double batch_U(const Vec& theta, const double* const* rows,
                         std::size_t n) const;

 protected:
  GradientOracle(std::size_t d, std::size_t m, double q, double r, double rho,
                 std::shared_ptr<const DataLaw> law);

  std::size_t d_, m_;
  double q_, r_, rho_;
  std::shared_ptr<const DataLaw> law_;
};

// Batch-mean stochastic gradient with full validation: throws
// std::invalid_argument on an empty batch or dimension mismatch and
// std::runtime_error when the result is not finite.
ParamVector stochastic_gradient(const GradientOracle& oracle,
                                const ParamVector& theta,
                                const std::vector<DataSample>& batch);

}  // namespace tusla
