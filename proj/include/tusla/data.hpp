#pragma once

#include <stdexcept>

#include "tusla/core.hpp"

namespace tusla {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MomentEstimate {
  double value = 0.0;
  double stderror = 0.0;
  std::size_t n = 0;
};

// Sampling law of the data variable X.  One-dimensional laws may expose the
// density/CDF together with a sup bound c_X and Lipschitz constant L_X, and
// closed-form moments E[(1+|X|)^k], E[(1+2|X|)^k] used by the constants
// calculator.
class DataLaw {
 public:
  DataLaw(std::size_t m, std::string name) : m_(m), name_(std::move(name)) {}
  virtual ~DataLaw() = default;

  std::size_t dim() const { return m_; }
  const std::string& name() const { return name_; }

  virtual void sample_into(RngStream& rng, double* out) const = 0;
  std::vector<DataSample> sample(RngStream& rng, std::size_t n) const;

  virtual bool has_density() const { return false; }
  virtual double density(double x) const;
  virtual double cdf(double x) const;
  virtual double density_sup() const;        // c_X
  virtual double density_lipschitz() const;  // L_X

  virtual bool has_analytic_moments() const { return false; }
  virtual double moment_one_plus_abs(double k) const;      // E[(1+|X|)^k]
  virtual double moment_one_plus_two_abs(double k) const;  // E[(1+2|X|)^k]

 private:
  std::size_t m_;
  std::string name_;
};

// Beta(2,2): density 6x(1-x) on [0,1]; sampled by the closed-form inverse
// CDF (trigonometric root of the cubic 3x^2 - 2x^3 = u).
class Beta22Law final : public DataLaw {
 public:
  Beta22Law() : DataLaw(1, "beta22") {}
  void sample_into(RngStream& rng, double* out) const override;
  bool has_density() const override { return true; }
  double density(double x) const override;
  double cdf(double x) const override;
  double density_sup() const override { return 1.5; }
  double density_lipschitz() const override { return 6.0; }
  bool has_analytic_moments() const override { return true; }
  double moment_one_plus_abs(double k) const override;
  double moment_one_plus_two_abs(double k) const override;
};

class StdNormalLaw final : public DataLaw {
 public:
  StdNormalLaw() : DataLaw(1, "std_normal") {}
  void sample_into(RngStream& rng, double* out) const override;
  bool has_density() const override { return true; }
  double density(double x) const override;
  double cdf(double x) const override;
  double density_sup() const override;
  double density_lipschitz() const override;
  bool has_analytic_moments() const override { return true; }
  double moment_one_plus_abs(double k) const override;
  double moment_one_plus_two_abs(double k) const override;
};

class Uniform01Law final : public DataLaw {
 public:
  Uniform01Law() : DataLaw(1, "uniform01") {}
  void sample_into(RngStream& rng, double* out) const override;
  bool has_density() const override { return true; }
  double density(double x) const override;
  double cdf(double x) const override;
  double density_sup() const override { return 1.0; }
  double density_lipschitz() const override { return 0.0; }
  bool has_analytic_moments() const override { return true; }
  double moment_one_plus_abs(double k) const override;
  double moment_one_plus_two_abs(double k) const override;
};

// i.i.d. U(0,1) coordinates in R^m.
class UniformBoxLaw final : public DataLaw {
 public:
  explicit UniformBoxLaw(std::size_t m);
  void sample_into(RngStream& rng, double* out) const override;
};

// Monte Carlo fallback for E[(1+|X|)^k] on laws without closed-form moments
// (1-D only); the standard error of the estimate is reported back.
MomentEstimate mc_moment_one_plus_abs(const DataLaw& law, double k,
                                      std::size_t n, RngStream& rng);

// In-memory dataset: row-major features X (n x feat_dim) and targets Y
// (n x target_dim) plus a train/test index split and the standardization
// parameters fitted on the training rows.
struct Dataset {
  std::size_t n = 0, feat_dim = 0, target_dim = 0;
  std::vector<double> X, Y;
  std::vector<std::size_t> train_idx, test_idx;
  bool standardized = false;
  Vec feat_mean, feat_std, target_mean, target_std;
  std::string provenance;

  const double* x_row(std::size_t i) const { return X.data() + i * feat_dim; }
  const double* y_row(std::size_t i) const { return Y.data() + i * target_dim; }
};

// Resamples rows of a dataset uniformly with replacement; samples are the
// concatenation [z; y] (features first) or [y; z] when targets_first.
class EmpiricalLaw final : public DataLaw {
 public:
  EmpiricalLaw(std::shared_ptr<const Dataset> ds, bool targets_first);
  void sample_into(RngStream& rng, double* out) const override;

 private:
  std::shared_ptr<const Dataset> ds_;
  bool targets_first_;
};

// CSV regression table: header row, numeric cells, last column the target
// unless a manifest overrides the layout.  Features and target are z-scored
// with statistics fitted on the training split; the split takes
// floor(test_fraction * n) shuffled rows as the test set.
//
// Manifest (JSON, all fields optional): n_features, target_column ("last"),
// expected_rows, expected_cols, note.
Dataset load_concrete_csv(const std::string& path, std::uint64_t split_seed,
                          double test_fraction = 0.1,
                          const std::string& manifest_path = "");

// IDX image/label pair (big-endian magics 0x803/0x801).  Pixels are scaled
// to [0,1], labels one-hot encoded over 10 classes.  A positive subsample
// keeps subsample/10 shuffled examples per class (stratified).
Dataset load_idx(const std::string& images_path,
                 const std::string& labels_path, std::size_t subsample = 0,
                 std::uint64_t subsample_seed = 0);

// Concatenates a train-only and a test-only dataset into one with the
// appropriate index split.
Dataset merge_train_test(const Dataset& train, const Dataset& test);

// Shuffles row indices with a dedicated stream and takes the first
// floor(test_fraction * n) as the (sorted) test split.
void assign_split(Dataset& ds, std::uint64_t split_seed, double test_fraction);

// Fits per-column mean/std on the training rows and z-scores every row
// (features and targets).  A column with zero spread raises DataError.
void standardize_fit_train(Dataset& ds);

}  // namespace tusla
