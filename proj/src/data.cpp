#include "tusla/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>

#include "json.hpp"
#include "tusla/logval.hpp"

namespace tusla {

std::vector<DataSample> DataLaw::sample(RngStream& rng, std::size_t n) const {
  std::vector<DataSample> out;
  out.reserve(n);
  Vec buf(dim());
  for (std::size_t i = 0; i < n; ++i) {
    sample_into(rng, buf.data());
    out.emplace_back(buf);
  }
  return out;
}

double DataLaw::density(double) const {
  throw std::logic_error("density: not available for law " + name());
}
double DataLaw::cdf(double) const {
  throw std::logic_error("cdf: not available for law " + name());
}
double DataLaw::density_sup() const {
  throw std::logic_error("density_sup: not available for law " + name());
}
double DataLaw::density_lipschitz() const {
  throw std::logic_error("density_lipschitz: not available for law " + name());
}
double DataLaw::moment_one_plus_abs(double) const {
  throw std::logic_error("moment: not available for law " + name());
}
double DataLaw::moment_one_plus_two_abs(double) const {
  throw std::logic_error("moment: not available for law " + name());
}

// ---------------------------------------------------------------- Beta(2,2)

void Beta22Law::sample_into(RngStream& rng, double* out) const {
  // CDF is 3x^2 - 2x^3; invert the cubic with the trigonometric root that
  // lands in [0,1]: x = 1/2 + cos(arccos(1-2u)/3 + 4*pi/3)
  const double u = rng.uniform01();
  const double phi = std::acos(1.0 - 2.0 * u);
  double x = 0.5 + std::cos(phi / 3.0 + 4.0 * std::numbers::pi / 3.0);
  out[0] = std::clamp(x, 0.0, 1.0);
}

double Beta22Law::density(double x) const {
  if (x < 0.0 || x > 1.0) return 0.0;
  return 6.0 * x * (1.0 - x);
}

double Beta22Law::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * (3.0 - 2.0 * x);
}

double Beta22Law::moment_one_plus_abs(double k) const {
  // E[(1+X)^k] with density 6x(1-x): substitute t = 1+x on [1,2]
  auto p = [](double e) { return (std::pow(2.0, e) - 1.0) / e; };
  return 6.0 * (-p(k + 3.0) + 3.0 * p(k + 2.0) - 2.0 * p(k + 1.0));
}

double Beta22Law::moment_one_plus_two_abs(double k) const {
  auto p = [](double e) { return (std::pow(3.0, e) - 1.0) / e; };
  return 0.75 * (-p(k + 3.0) + 4.0 * p(k + 2.0) - 3.0 * p(k + 1.0));
}

// -------------------------------------------------------------- std normal

void StdNormalLaw::sample_into(RngStream& rng, double* out) const {
  out[0] = rng.normal();
}

double StdNormalLaw::density(double x) const {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double StdNormalLaw::cdf(double x) const {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double StdNormalLaw::density_sup() const {
  return 1.0 / std::sqrt(2.0 * std::numbers::pi);
}

double StdNormalLaw::density_lipschitz() const {
  // max |phi'| is attained at x = 1
  return std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi);
}

namespace {

// E[(1+s|X|)^k] for X ~ N(0,1) and integer k: binomial expansion with
// E|X|^j = 2^(j/2) Gamma((j+1)/2) / sqrt(pi), accumulated in log space.
double normal_moment_binomial(double k, double s) {
  const int ik = static_cast<int>(std::llround(k));
  LogVal acc;
  const double lgs = std::log(s);
  for (int j = 0; j <= ik; ++j) {
    const double lg = log_binomial(k, j) + j * lgs + 0.5 * j * std::log(2.0) +
                      std::lgamma(0.5 * (j + 1)) - 0.5 * std::log(std::numbers::pi);
    acc = acc + LogVal::from_lg(lg);
  }
  return acc.value();
}

// quadrature fallback for non-integer exponents: Simpson on [0, 50]
double normal_moment_quadrature(double k, double s) {
  const int n = 40000;  // even
  const double hi = 50.0, h = hi / n;
  auto f = [&](double x) {
    return 2.0 * std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi) *
           std::pow(1.0 + s * x, k);
  };
  double acc = f(0.0) + f(hi);
  for (int i = 1; i < n; ++i) acc += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

bool is_integer(double k) { return std::abs(k - std::llround(k)) < 1e-9; }

}  // namespace

double StdNormalLaw::moment_one_plus_abs(double k) const {
  if (k == 0.0) return 1.0;
  return is_integer(k) ? normal_moment_binomial(k, 1.0)
                       : normal_moment_quadrature(k, 1.0);
}

double StdNormalLaw::moment_one_plus_two_abs(double k) const {
  if (k == 0.0) return 1.0;
  return is_integer(k) ? normal_moment_binomial(k, 2.0)
                       : normal_moment_quadrature(k, 2.0);
}

// ----------------------------------------------------------------- uniform

void Uniform01Law::sample_into(RngStream& rng, double* out) const {
  out[0] = rng.uniform01();
}

double Uniform01Law::density(double x) const {
  return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
}

double Uniform01Law::cdf(double x) const { return std::clamp(x, 0.0, 1.0); }

double Uniform01Law::moment_one_plus_abs(double k) const {
  return (std::pow(2.0, k + 1.0) - 1.0) / (k + 1.0);
}

double Uniform01Law::moment_one_plus_two_abs(double k) const {
  return (std::pow(3.0, k + 1.0) - 1.0) / (2.0 * (k + 1.0));
}

UniformBoxLaw::UniformBoxLaw(std::size_t m) : DataLaw(m, "uniform_box") {
  if (m == 0) throw std::invalid_argument("UniformBoxLaw: dimension 0");
}

void UniformBoxLaw::sample_into(RngStream& rng, double* out) const {
  for (std::size_t i = 0; i < dim(); ++i) out[i] = rng.uniform01();
}

MomentEstimate mc_moment_one_plus_abs(const DataLaw& law, double k,
                                      std::size_t n, RngStream& rng) {
  if (n < 2) throw std::invalid_argument("mc_moment: need n >= 2");
  Vec buf(law.dim());
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    law.sample_into(rng, buf.data());
    const double v = std::pow(1.0 + norm(buf), k);
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  const double var = std::max(0.0, s2 / n - mean * mean);
  return {mean, std::sqrt(var / n), n};
}

// --------------------------------------------------------------- empirical

EmpiricalLaw::EmpiricalLaw(std::shared_ptr<const Dataset> ds,
                           bool targets_first)
    : DataLaw(ds->feat_dim + ds->target_dim, "empirical"),
      ds_(std::move(ds)),
      targets_first_(targets_first) {
  if (ds_->n == 0) throw std::invalid_argument("EmpiricalLaw: empty dataset");
}

void EmpiricalLaw::sample_into(RngStream& rng, double* out) const {
  const std::size_t i = rng.uniform_below(ds_->n);
  const double* z = ds_->x_row(i);
  const double* y = ds_->y_row(i);
  if (targets_first_) {
    std::copy(y, y + ds_->target_dim, out);
    std::copy(z, z + ds_->feat_dim, out + ds_->target_dim);
  } else {
    std::copy(z, z + ds_->feat_dim, out);
    std::copy(y, y + ds_->target_dim, out + ds_->feat_dim);
  }
}

// --------------------------------------------------------------------- CSV

namespace {

std::string trim_cell(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '"'))
    s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && (s[b] == ' ' || s[b] == '"')) ++b;
  return s.substr(b);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim_cell(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim_cell(cur));
  return out;
}

double parse_double(const std::string& cell, std::size_t row, std::size_t col) {
  double v = 0.0;
  const char* b = cell.data();
  const char* e = b + cell.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e)
    throw DataError("csv: non-numeric cell at row " + std::to_string(row) +
                    " column " + std::to_string(col) + ": '" + cell + "'");
  return v;
}

}  // namespace

void assign_split(Dataset& ds, std::uint64_t split_seed,
                  double test_fraction) {
  if (!(test_fraction >= 0.0) || test_fraction >= 1.0)
    throw DataError("split: test_fraction must lie in [0, 1)");
  std::vector<std::size_t> idx(ds.n);
  for (std::size_t i = 0; i < ds.n; ++i) idx[i] = i;
  RngStream rng(split_seed);
  rng.shuffle(idx);
  const auto n_test =
      static_cast<std::size_t>(std::floor(test_fraction * ds.n));
  ds.test_idx.assign(idx.begin(), idx.begin() + n_test);
  ds.train_idx.assign(idx.begin() + n_test, idx.end());
  std::sort(ds.test_idx.begin(), ds.test_idx.end());
  std::sort(ds.train_idx.begin(), ds.train_idx.end());
}

void standardize_fit_train(Dataset& ds) {
  if (ds.train_idx.empty())
    throw DataError("standardize: empty training split");
  auto fit_apply = [&](std::vector<double>& M, std::size_t cols, Vec& mean,
                       Vec& stdev, const char* what) {
    mean.assign(cols, 0.0);
    stdev.assign(cols, 0.0);
    const double nt = static_cast<double>(ds.train_idx.size());
    for (std::size_t j = 0; j < cols; ++j) {
      double s = 0.0;
      for (auto i : ds.train_idx) s += M[i * cols + j];
      const double mu = s / nt;
      double v = 0.0;
      for (auto i : ds.train_idx) {
        const double c = M[i * cols + j] - mu;
        v += c * c;
      }
      const double sd = std::sqrt(v / nt);
      if (sd < 1e-12)
        throw DataError(std::string("standardize: ") + what + " column " +
                        std::to_string(j) + " has zero spread on the train split");
      mean[j] = mu;
      stdev[j] = sd;
      for (std::size_t i = 0; i < ds.n; ++i)
        M[i * cols + j] = (M[i * cols + j] - mu) / sd;
    }
  };
  fit_apply(ds.X, ds.feat_dim, ds.feat_mean, ds.feat_std, "feature");
  fit_apply(ds.Y, ds.target_dim, ds.target_mean, ds.target_std, "target");
  ds.standardized = true;
}

Dataset load_concrete_csv(const std::string& path, std::uint64_t split_seed,
                          double test_fraction,
                          const std::string& manifest_path) {
  std::ifstream in(path);
  if (!in) throw DataError("csv: cannot open " + path);

  long expected_rows = -1, expected_cols = -1, n_features = -1;
  if (!manifest_path.empty()) {
    std::ifstream mf(manifest_path);
    if (!mf) throw DataError("csv: cannot open manifest " + manifest_path);
    nlohmann::json m;
    try {
      mf >> m;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("csv: bad manifest: " + std::string(e.what()));
    }
    if (m.contains("expected_rows")) expected_rows = m["expected_rows"].get<long>();
    if (m.contains("expected_cols")) expected_cols = m["expected_cols"].get<long>();
    if (m.contains("n_features")) n_features = m["n_features"].get<long>();
    if (m.contains("target_column") &&
        m["target_column"].get<std::string>() != "last")
      throw DataError("csv: manifest target_column must be \"last\"");
  }

  std::string line;
  if (!std::getline(in, line)) throw DataError("csv: empty file " + path);
  const auto header = split_csv_line(line);
  const std::size_t cols = header.size();
  if (cols < 2) throw DataError("csv: need at least two columns");
  if (expected_cols >= 0 && static_cast<long>(cols) != expected_cols)
    throw DataError("csv: column-count mismatch: expected " +
                    std::to_string(expected_cols) + ", found " +
                    std::to_string(cols));
  const std::size_t nfeat =
      n_features >= 0 ? static_cast<std::size_t>(n_features) : cols - 1;
  if (nfeat >= cols)
    throw DataError("csv: n_features " + std::to_string(nfeat) +
                    " leaves no target column among " + std::to_string(cols));

  Dataset ds;
  ds.feat_dim = nfeat;
  ds.target_dim = cols - nfeat;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != cols)
      throw DataError("csv: column-count mismatch at row " +
                      std::to_string(row) + ": expected " +
                      std::to_string(cols) + ", found " +
                      std::to_string(cells.size()));
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = parse_double(cells[j], row, j + 1);
      (j < nfeat ? ds.X : ds.Y).push_back(v);
    }
    ++ds.n;
  }
  if (ds.n == 0) throw DataError("csv: no data rows in " + path);
  if (expected_rows >= 0 && static_cast<long>(ds.n) != expected_rows)
    throw DataError("csv: row-count mismatch: expected " +
                    std::to_string(expected_rows) + ", found " +
                    std::to_string(ds.n));

  ds.provenance = "csv:" + path;
  assign_split(ds, split_seed, test_fraction);
  standardize_fit_train(ds);
  return ds;
}

// --------------------------------------------------------------------- IDX

namespace {

std::vector<unsigned char> read_all_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("idx: cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t off,
                   const std::string& path) {
  if (off + 4 > b.size()) throw DataError("idx: truncated header in " + path);
  return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
         (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path,
                 const std::string& labels_path, std::size_t subsample,
                 std::uint64_t subsample_seed) {
  const auto img = read_all_bytes(images_path);
  const auto lab = read_all_bytes(labels_path);

  if (be32(img, 0, images_path) != 0x00000803u)
    throw DataError("idx: bad image magic in " + images_path);
  if (be32(lab, 0, labels_path) != 0x00000801u)
    throw DataError("idx: bad label magic in " + labels_path);
  const std::size_t n = be32(img, 4, images_path);
  const std::size_t rows = be32(img, 8, images_path);
  const std::size_t cols = be32(img, 12, images_path);
  const std::size_t nl = be32(lab, 4, labels_path);
  if (n != nl)
    throw DataError("idx: image/label count mismatch: " + std::to_string(n) +
                    " vs " + std::to_string(nl));
  const std::size_t px = rows * cols;
  if (img.size() != 16 + n * px)
    throw DataError("idx: truncated image payload in " + images_path);
  if (lab.size() != 8 + n)
    throw DataError("idx: truncated label payload in " + labels_path);

  std::vector<std::size_t> keep;
  if (subsample > 0) {
    const std::size_t per = subsample / 10;
    std::vector<std::vector<std::size_t>> by_class(10);
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned c = lab[8 + i];
      if (c > 9)
        throw DataError("idx: label " + std::to_string(c) + " out of range at " +
                        std::to_string(i));
      by_class[c].push_back(i);
    }
    RngStream rng(subsample_seed);
    for (int c = 0; c < 10; ++c) {
      if (by_class[c].size() < per)
        throw DataError("idx: class " + std::to_string(c) + " has " +
                        std::to_string(by_class[c].size()) +
                        " examples, need " + std::to_string(per));
      rng.shuffle(by_class[c]);
      keep.insert(keep.end(), by_class[c].begin(), by_class[c].begin() + per);
    }
    std::sort(keep.begin(), keep.end());
  } else {
    keep.resize(n);
    for (std::size_t i = 0; i < n; ++i) keep[i] = i;
  }

  Dataset ds;
  ds.n = keep.size();
  ds.feat_dim = px;
  ds.target_dim = 10;
  ds.X.resize(ds.n * px);
  ds.Y.assign(ds.n * 10, 0.0);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const std::size_t i = keep[k];
    const unsigned c = lab[8 + i];
    if (c > 9)
      throw DataError("idx: label " + std::to_string(c) + " out of range at " +
                      std::to_string(i));
    for (std::size_t j = 0; j < px; ++j)
      ds.X[k * px + j] = img[16 + i * px + j] / 255.0;
    ds.Y[k * 10 + c] = 1.0;
  }
  ds.train_idx.resize(ds.n);
  for (std::size_t i = 0; i < ds.n; ++i) ds.train_idx[i] = i;
  ds.provenance = "idx:" + images_path;
  return ds;
}

Dataset merge_train_test(const Dataset& train, const Dataset& test) {
  if (train.feat_dim != test.feat_dim || train.target_dim != test.target_dim)
    throw DataError("merge: dimension mismatch between train and test parts");
  Dataset ds;
  ds.n = train.n + test.n;
  ds.feat_dim = train.feat_dim;
  ds.target_dim = train.target_dim;
  ds.X = train.X;
  ds.X.insert(ds.X.end(), test.X.begin(), test.X.end());
  ds.Y = train.Y;
  ds.Y.insert(ds.Y.end(), test.Y.begin(), test.Y.end());
  ds.train_idx.resize(train.n);
  for (std::size_t i = 0; i < train.n; ++i) ds.train_idx[i] = i;
  ds.test_idx.resize(test.n);
  for (std::size_t i = 0; i < test.n; ++i) ds.test_idx[i] = train.n + i;
  ds.provenance = train.provenance + "+" + test.provenance;
  return ds;
}

}  // namespace tusla
