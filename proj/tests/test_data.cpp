#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "tusla/data.hpp"

using namespace tusla;
namespace fs = std::filesystem;

namespace {

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

// Kolmogorov-Smirnov statistic scaled by sqrt(n) against an exact CDF.
double ks_sqrt_n(std::vector<double> xs, const DataLaw& law) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double c = law.cdf(xs[i]);
    d = std::max(d, std::abs(c - (i + 1) / n));
    d = std::max(d, std::abs(c - i / n));
  }
  return d * std::sqrt(n);
}

std::vector<double> draw_scalars(const DataLaw& law, std::size_t n,
                                 std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> xs(n);
  for (auto& x : xs) law.sample_into(rng, &x);
  return xs;
}

fs::path fresh_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("tusla_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& p, const std::string& body) {
  std::ofstream out(p);
  out << body;
}

void put_be32(std::vector<unsigned char>& b, std::uint32_t v) {
  b.push_back(static_cast<unsigned char>(v >> 24));
  b.push_back(static_cast<unsigned char>(v >> 16));
  b.push_back(static_cast<unsigned char>(v >> 8));
  b.push_back(static_cast<unsigned char>(v));
}

void write_idx_images(const fs::path& p, std::uint32_t n, std::uint32_t rows,
                      std::uint32_t cols,
                      const std::vector<unsigned char>& px) {
  std::vector<unsigned char> b;
  put_be32(b, 0x00000803u);
  put_be32(b, n);
  put_be32(b, rows);
  put_be32(b, cols);
  b.insert(b.end(), px.begin(), px.end());
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()),
            static_cast<std::streamsize>(b.size()));
}

void write_idx_labels(const fs::path& p, std::uint32_t n,
                      const std::vector<unsigned char>& labels) {
  std::vector<unsigned char> b;
  put_be32(b, 0x00000801u);
  put_be32(b, n);
  b.insert(b.end(), labels.begin(), labels.end());
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()),
            static_cast<std::streamsize>(b.size()));
}

// Deterministic hand-built regression table: every column strictly
// increasing so no subset of rows has zero spread.
Dataset tiny_dataset(std::size_t n) {
  Dataset ds;
  ds.n = n;
  ds.feat_dim = 2;
  ds.target_dim = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i);
    ds.X.push_back(0.5 + 1.5 * t);
    ds.X.push_back(-3.0 + 0.25 * t * t);
    ds.Y.push_back(10.0 - t);
  }
  return ds;
}

}  // namespace

TEST_CASE("beta22 density, cdf, sampler") {
  Beta22Law law;
  CHECK(law.dim() == 1);
  CHECK(law.name() == "beta22");
  CHECK(law.has_density());
  CHECK(law.density_sup() == 1.5);
  CHECK(law.density_lipschitz() == 6.0);
  CHECK(law.density(0.5) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(law.density(0.25) == doctest::Approx(1.125).epsilon(1e-15));
  CHECK(law.density(-0.1) == 0.0);
  CHECK(law.density(1.1) == 0.0);
  CHECK(law.cdf(0.0) == 0.0);
  CHECK(law.cdf(1.0) == 1.0);
  CHECK(law.cdf(0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(law.cdf(0.25) == doctest::Approx(0.15625).epsilon(1e-15));

  const auto xs = draw_scalars(law, 20000, 42);
  for (double x : xs) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
  // inverse-CDF sampler: KS distance must sit well inside the alpha=1e-3 band
  CHECK(ks_sqrt_n(xs, law) < 1.95);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  // Var(Beta(2,2)) = 1/20
  CHECK(std::abs(mean - 0.5) < 4.0 * std::sqrt(0.05 / 20000.0));
}

TEST_CASE("beta22 closed-form moments") {
  Beta22Law law;
  CHECK(law.has_analytic_moments());
  CHECK(rel_err(law.moment_one_plus_abs(1.0), 1.5) < 1e-12);
  CHECK(rel_err(law.moment_one_plus_abs(2.0), 2.3) < 1e-12);
  CHECK(rel_err(law.moment_one_plus_abs(4.0), 5.742857142857143) < 1e-12);
  CHECK(rel_err(law.moment_one_plus_abs(29.0), 12122891.568145161) < 1e-12);
  CHECK(rel_err(law.moment_one_plus_abs(58.0), 1825966261811344.2) < 1e-12);
  CHECK(rel_err(law.moment_one_plus_abs(112.0), 9.337112675682806e30) < 1e-12);
  CHECK(rel_err(law.moment_one_plus_abs(116.0), 1.3956410942562908e32) < 1e-12);
  // E[(1+2X)^k] for k = 0, 1, 2: 1, 2, 1 + 4 E[X] + 4 E[X^2] = 4.2
  CHECK(rel_err(law.moment_one_plus_two_abs(0.0), 1.0) < 1e-12);
  CHECK(rel_err(law.moment_one_plus_two_abs(1.0), 2.0) < 1e-12);
  CHECK(rel_err(law.moment_one_plus_two_abs(2.0), 4.2) < 1e-12);
}

TEST_CASE("std normal law") {
  StdNormalLaw law;
  CHECK(law.name() == "std_normal");
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  CHECK(rel_err(law.density_sup(), inv_sqrt_2pi) < 1e-15);
  CHECK(rel_err(law.density_lipschitz(), std::exp(-0.5) * inv_sqrt_2pi) <
        1e-15);
  CHECK(rel_err(law.density(0.0), inv_sqrt_2pi) < 1e-15);
  CHECK(law.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(law.cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-12));
  CHECK(law.cdf(-1.96) ==
        doctest::Approx(1.0 - 0.9750021048517795).epsilon(1e-12));

  CHECK(rel_err(law.moment_one_plus_abs(2.0), 3.5957691216057306) < 1e-12);
  CHECK(rel_err(law.moment_one_plus_abs(6.0), 151.00114871546936) < 1e-12);
  CHECK(rel_err(law.moment_one_plus_abs(116.0), 1.906085073557376e99) < 1e-12);
  // non-integer exponent goes through quadrature
  CHECK(rel_err(law.moment_one_plus_abs(2.5), 5.291713854101571) < 1e-8);
  const double e_abs = std::sqrt(2.0 / std::numbers::pi);
  CHECK(rel_err(law.moment_one_plus_two_abs(1.0), 1.0 + 2.0 * e_abs) < 1e-12);
  CHECK(rel_err(law.moment_one_plus_two_abs(2.0), 5.0 + 4.0 * e_abs) < 1e-12);
  CHECK(law.moment_one_plus_two_abs(0.0) == 1.0);

  const auto xs = draw_scalars(law, 20000, 7);
  CHECK(ks_sqrt_n(xs, law) < 1.95);
}

TEST_CASE("uniform laws") {
  Uniform01Law law;
  CHECK(law.density(0.5) == 1.0);
  CHECK(law.density(1.5) == 0.0);
  CHECK(law.cdf(0.25) == 0.25);
  CHECK(law.density_sup() == 1.0);
  CHECK(law.density_lipschitz() == 0.0);
  CHECK(rel_err(law.moment_one_plus_abs(3.0), 3.75) < 1e-12);
  CHECK(rel_err(law.moment_one_plus_abs(1.0), 1.5) < 1e-12);
  CHECK(rel_err(law.moment_one_plus_two_abs(1.0), 2.0) < 1e-12);
  CHECK(rel_err(law.moment_one_plus_two_abs(2.0), 26.0 / 6.0) < 1e-12);
  const auto xs = draw_scalars(law, 20000, 11);
  CHECK(ks_sqrt_n(xs, law) < 1.95);

  UniformBoxLaw box(3);
  CHECK(box.dim() == 3);
  CHECK_FALSE(box.has_density());
  CHECK_FALSE(box.has_analytic_moments());
  CHECK_THROWS_AS(box.density(0.5), std::logic_error);
  CHECK_THROWS_AS(box.density_sup(), std::logic_error);
  CHECK_THROWS_AS(box.moment_one_plus_abs(2.0), std::logic_error);
  CHECK_THROWS_AS(UniformBoxLaw(0), std::invalid_argument);
  RngStream rng(3);
  Vec buf(3);
  for (int i = 0; i < 1000; ++i) {
    box.sample_into(rng, buf.data());
    for (double v : buf) {
      CHECK(v >= 0.0);
      CHECK(v < 1.0);
    }
  }
  // sample() wrapper matches sample_into stream-for-stream
  RngStream r1(9), r2(9);
  const auto batch = box.sample(r1, 5);
  REQUIRE(batch.size() == 5);
  for (const auto& s : batch) {
    box.sample_into(r2, buf.data());
    REQUIRE(s.dim() == 3);
    for (std::size_t j = 0; j < 3; ++j) CHECK(s[j] == buf[j]);
  }
}

TEST_CASE("monte carlo moment fallback") {
  Beta22Law beta;
  RngStream rng(1234);
  const auto est = mc_moment_one_plus_abs(beta, 4.0, 200000, rng);
  CHECK(est.n == 200000);
  CHECK(est.stderror > 0.0);
  CHECK(std::abs(est.value - 5.742857142857143) <
        4.0 * est.stderror + 1e-12);

  // multivariate law: E[(1+|Z|)^2] over the unit square,
  // E|Z| = (sqrt(2) + asinh(1)) / 3
  UniformBoxLaw box(2);
  RngStream rng2(99);
  const auto est2 = mc_moment_one_plus_abs(box, 2.0, 200000, rng2);
  CHECK(std::abs(est2.value - 3.197058099595092) <
        4.0 * est2.stderror + 1e-12);

  RngStream rng3(5);
  CHECK_THROWS_AS(mc_moment_one_plus_abs(beta, 2.0, 1, rng3),
                  std::invalid_argument);
}

TEST_CASE("assign_split determinism and bounds") {
  Dataset ds = tiny_dataset(10);
  assign_split(ds, 7, 0.3);
  CHECK(ds.test_idx.size() == 3);
  CHECK(ds.train_idx.size() == 7);
  CHECK(std::is_sorted(ds.train_idx.begin(), ds.train_idx.end()));
  CHECK(std::is_sorted(ds.test_idx.begin(), ds.test_idx.end()));
  std::set<std::size_t> all(ds.train_idx.begin(), ds.train_idx.end());
  all.insert(ds.test_idx.begin(), ds.test_idx.end());
  CHECK(all.size() == 10);
  CHECK(*all.begin() == 0);
  CHECK(*all.rbegin() == 9);

  Dataset ds2 = tiny_dataset(10);
  assign_split(ds2, 7, 0.3);
  CHECK(ds2.train_idx == ds.train_idx);
  CHECK(ds2.test_idx == ds.test_idx);
  Dataset ds3 = tiny_dataset(10);
  assign_split(ds3, 8, 0.3);
  CHECK(ds3.test_idx != ds.test_idx);

  Dataset ds4 = tiny_dataset(10);
  assign_split(ds4, 1, 0.0);
  CHECK(ds4.test_idx.empty());
  CHECK(ds4.train_idx.size() == 10);
  CHECK_THROWS_AS(assign_split(ds4, 1, 1.0), DataError);
  CHECK_THROWS_AS(assign_split(ds4, 1, -0.1), DataError);
}

TEST_CASE("standardize_fit_train") {
  Dataset ds = tiny_dataset(12);
  const Dataset raw = ds;
  assign_split(ds, 3, 0.25);
  standardize_fit_train(ds);
  CHECK(ds.standardized);
  REQUIRE(ds.feat_mean.size() == 2);
  REQUIRE(ds.feat_std.size() == 2);
  REQUIRE(ds.target_mean.size() == 1);

  const double nt = static_cast<double>(ds.train_idx.size());
  for (std::size_t j = 0; j < 2; ++j) {
    double s = 0.0, s2 = 0.0;
    for (auto i : ds.train_idx) {
      s += ds.X[i * 2 + j];
      s2 += ds.X[i * 2 + j] * ds.X[i * 2 + j];
    }
    CHECK(std::abs(s / nt) < 1e-12);          // train mean 0
    CHECK(std::abs(s2 / nt - 1.0) < 1e-12);   // train (population) var 1
  }
  // every row, including test rows, transformed with the train statistics
  for (std::size_t i = 0; i < ds.n; ++i) {
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(ds.X[i * 2 + j] * ds.feat_std[j] + ds.feat_mean[j] ==
            doctest::Approx(raw.X[i * 2 + j]).epsilon(1e-12));
    CHECK(ds.Y[i] * ds.target_std[0] + ds.target_mean[0] ==
          doctest::Approx(raw.Y[i]).epsilon(1e-12));
  }

  Dataset flat = tiny_dataset(8);
  for (std::size_t i = 0; i < flat.n; ++i) flat.X[i * 2 + 1] = 3.0;
  assign_split(flat, 1, 0.25);
  CHECK_THROWS_AS(standardize_fit_train(flat), DataError);

  Dataset no_split = tiny_dataset(8);
  CHECK_THROWS_AS(standardize_fit_train(no_split), DataError);
}

TEST_CASE("csv loader round trip") {
  const fs::path dir = fresh_dir("csv");
  const fs::path csv = dir / "table.csv";
  std::string body = "f1, f2, y\r\n";
  Dataset raw = tiny_dataset(12);
  for (std::size_t i = 0; i < raw.n; ++i) {
    char line[128];
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", raw.X[i * 2],
                  raw.X[i * 2 + 1], raw.Y[i]);
    body += line;
    if (i == 5) body += "\n";  // blank line is skipped
  }
  write_text(csv, body);

  const Dataset ds = load_concrete_csv(csv.string(), 3, 0.25);
  CHECK(ds.n == 12);
  CHECK(ds.feat_dim == 2);
  CHECK(ds.target_dim == 1);
  CHECK(ds.test_idx.size() == 3);
  CHECK(ds.standardized);
  CHECK(ds.provenance == "csv:" + csv.string());
  for (std::size_t i = 0; i < ds.n; ++i) {
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(ds.X[i * 2 + j] * ds.feat_std[j] + ds.feat_mean[j] ==
            doctest::Approx(raw.X[i * 2 + j]).epsilon(1e-12));
    CHECK(ds.Y[i] * ds.target_std[0] + ds.target_mean[0] ==
          doctest::Approx(raw.Y[i]).epsilon(1e-12));
  }
  // identical seed reloads to the same split
  const Dataset again = load_concrete_csv(csv.string(), 3, 0.25);
  CHECK(again.train_idx == ds.train_idx);
  CHECK(again.X == ds.X);
}

TEST_CASE("csv manifest handling") {
  const fs::path dir = fresh_dir("csv_manifest");
  const fs::path csv = dir / "t.csv";
  write_text(csv,
             "a,b,c\n1,2,3\n4,5,6\n7,8,10\n2,9,1\n5,1,4\n8,3,2\n"
             "3,6,9\n6,4,7\n9,7,5\n0,0.5,8\n");
  const fs::path good = dir / "good.json";
  write_text(good,
             "{\"n_features\": 1, \"target_column\": \"last\","
             " \"expected_rows\": 10, \"expected_cols\": 3,"
             " \"note\": \"fixture\"}\n");
  const Dataset ds = load_concrete_csv(csv.string(), 1, 0.2, good.string());
  CHECK(ds.feat_dim == 1);
  CHECK(ds.target_dim == 2);

  const fs::path bad_rows = dir / "rows.json";
  write_text(bad_rows, "{\"expected_rows\": 9}\n");
  CHECK_THROWS_AS(load_concrete_csv(csv.string(), 1, 0.2, bad_rows.string()),
                  DataError);
  const fs::path bad_cols = dir / "cols.json";
  write_text(bad_cols, "{\"expected_cols\": 4}\n");
  CHECK_THROWS_AS(load_concrete_csv(csv.string(), 1, 0.2, bad_cols.string()),
                  DataError);
  const fs::path bad_target = dir / "target.json";
  write_text(bad_target, "{\"target_column\": \"first\"}\n");
  CHECK_THROWS_AS(
      load_concrete_csv(csv.string(), 1, 0.2, bad_target.string()), DataError);
  const fs::path bad_json = dir / "broken.json";
  write_text(bad_json, "{not json\n");
  CHECK_THROWS_AS(load_concrete_csv(csv.string(), 1, 0.2, bad_json.string()),
                  DataError);
  CHECK_THROWS_AS(
      load_concrete_csv(csv.string(), 1, 0.2, (dir / "absent.json").string()),
      DataError);
  const fs::path all_feat = dir / "allfeat.json";
  write_text(all_feat, "{\"n_features\": 3}\n");
  CHECK_THROWS_AS(
      load_concrete_csv(csv.string(), 1, 0.2, all_feat.string()), DataError);
}

TEST_CASE("csv malformed inputs") {
  const fs::path dir = fresh_dir("csv_bad");
  CHECK_THROWS_AS(load_concrete_csv((dir / "missing.csv").string(), 1),
                  DataError);

  const fs::path empty = dir / "empty.csv";
  write_text(empty, "");
  CHECK_THROWS_AS(load_concrete_csv(empty.string(), 1), DataError);

  const fs::path onecol = dir / "onecol.csv";
  write_text(onecol, "y\n1\n2\n");
  CHECK_THROWS_AS(load_concrete_csv(onecol.string(), 1), DataError);

  const fs::path header_only = dir / "header.csv";
  write_text(header_only, "a,b\n");
  CHECK_THROWS_AS(load_concrete_csv(header_only.string(), 1), DataError);

  const fs::path nonnum = dir / "nonnum.csv";
  write_text(nonnum, "a,b\n1,2\n3,oops\n");
  CHECK_THROWS_AS(load_concrete_csv(nonnum.string(), 1), DataError);

  const fs::path ragged = dir / "ragged.csv";
  write_text(ragged, "a,b\n1,2\n3,4,5\n");
  CHECK_THROWS_AS(load_concrete_csv(ragged.string(), 1), DataError);
}

TEST_CASE("idx loader") {
  const fs::path dir = fresh_dir("idx");
  const std::uint32_t n = 20, rows = 2, cols = 3, px = rows * cols;
  std::vector<unsigned char> img(n * px);
  for (std::size_t i = 0; i < img.size(); ++i)
    img[i] = static_cast<unsigned char>((i * 7 + 13) % 256);
  std::vector<unsigned char> lab(n);
  for (std::size_t i = 0; i < n; ++i)
    lab[i] = static_cast<unsigned char>(i % 10);
  const fs::path ip = dir / "img.idx", lp = dir / "lab.idx";
  write_idx_images(ip, n, rows, cols, img);
  write_idx_labels(lp, n, lab);

  const Dataset ds = load_idx(ip.string(), lp.string());
  CHECK(ds.n == 20);
  CHECK(ds.feat_dim == px);
  CHECK(ds.target_dim == 10);
  CHECK(ds.train_idx.size() == 20);
  CHECK(ds.test_idx.empty());
  CHECK_FALSE(ds.standardized);
  CHECK(ds.provenance == "idx:" + ip.string());
  for (std::size_t i = 0; i < ds.n; ++i) {
    for (std::size_t j = 0; j < px; ++j)
      CHECK(ds.X[i * px + j] == img[i * px + j] / 255.0);
    for (int c = 0; c < 10; ++c)
      CHECK(ds.Y[i * 10 + c] == (c == static_cast<int>(i % 10) ? 1.0 : 0.0));
  }

  // stratified subsample: one representative per class
  const Dataset sub = load_idx(ip.string(), lp.string(), 10, 5);
  CHECK(sub.n == 10);
  Vec class_count(10, 0.0);
  for (std::size_t i = 0; i < sub.n; ++i)
    for (int c = 0; c < 10; ++c) class_count[c] += sub.Y[i * 10 + c];
  for (int c = 0; c < 10; ++c) CHECK(class_count[c] == 1.0);
  const Dataset sub2 = load_idx(ip.string(), lp.string(), 10, 5);
  CHECK(sub2.X == sub.X);
  // each class has only 2 examples; asking for 3 per class fails
  CHECK_THROWS_AS(load_idx(ip.string(), lp.string(), 30, 5), DataError);
}

TEST_CASE("idx malformed inputs") {
  const fs::path dir = fresh_dir("idx_bad");
  const std::uint32_t n = 4, rows = 1, cols = 2;
  std::vector<unsigned char> img(n * rows * cols, 100);
  std::vector<unsigned char> lab = {0, 1, 2, 3};
  const fs::path ip = dir / "img.idx", lp = dir / "lab.idx";
  write_idx_images(ip, n, rows, cols, img);
  write_idx_labels(lp, n, lab);

  CHECK_THROWS_AS(load_idx((dir / "nope.idx").string(), lp.string()),
                  DataError);
  CHECK_THROWS_AS(load_idx(lp.string(), lp.string()), DataError);  // magic
  CHECK_THROWS_AS(load_idx(ip.string(), ip.string()), DataError);

  const fs::path short_img = dir / "short.idx";
  write_idx_images(short_img, n, rows, cols,
                   std::vector<unsigned char>(n * rows * cols - 1, 1));
  CHECK_THROWS_AS(load_idx(short_img.string(), lp.string()), DataError);

  const fs::path few_labels = dir / "few.idx";
  write_idx_labels(few_labels, n - 1, {0, 1, 2});
  CHECK_THROWS_AS(load_idx(ip.string(), few_labels.string()), DataError);

  const fs::path bad_label = dir / "bad_label.idx";
  write_idx_labels(bad_label, n, {0, 1, 12, 3});
  CHECK_THROWS_AS(load_idx(ip.string(), bad_label.string()), DataError);
}

TEST_CASE("merge_train_test") {
  const fs::path dir = fresh_dir("merge");
  const std::uint32_t rows = 1, cols = 2, px = 2;
  std::vector<unsigned char> img1 = {10, 20, 30, 40, 50, 60};
  std::vector<unsigned char> img2 = {70, 80, 90, 100};
  write_idx_images(dir / "tr.idx", 3, rows, cols, img1);
  write_idx_labels(dir / "trl.idx", 3, {0, 1, 2});
  write_idx_images(dir / "te.idx", 2, rows, cols, img2);
  write_idx_labels(dir / "tel.idx", 2, {3, 4});

  const Dataset tr = load_idx((dir / "tr.idx").string(),
                              (dir / "trl.idx").string());
  const Dataset te = load_idx((dir / "te.idx").string(),
                              (dir / "tel.idx").string());
  const Dataset ds = merge_train_test(tr, te);
  CHECK(ds.n == 5);
  CHECK(ds.train_idx == std::vector<std::size_t>{0, 1, 2});
  CHECK(ds.test_idx == std::vector<std::size_t>{3, 4});
  CHECK(ds.X[3 * px] == 70.0 / 255.0);
  CHECK(ds.Y[3 * 10 + 3] == 1.0);
  CHECK(ds.provenance ==
        "idx:" + (dir / "tr.idx").string() + "+idx:" + (dir / "te.idx").string());

  Dataset other = tiny_dataset(4);
  CHECK_THROWS_AS(merge_train_test(tr, other), DataError);
}

TEST_CASE("empirical law resampling") {
  auto ds = std::make_shared<Dataset>(tiny_dataset(3));
  EmpiricalLaw law(ds, false);
  CHECK(law.dim() == 3);
  CHECK(law.name() == "empirical");

  RngStream rng(17);
  Vec buf(3);
  std::vector<int> hits(3, 0);
  for (int t = 0; t < 3000; ++t) {
    law.sample_into(rng, buf.data());
    bool matched = false;
    for (std::size_t i = 0; i < 3; ++i) {
      if (buf[0] == ds->X[i * 2] && buf[1] == ds->X[i * 2 + 1] &&
          buf[2] == ds->Y[i]) {
        ++hits[i];
        matched = true;
        break;
      }
    }
    CHECK(matched);
  }
  for (int h : hits) CHECK(h > 800);  // roughly uniform across rows

  EmpiricalLaw yfirst(ds, true);
  RngStream rng2(17);
  yfirst.sample_into(rng2, buf.data());
  // same stream, same row, targets leading
  const std::size_t row = [&] {
    RngStream probe(17);
    return probe.uniform_below(3);
  }();
  CHECK(buf[0] == ds->Y[row]);
  CHECK(buf[1] == ds->X[row * 2]);
  CHECK(buf[2] == ds->X[row * 2 + 1]);

  auto empty = std::make_shared<Dataset>();
  CHECK_THROWS_AS(EmpiricalLaw(empty, false), std::invalid_argument);
}
