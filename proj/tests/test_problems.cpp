#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "doctest.h"
#include "tusla/data.hpp"
#include "tusla/problems.hpp"

using namespace tusla;

namespace {

std::shared_ptr<const DataLaw> beta22() {
  return std::make_shared<Beta22Law>();
}

std::shared_ptr<const DataLaw> std_normal() {
  return std::make_shared<StdNormalLaw>();
}

// central difference of a scalar objective in coordinate k
double fd_partial(const std::function<double(const Vec&)>& f, Vec theta,
                  std::size_t k) {
  const double h = 1e-6 * std::max(1.0, std::abs(theta[k]));
  const double orig = theta[k];
  theta[k] = orig + h;
  const double fp = f(theta);
  theta[k] = orig - h;
  const double fm = f(theta);
  return (fp - fm) / (2.0 * h);
}

// max over coordinates of |fd - analytic| / max(margin, |analytic|)
double fd_worst_rel(const std::function<double(const Vec&)>& f,
                    const Vec& theta, const Vec& grad, double margin = 1e-3) {
  double worst = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double fd = fd_partial(f, theta, k);
    const double rel =
        std::abs(fd - grad[k]) / std::max(margin, std::abs(grad[k]));
    worst = std::max(worst, rel);
  }
  return worst;
}

Vec uniform_vec(RngStream& rng, std::size_t n, double lo, double hi) {
  Vec v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

Dataset random_regression(std::size_t n, std::size_t feat, std::size_t targ,
                          std::uint64_t seed) {
  Dataset ds;
  ds.n = n;
  ds.feat_dim = feat;
  ds.target_dim = targ;
  RngStream rng(seed);
  ds.X = uniform_vec(rng, n * feat, -1.0, 1.0);
  ds.Y = uniform_vec(rng, n * targ, -1.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) ds.train_idx.push_back(i);
  return ds;
}

}  // namespace

TEST_CASE("artificial problem closed forms") {
  ArtificialProblem prob(2.0, 1.0, beta22());
  CHECK(prob.a1() == 2.0);
  CHECK(prob.a2() == 1.0);
  CHECK(prob.dim_param() == 1);
  CHECK(prob.dim_data() == 1);
  CHECK(prob.q() == 3.0);
  CHECK(prob.r() == 14.0);
  CHECK(prob.rho() == 1.0);
  CHECK(prob.data_law()->name() == "beta22");

  // inside |theta| <= 1: a1 theta^2 (x <= theta), a2 theta^2 (x > theta)
  CHECK(prob.U1(0.0, 0.3) == 0.0);
  CHECK(prob.U1(0.0, -0.3) == 0.0);
  const double p30 = std::pow(0.5, 30);
  CHECK(prob.U1(0.5, 0.9) == doctest::Approx(0.25 + p30).epsilon(1e-15));
  CHECK(prob.U1(0.5, 0.3) == doctest::Approx(0.5 + p30).epsilon(1e-15));
  CHECK(prob.U1(-0.5, 0.3) == doctest::Approx(0.25 + p30).epsilon(1e-15));
  // outside: (2 a1 |theta| - a1) or (2 a2 |theta| - a2)
  const double q30 = std::pow(1.5, 30);
  CHECK(prob.U1(1.5, 0.3) == doctest::Approx(4.0 + q30).epsilon(1e-15));
  CHECK(prob.U1(-1.5, 0.3) == doctest::Approx(2.0 + q30).epsilon(1e-15));

  CHECK(prob.F1(0.5) == 30.0 * std::pow(0.5, 29));
  CHECK(prob.F1(-1.2) ==
        doctest::Approx(30.0 * std::pow(-1.2, 29)).epsilon(1e-14));
  CHECK(prob.F1(0.0) == 0.0);

  // G pins with f(0.5) = 1.5 and f = 0 outside [0, 1]
  CHECK(prob.G1(0.5, 0.3) == doctest::Approx(2.375).epsilon(1e-15));
  CHECK(prob.G1(0.5, 0.9) == doctest::Approx(1.375).epsilon(1e-15));
  CHECK(prob.G1(1.5, 0.3) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(prob.G1(-1.5, 0.3) == doctest::Approx(-2.0).epsilon(1e-15));

  // u(theta) = theta^2 (a2 + (a1-a2) P(X <= theta)) + theta^30 inside
  CHECK(prob.u_exact1(0.0) == 0.0);
  CHECK(prob.u_exact1(0.5) == doctest::Approx(0.375 + p30).epsilon(1e-14));
  CHECK(prob.u_exact1(1.5) == doctest::Approx(4.0 + q30).epsilon(1e-14));
  CHECK(prob.h_exact1(0.0) == 0.0);
  CHECK(prob.h_exact1(0.5) ==
        doctest::Approx(1.875 + 30.0 * std::pow(0.5, 29)).epsilon(1e-14));

  ArtificialProblem gauss(2.0, 1.0, std_normal());
  const double f15 = std_normal()->density(1.5);
  CHECK(gauss.G1(1.5, 0.3) == doctest::Approx(4.0 + 2.0 * f15).epsilon(1e-14));
}

TEST_CASE("artificial continuity across the unit circle") {
  const double h = 1e-9;
  for (auto law : {beta22(), std_normal()}) {
    ArtificialProblem prob(2.0, 1.0, law);
    for (double s : {1.0, -1.0}) {
      for (double x : {-0.4, 0.3, 2.0}) {
        CHECK(std::abs(prob.U1(s - s * h, x) - prob.U1(s + s * h, x)) < 1e-6);
        CHECK(std::abs(prob.G1(s - s * h, x) - prob.G1(s + s * h, x)) < 1e-6);
      }
      CHECK(std::abs(prob.u_exact1(s - s * h) - prob.u_exact1(s + s * h)) <
            1e-6);
      // h is continuous but locally ~900-Lipschitz near the circle
      CHECK(std::abs(prob.h_exact1(s - s * h) - prob.h_exact1(s + s * h)) <
            1e-5);
    }
  }
}

TEST_CASE("artificial h_exact is the derivative of u_exact") {
  for (auto law : {beta22(), std_normal()}) {
    ArtificialProblem prob(2.0, 1.0, law);
    for (double th : {-1.8, -1.2, -0.7, -0.3, 0.2, 0.6, 0.9, 1.3, 1.7}) {
      const double h = 1e-6;
      const double fd =
          (prob.u_exact1(th + h) - prob.u_exact1(th - h)) / (2.0 * h);
      const double ana = prob.h_exact1(th);
      CHECK(std::abs(fd - ana) / std::max(1.0, std::abs(ana)) < 1e-7);
    }
  }
}

TEST_CASE("artificial vector interface matches scalars") {
  ArtificialProblem prob(2.0, 1.0, beta22());
  const Vec theta{0.7};
  const double x = 0.4;
  Vec out;
  CHECK(prob.eval_U(theta, &x) == prob.U1(0.7, x));
  prob.eval_F(theta, &x, out);
  CHECK(out[0] == prob.F1(0.7));
  prob.eval_G(theta, &x, out);
  CHECK(out[0] == prob.G1(0.7, x));
  CHECK(prob.has_u_exact());
  CHECK(prob.has_h_exact());
  CHECK(prob.u_exact(theta) == prob.u_exact1(0.7));
  prob.h_exact(theta, out);
  CHECK(out[0] == prob.h_exact1(0.7));

  CHECK_THROWS_AS(ArtificialProblem(2.0, 1.0, nullptr), std::invalid_argument);
  CHECK_THROWS_AS(
      ArtificialProblem(2.0, 1.0, std::make_shared<UniformBoxLaw>(2)),
      std::invalid_argument);
  CHECK_THROWS_AS(
      ArtificialProblem(2.0, 1.0, std::make_shared<UniformBoxLaw>(1)),
      std::invalid_argument);  // no density
}

TEST_CASE("fixed input net forward and gradients by hand") {
  // d1 = 2, m1 = 2, m2 = 1, frozen rows (1, 0) and (0, -1)
  FixedInputNet net(2, 2, 1, {1.0, 0.0, 0.0, -1.0}, 0.1);
  CHECK(net.dim_param() == 4);
  CHECK(net.dim_data() == 3);
  CHECK(net.q() == 4.0);
  CHECK(net.r() == 2.0);
  CHECK(net.rho() == 2.0);
  CHECK(net.c_frobenius() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

  const Vec theta{2.0, 3.0, 0.5, -0.1};  // W = (2, 3), b0 = (0.5, -0.1)
  const double z[2] = {1.0, 0.25};
  Vec out;
  net.forward(theta, z, out);
  REQUIRE(out.size() == 1);
  // pre = (0.5 + 1, -0.1 - 0.25) -> relu (1.5, 0); out = 2 * 1.5
  CHECK(out[0] == doctest::Approx(3.0).epsilon(1e-15));

  const double x[3] = {2.0, 1.0, 0.25};  // y = 2, then z
  CHECK(net.eval_U(theta, x) == doctest::Approx(1.0).epsilon(1e-14));
  Vec g;
  net.eval_G(theta, x, g);
  REQUIRE(g.size() == 4);
  CHECK(g[0] == doctest::Approx(3.0).epsilon(1e-14));   // -2 err relu_0
  CHECK(g[1] == 0.0);
  CHECK(g[2] == doctest::Approx(4.0).epsilon(1e-14));   // -2 err W_0
  CHECK(g[3] == 0.0);                                   // inactive unit

  Vec f;
  net.eval_F(theta, x, f);
  const double coef = 0.1 * norm_sq(theta) * norm_sq(theta);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(f[i] == doctest::Approx(coef * theta[i]).epsilon(1e-14));

  CHECK_THROWS_AS(FixedInputNet(0, 2, 1, {}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(FixedInputNet(2, 2, 1, {1.0, 0.0}, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(FixedInputNet(2, 2, 1, {1.0, 0.0, 0.0, -1.0}, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(FixedInputNet(2, 2, 1, {1.0, 0.0, 0.0, 0.0}, 0.1),
                  std::invalid_argument);  // all-zero frozen row
}

TEST_CASE("fixed input net finite differences") {
  const std::size_t d1 = 3, m1 = 2, m2 = 2;
  RngStream crng(12);
  const std::vector<double> c = uniform_vec(crng, d1 * m1, -1.0, 1.0);
  FixedInputNet net(d1, m1, m2, c, 1e-3);
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 30 && checked < 15; ++seed) {
    RngStream rng(seed);
    const Vec theta = uniform_vec(rng, net.dim_param(), -1.0, 1.0);
    const Vec zy = uniform_vec(rng, m1 + m2, -1.0, 1.0);
    const double* y = zy.data();
    const double* z = zy.data() + m2;
    // keep away from the relu kink so the objective is smooth locally
    double margin = 1e9;
    for (std::size_t j = 0; j < d1; ++j) {
      double pre = theta[m2 * d1 + j];
      for (std::size_t k = 0; k < m1; ++k) pre += c[j * m1 + k] * z[k];
      margin = std::min(margin, std::abs(pre));
    }
    if (margin < 1e-3) continue;
    (void)y;
    Vec g;
    net.eval_G(theta, zy.data(), g);
    auto f = [&](const Vec& t) { return net.eval_U(t, zy.data()); };
    CHECK(fd_worst_rel(f, theta, g) < 1e-5);
    ++checked;
  }
  CHECK(checked >= 15);
}

TEST_CASE("fixed input net xavier init") {
  FixedInputNet net(4, 3, 2, std::vector<double>(12, 0.5), 0.1);
  const double bound = std::sqrt(6.0 / (4.0 + 2.0));
  RngStream rng(5);
  const ParamVector p = net.xavier_init(rng);
  REQUIRE(p.dim() == 12);
  double mx = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(std::abs(p[i]) <= bound);
    mx = std::max(mx, std::abs(p[i]));
  }
  CHECK(mx > 0.0);
  for (std::size_t i = 8; i < 12; ++i) CHECK(p[i] == 0.0);  // b0 = 0
  RngStream rng2(5);
  const ParamVector q = net.xavier_init(rng2);
  for (std::size_t i = 0; i < 12; ++i) CHECK(q[i] == p[i]);
}

TEST_CASE("ffn parameter layout") {
  FeedForwardNet net(3,
                     {{4, Activation::ReLU, true},
                      {2, Activation::Tanh, false},
                      {1, Activation::Identity, true}},
                     LossKind::Squared, 0.0, 0.5);
  CHECK(net.n_params() == 27);  // 12 + 4 + 8 + 2 + 1
  CHECK(net.in_dim() == 3);
  CHECK(net.out_dim() == 1);
  CHECK(net.dim_param() == 27);
  CHECK(net.dim_data() == 4);
  CHECK(net.layer_weight_range(0) == std::pair<std::size_t, std::size_t>{0, 12});
  CHECK(net.layer_weight_range(1) ==
        std::pair<std::size_t, std::size_t>{16, 24});
  CHECK(net.layer_weight_range(2) ==
        std::pair<std::size_t, std::size_t>{24, 26});
  CHECK_FALSE(net.metric_is_accuracy());

  // zero weights: output equals the last bias regardless of the input
  Vec theta(27, 0.0);
  theta[26] = 0.7;
  FfnWorkspace ws;
  Vec out;
  const double z[3] = {0.3, -2.0, 5.0};
  net.forward(theta, z, out, ws);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == 0.7);

  CHECK_THROWS_AS(FeedForwardNet(0, {{2}}, LossKind::Squared, 0.0, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(FeedForwardNet(2, {}, LossKind::Squared, 0.0, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(FeedForwardNet(2, {{0}}, LossKind::Squared, 0.0, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(FeedForwardNet(2, {{2}}, LossKind::Squared, -1.0, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(FeedForwardNet(2, {{2}}, LossKind::Squared, 1.0, -0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(FeedForwardNet(2, {{3, Activation::ReLU, true}},
                                 LossKind::SoftmaxCrossEntropy, 0.0, 0.5),
                  std::invalid_argument);
}

TEST_CASE("ffn softmax cross entropy") {
  FeedForwardNet net(2, {{3, Activation::Identity, true}},
                     LossKind::SoftmaxCrossEntropy, 0.0, 0.5);
  CHECK(net.metric_is_accuracy());
  // zero parameters: uniform softmax, loss log 3 for any one-hot target
  Vec theta(net.n_params(), 0.0);
  const double x0[5] = {0.4, -0.2, 0.0, 1.0, 0.0};  // [z; y], class 1
  CHECK(net.eval_U(theta, x0) == doctest::Approx(std::log(3.0)).epsilon(1e-14));

  // logits (0, 1, 0) for z = (1, 0): W row 1 = (1, 0)
  theta[2] = 1.0;  // W[1][0]
  const double x1[5] = {1.0, 0.0, 0.0, 1.0, 0.0};
  CHECK(net.eval_U(theta, x1) ==
        doctest::Approx(std::log(2.0 + std::exp(1.0)) - 1.0).epsilon(1e-14));

  // accuracy metric: argmax(logits) vs argmax(y)
  Dataset ds;
  ds.n = 4;
  ds.feat_dim = 2;
  ds.target_dim = 3;
  ds.X = {1.0, 0.0, 1.0, 0.5, -1.0, 0.0, 0.2, 0.1};
  ds.Y = {0.0, 1.0, 0.0,  // predicted 1: hit
          1.0, 0.0, 0.0,  // predicted 1: miss
          0.0, 1.0, 0.0,  // logits (0,-1,0): argmax 0, miss
          0.0, 0.0, 1.0}; // logits (0,0.2,0): argmax 1, miss
  ds.train_idx = {0, 1, 2, 3};
  auto ws = net.make_workspace();
  CHECK(net.dataset_metric(theta, ds, ds.train_idx, *ws) ==
        doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("ffn relu derivative at zero is zero") {
  FeedForwardNet net(1, {{1, Activation::ReLU, true}}, LossKind::Squared, 0.0,
                     0.5);
  const Vec theta{1.0, 0.0};  // w = 1, b = 0
  const double x[2] = {0.0, 1.0};  // z = 0 -> pre = 0, y = 1
  CHECK(net.eval_U(theta, x) == 1.0);
  Vec g;
  net.eval_G(theta, x, g);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
}

TEST_CASE("ffn finite differences, squared loss with relu") {
  FeedForwardNet net(3,
                     {{6, Activation::ReLU, true},
                      {5, Activation::Tanh, true},
                      {2, Activation::Identity, true}},
                     LossKind::Squared, 0.0, 0.5);
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 30 && checked < 10; ++seed) {
    RngStream rng(seed);
    const ParamVector init = net.xavier_init(rng);
    Vec theta = init.values();
    for (auto& t : theta) t += rng.uniform(-0.1, 0.1);  // nonzero biases
    const Vec zy = uniform_vec(rng, 5, -1.0, 1.0);
    // relu layer pre-activations, from the documented flat layout
    double margin = 1e9;
    for (std::size_t i = 0; i < 6; ++i) {
      double pre = theta[18 + i];
      for (std::size_t j = 0; j < 3; ++j) pre += theta[i * 3 + j] * zy[j];
      margin = std::min(margin, std::abs(pre));
    }
    if (margin < 1e-3) continue;
    Vec g;
    net.eval_G(theta, zy.data(), g);
    auto f = [&](const Vec& t) { return net.eval_U(t, zy.data()); };
    CHECK(fd_worst_rel(f, theta, g) < 1e-5);
    ++checked;
  }
  CHECK(checked >= 10);
}

TEST_CASE("ffn finite differences, cross entropy") {
  FeedForwardNet net(4,
                     {{8, Activation::Tanh, true},
                      {3, Activation::Identity, true}},
                     LossKind::SoftmaxCrossEntropy, 0.0, 0.5);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream rng(seed);
    const ParamVector init = net.xavier_init(rng);
    Vec theta = init.values();
    for (auto& t : theta) t += rng.uniform(-0.1, 0.1);
    Vec zy = uniform_vec(rng, 7, -1.0, 1.0);
    zy[4] = zy[5] = zy[6] = 0.0;
    zy[4 + rng.uniform_below(3)] = 1.0;  // one-hot target
    Vec g;
    net.eval_G(theta, zy.data(), g);
    auto f = [&](const Vec& t) { return net.eval_U(t, zy.data()); };
    CHECK(fd_worst_rel(f, theta, g) < 1e-5);
  }
}

TEST_CASE("ffn ridge term") {
  FeedForwardNet net(2, {{2, Activation::Tanh, true}}, LossKind::Squared, 0.2,
                     1.5);
  RngStream rng(3);
  const Vec theta = uniform_vec(rng, net.n_params(), -1.0, 1.0);
  Vec f;
  net.eval_F(theta, nullptr, f);
  const double coef = 0.2 * std::pow(norm_sq(theta), 1.5);
  for (std::size_t i = 0; i < theta.size(); ++i)
    CHECK(f[i] == doctest::Approx(coef * theta[i]).epsilon(1e-14));

  // batch objective: mean sample loss + eta/(2(r+1)) |theta|^(2(r+1))
  Dataset ds = random_regression(6, 2, 2, 7);
  auto ws = net.make_workspace();
  const std::size_t idx[3] = {0, 2, 4};
  Vec grad;
  const double obj = net.batch_objective_grad(theta, ds, idx, 3, grad, *ws);
  double mean_loss = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    Vec zy(ds.x_row(idx[k]), ds.x_row(idx[k]) + 2);
    zy.insert(zy.end(), ds.y_row(idx[k]), ds.y_row(idx[k]) + 2);
    mean_loss += net.eval_U(theta, zy.data());
  }
  mean_loss /= 3.0;
  const double ridge = 0.2 / 5.0 * std::pow(norm_sq(theta), 2.5);
  CHECK(obj == doctest::Approx(mean_loss + ridge).epsilon(1e-13));

  auto fobj = [&](const Vec& t) {
    Vec g2;
    return net.batch_objective_grad(t, ds, idx, 3, g2, *ws);
  };
  CHECK(fd_worst_rel(fobj, theta, grad) < 1e-5);

  CHECK_THROWS_AS(net.batch_objective_grad(theta, ds, idx, 0, grad, *ws),
                  std::invalid_argument);
  Dataset bad = random_regression(4, 3, 2, 8);
  CHECK_THROWS_AS(net.batch_objective_grad(theta, bad, idx, 3, grad, *ws),
                  std::invalid_argument);
  CHECK_THROWS_AS(net.dataset_metric(theta, ds, {}, *ws),
                  std::invalid_argument);
}

TEST_CASE("ffn xavier init per-layer bounds") {
  FeedForwardNet net(3,
                     {{4, Activation::ReLU, true},
                      {2, Activation::Identity, true}},
                     LossKind::Squared, 0.0, 0.5);
  const double b0 = std::sqrt(6.0 / 7.0), b1 = std::sqrt(6.0 / 6.0);
  double m0 = 0.0, m1 = 0.0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    RngStream rng(seed);
    const ParamVector p = net.xavier_init(rng);
    for (std::size_t i = 0; i < 12; ++i) {
      CHECK(std::abs(p[i]) <= b0);
      m0 = std::max(m0, std::abs(p[i]));
    }
    for (std::size_t i = 12; i < 16; ++i) CHECK(p[i] == 0.0);
    for (std::size_t i = 16; i < 24; ++i) {
      CHECK(std::abs(p[i]) <= b1);
      m1 = std::max(m1, std::abs(p[i]));
    }
    for (std::size_t i = 24; i < 26; ++i) CHECK(p[i] == 0.0);
  }
  CHECK(m0 > 0.95 * b0);  // the draws actually fill the range
  CHECK(m1 > 0.95 * b1);
}

TEST_CASE("fixed net trainer matches the oracle view") {
  RngStream crng(21);
  const std::vector<double> c = uniform_vec(crng, 3 * 2, -1.0, 1.0);
  auto net = std::make_shared<const FixedInputNet>(3, 2, 1, c, 0.01);
  FixedNetTrainer trainer(net);
  CHECK(trainer.n_params() == net->dim_param());

  Dataset ds = random_regression(5, 2, 1, 4);
  RngStream rng(6);
  const Vec theta = uniform_vec(rng, net->dim_param(), -1.0, 1.0);
  auto ws = trainer.make_workspace();
  std::vector<std::size_t> idx = {0, 1, 2, 3, 4};
  Vec grad;
  const double obj =
      trainer.batch_objective_grad(theta, ds, idx.data(), idx.size(), grad, *ws);

  double mean_u = 0.0;
  Vec mean_g(theta.size(), 0.0), g, fvec;
  for (auto i : idx) {
    Vec x(ds.y_row(i), ds.y_row(i) + 1);  // oracle sample is [y; z]
    x.insert(x.end(), ds.x_row(i), ds.x_row(i) + 2);
    mean_u += net->eval_U(theta, x.data());
    net->eval_G(theta, x.data(), g);
    for (std::size_t k = 0; k < g.size(); ++k) mean_g[k] += g[k];
  }
  mean_u /= 5.0;
  net->eval_F(theta, nullptr, fvec);
  const double n2 = norm_sq(theta);
  CHECK(obj == doctest::Approx(mean_u + 0.01 / 6.0 * n2 * n2 * n2)
                   .epsilon(1e-13));
  for (std::size_t k = 0; k < grad.size(); ++k)
    CHECK(grad[k] ==
          doctest::Approx(mean_g[k] / 5.0 + fvec[k]).epsilon(1e-12));

  // metric is the plain MSE without the ridge
  double mse = 0.0;
  Vec out;
  for (auto i : idx) {
    net->forward(theta, ds.x_row(i), out);
    const double e = ds.y_row(i)[0] - out[0];
    mse += e * e;
  }
  CHECK(trainer.dataset_metric(theta, ds, idx, *ws) ==
        doctest::Approx(mse / 5.0).epsilon(1e-13));

  Vec g2;
  CHECK_THROWS_AS(
      trainer.batch_objective_grad(theta, ds, idx.data(), 0, g2, *ws),
      std::invalid_argument);
  Dataset bad = random_regression(4, 3, 1, 9);
  CHECK_THROWS_AS(
      trainer.batch_objective_grad(theta, bad, idx.data(), 3, g2, *ws),
      std::invalid_argument);
  CHECK_THROWS_AS(trainer.dataset_metric(theta, ds, {}, *ws),
                  std::invalid_argument);
}
