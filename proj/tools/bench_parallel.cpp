// Times the seed-parallel drivers against the serial reference and checks
// that both produce bit-identical results.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

#ifdef TUSLA_HAS_OPENMP
#include <omp.h>
#endif

#include "tusla/data.hpp"
#include "tusla/optimizers.hpp"
#include "tusla/problems.hpp"

namespace {

using namespace tusla;

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch())
      .count();
}

bool bits_equal(const Vec& a, const Vec& b) {
  return a.size() == b.size() &&
         (a.empty() ||
          std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

bool identical(const std::vector<Trajectory>& a,
               const std::vector<Trajectory>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].seed != b[i].seed || a[i].steps != b[i].steps ||
        a[i].blew_up != b[i].blew_up || !bits_equal(a[i].losses, b[i].losses))
      return false;
    if (a[i].thetas.size() != b[i].thetas.size()) return false;
    for (std::size_t k = 0; k < a[i].thetas.size(); ++k)
      if (!bits_equal(a[i].thetas[k], b[i].thetas[k])) return false;
  }
  return true;
}

bool identical(const std::vector<EpochTrace>& a,
               const std::vector<EpochTrace>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].seed != b[i].seed || a[i].blew_up != b[i].blew_up ||
        !bits_equal(a[i].train_loss, b[i].train_loss) ||
        !bits_equal(a[i].test_metric, b[i].test_metric) ||
        !bits_equal(a[i].final_theta, b[i].final_theta))
      return false;
  return true;
}

Dataset synthetic_regression(std::size_t n, std::uint64_t seed) {
  Dataset ds;
  ds.n = n;
  ds.feat_dim = 2;
  ds.target_dim = 1;
  ds.X.resize(2 * n);
  ds.Y.resize(n);
  RngStream rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double z1 = rng.uniform01(), z2 = rng.uniform01();
    ds.X[2 * i] = z1;
    ds.X[2 * i + 1] = z2;
    const double t = 2.0 * z1 + 2.0 * z2 - 1.5;
    ds.Y[i] = t * t * std::abs(t);
  }
  assign_split(ds, seed, 0.1);
  return ds;
}

}  // namespace

int main(int argc, char** argv) {
  bool smoke = false;
  for (int i = 1; i < argc; ++i)
    if (std::string(argv[i]) == "--smoke") smoke = true;

  int hw_threads = 1;
#ifdef TUSLA_HAS_OPENMP
  hw_threads = omp_get_max_threads();
  std::printf("openmp enabled, max threads %d\n", hw_threads);
#else
  std::printf("openmp not available, parallel driver runs serially\n");
#endif

  const std::size_t n_seeds = smoke ? 4 : 16;
  std::vector<std::uint64_t> seeds(n_seeds);
  for (std::size_t i = 0; i < n_seeds; ++i) seeds[i] = i + 1;

  bool all_ok = true;

  {
    ArtificialProblem prob(2.0, 1.0, std::make_shared<Beta22Law>());
    OptimizerConfig cfg;
    cfg.algo = Algo::TUSLA;
    cfg.stepsize = 0.001;
    cfg.beta = 1e10;
    cfg.r = 14.0;
    cfg.validate();
    RunSchedule sch;
    sch.n_steps = smoke ? 2000 : 100000;
    sch.thinning = 100;
    const Vec theta0{4.0};

    const double t0 = now_s();
    auto serial = run_seeds_serial(prob, cfg, sch, seeds, theta0);
    const double t1 = now_s();
    auto parallel = run_seeds(prob, cfg, sch, seeds, theta0, hw_threads);
    const double t2 = now_s();
    const bool same = identical(serial, parallel);
    all_ok = all_ok && same;
    std::printf(
        "step driver : %zu seeds x %llu steps  serial %.3fs  parallel %.3fs  "
        "speedup %.2fx  identical %s\n",
        n_seeds, static_cast<unsigned long long>(sch.n_steps), t1 - t0,
        t2 - t1, (t1 - t0) / std::max(t2 - t1, 1e-9), same ? "yes" : "NO");
  }

  {
    const Dataset ds = synthetic_regression(smoke ? 512 : 4096, 7);
    FeedForwardNet net(2, {{8, Activation::ReLU, true},
                           {1, Activation::Identity, true}},
                       LossKind::Squared, 1e-6, 0.5);
    OptimizerConfig cfg;
    cfg.algo = Algo::TUSLA;
    cfg.stepsize = 0.1;
    cfg.beta = 1e10;
    cfg.r = 0.5;
    cfg.validate();
    EpochSchedule es;
    es.epochs = smoke ? 10 : 50;
    es.batch_size = 64;
    std::vector<Vec> theta0s;
    for (auto s : seeds) {
      RngStream r0(s);
      theta0s.push_back(net.xavier_init(r0).values());
    }

    const double t0 = now_s();
    std::vector<EpochTrace> serial;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      EpochSchedule s = es;
      s.seed = seeds[i];
      serial.push_back(run_epochs(net, ds, cfg, s, theta0s[i]));
    }
    const double t1 = now_s();
    auto parallel =
        run_epochs_seeds(net, ds, cfg, es, seeds, theta0s, hw_threads);
    const double t2 = now_s();
    const bool same = identical(serial, parallel);
    all_ok = all_ok && same;
    std::printf(
        "epoch driver: %zu seeds x %llu epochs  serial %.3fs  parallel %.3fs  "
        "speedup %.2fx  identical %s\n",
        n_seeds, static_cast<unsigned long long>(es.epochs), t1 - t0, t2 - t1,
        (t1 - t0) / std::max(t2 - t1, 1e-9), same ? "yes" : "NO");
  }

  if (!all_ok) {
    std::printf("mismatch between serial and parallel drivers\n");
    return 1;
  }
  return 0;
}
