#include "tusla/optimizers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef TUSLA_HAS_OPENMP
#include <omp.h>
#endif

namespace tusla {

Algo algo_from_string(const std::string& s) {
  if (s == "tusla") return Algo::TUSLA;
  if (s == "sgld") return Algo::SGLD;
  if (s == "sgd") return Algo::SGD;
  if (s == "adam") return Algo::ADAM;
  if (s == "amsgrad") return Algo::AMSGRAD;
  if (s == "rmsprop") return Algo::RMSPROP;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

std::string to_string(Algo a) {
  switch (a) {
    case Algo::TUSLA: return "tusla";
    case Algo::SGLD: return "sgld";
    case Algo::SGD: return "sgd";
    case Algo::ADAM: return "adam";
    case Algo::AMSGRAD: return "amsgrad";
    case Algo::RMSPROP: return "rmsprop";
  }
  return "?";
}

void OptimizerConfig::validate() const {
  if (!(stepsize > 0.0))
    throw std::invalid_argument("optimizer: stepsize must be positive");
  if (algo == Algo::TUSLA || algo == Algo::SGLD) {
    if (!(beta > 0.0))
      throw std::invalid_argument("optimizer: beta must be positive");
  }
  if (algo == Algo::TUSLA && r < 0.0)
    throw std::invalid_argument("optimizer: taming exponent must be >= 0");
  if (algo == Algo::ADAM || algo == Algo::AMSGRAD) {
    if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0))
      throw std::invalid_argument("optimizer: beta1, beta2 must lie in (0,1)");
    if (!(eps > 0.0)) throw std::invalid_argument("optimizer: eps must be positive");
  }
  if (algo == Algo::RMSPROP && !(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("optimizer: alpha must lie in (0,1)");
}

OptimizerState OptimizerState::init(const OptimizerConfig& cfg, Vec theta0) {
  OptimizerState st;
  const std::size_t d = theta0.size();
  st.theta = std::move(theta0);
  if (cfg.algo == Algo::ADAM || cfg.algo == Algo::AMSGRAD) {
    st.m.assign(d, 0.0);
    st.v.assign(d, 0.0);
    if (cfg.algo == Algo::AMSGRAD) st.vmax.assign(d, 0.0);
  } else if (cfg.algo == Algo::RMSPROP) {
    st.v.assign(d, 0.0);
  }
  return st;
}

void tame_inplace(Vec& H, double theta_norm_sq, double lambda, double r) {
  const double denom = 1.0 + std::sqrt(lambda) * std::pow(theta_norm_sq, r);
  for (double& h : H) h /= denom;
}

Vec tame(const Vec& H, const Vec& theta, double lambda, double r) {
  if (H.size() != theta.size())
    throw std::invalid_argument("tame: dimension mismatch");
  Vec out = H;
  tame_inplace(out, norm_sq(theta), lambda, r);
  return out;
}

void tusla_step(OptimizerState& st, const Vec& H, const OptimizerConfig& cfg,
                RngStream& rng, bool deterministic_noise) {
  const double lam = cfg.stepsize;
  const double denom =
      1.0 + std::sqrt(lam) * std::pow(norm_sq(st.theta), cfg.r);
  const double scale = lam / denom;
  for (std::size_t i = 0; i < st.theta.size(); ++i)
    st.theta[i] -= scale * H[i];
  if (!deterministic_noise) {
    const double sig = std::sqrt(2.0 * lam / cfg.beta);
    for (double& t : st.theta) t += sig * rng.normal();
  }
  ++st.n;
}

void sgld_step(OptimizerState& st, const Vec& H, const OptimizerConfig& cfg,
               RngStream& rng, bool deterministic_noise) {
  const double lam = cfg.stepsize;
  for (std::size_t i = 0; i < st.theta.size(); ++i)
    st.theta[i] -= lam * H[i];
  if (!deterministic_noise) {
    const double sig = std::sqrt(2.0 * lam / cfg.beta);
    for (double& t : st.theta) t += sig * rng.normal();
  }
  ++st.n;
}

void adaptive_step(OptimizerState& st, const Vec& g,
                   const OptimizerConfig& cfg) {
  const double lr = cfg.stepsize;
  const std::size_t d = st.theta.size();
  switch (cfg.algo) {
    case Algo::SGD:
      for (std::size_t i = 0; i < d; ++i) st.theta[i] -= lr * g[i];
      break;
    case Algo::ADAM:
    case Algo::AMSGRAD: {
      const double t = static_cast<double>(st.n + 1);
      const double bc1 = 1.0 - std::pow(cfg.beta1, t);
      const double bc2 = 1.0 - std::pow(cfg.beta2, t);
      for (std::size_t i = 0; i < d; ++i) {
        st.m[i] = cfg.beta1 * st.m[i] + (1.0 - cfg.beta1) * g[i];
        st.v[i] = cfg.beta2 * st.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double mhat = st.m[i] / bc1;
        double vhat = st.v[i] / bc2;
        if (cfg.algo == Algo::AMSGRAD) {
          if (vhat > st.vmax[i]) st.vmax[i] = vhat;
          vhat = st.vmax[i];
        }
        st.theta[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
      }
      break;
    }
    case Algo::RMSPROP:
      for (std::size_t i = 0; i < d; ++i) {
        st.v[i] = cfg.alpha * st.v[i] + (1.0 - cfg.alpha) * g[i] * g[i];
        st.theta[i] -= lr * g[i] / (std::sqrt(st.v[i]) + cfg.eps);
      }
      break;
    default:
      throw std::logic_error("adaptive_step: not an adaptive algorithm");
  }
  ++st.n;
}

void optimizer_step(OptimizerState& st, const Vec& grad,
                    const OptimizerConfig& cfg, RngStream& rng,
                    bool deterministic_noise) {
  switch (cfg.algo) {
    case Algo::TUSLA: tusla_step(st, grad, cfg, rng, deterministic_noise); break;
    case Algo::SGLD: sgld_step(st, grad, cfg, rng, deterministic_noise); break;
    default: adaptive_step(st, grad, cfg); break;
  }
}

Trajectory run(const GradientOracle& oracle, const OptimizerConfig& cfg,
               const RunSchedule& sch, const Vec& theta0) {
  cfg.validate();
  if (sch.n_steps == 0) throw std::invalid_argument("run: n_steps must be positive");
  if (sch.batch_size == 0) throw std::invalid_argument("run: batch_size must be positive");
  if (sch.thinning == 0) throw std::invalid_argument("run: thinning must be positive");
  if (theta0.size() != oracle.dim_param())
    throw std::invalid_argument("run: theta0 dimension mismatch");
  if (!all_finite(theta0))
    throw std::invalid_argument("run: theta0 must be finite");
  if (!oracle.data_law()) throw std::invalid_argument("run: oracle has no data law");

  const std::size_t d = oracle.dim_param();
  const std::size_t m = oracle.dim_data();
  const auto& law = *oracle.data_law();

  RngStream rng(sch.seed);
  OptimizerState st = OptimizerState::init(cfg, theta0);
  OptimizerConfig local = cfg;

  std::vector<double> xbuf(sch.batch_size * m);
  std::vector<const double*> rows(sch.batch_size);
  for (std::size_t b = 0; b < sch.batch_size; ++b)
    rows[b] = xbuf.data() + b * m;

  Trajectory tr;
  tr.seed = sch.seed;
  tr.dim = d;

  auto record = [&](std::uint64_t step, double loss) {
    tr.steps.push_back(step);
    tr.thetas.push_back(st.theta);
    tr.losses.push_back(loss);
    if (!std::isfinite(loss) || !all_finite(st.theta)) {
      tr.blew_up = true;
      tr.blowup_step = step;
      return false;
    }
    return true;
  };

  Vec H(d);
  for (std::uint64_t n = 0; n < sch.n_steps; ++n) {
    if (sch.lr_decay_step != 0 && n == sch.lr_decay_step)
      local.stepsize *= sch.lr_decay_factor;
    for (std::size_t b = 0; b < sch.batch_size; ++b)
      law.sample_into(rng, xbuf.data() + b * m);
    if (n > 0 && n % sch.thinning == 0) {
      const double loss = oracle.batch_U(st.theta, rows.data(), rows.size());
      if (!record(n, loss)) return tr;
    }
    oracle.batch_H(st.theta, rows.data(), rows.size(), H);
    optimizer_step(st, H, local, rng, sch.deterministic_noise);
    if (!all_finite(st.theta)) {
      record(n + 1, std::numeric_limits<double>::quiet_NaN());
      return tr;
    }
  }
  for (std::size_t b = 0; b < sch.batch_size; ++b)
    law.sample_into(rng, xbuf.data() + b * m);
  record(sch.n_steps, oracle.batch_U(st.theta, rows.data(), rows.size()));
  return tr;
}

std::vector<Trajectory> run_seeds(const GradientOracle& oracle,
                                  const OptimizerConfig& cfg,
                                  const RunSchedule& base,
                                  const std::vector<std::uint64_t>& seeds,
                                  const Vec& theta0, int threads) {
  std::vector<Trajectory> out(seeds.size());
#ifdef TUSLA_HAS_OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#pragma omp parallel for schedule(dynamic)
#else
  (void)threads;
#endif
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(seeds.size()); ++i) {
    RunSchedule s = base;
    s.seed = seeds[i];
    out[i] = run(oracle, cfg, s, theta0);
  }
  return out;
}

std::vector<Trajectory> run_seeds_serial(const GradientOracle& oracle,
                                         const OptimizerConfig& cfg,
                                         const RunSchedule& base,
                                         const std::vector<std::uint64_t>& seeds,
                                         const Vec& theta0) {
  std::vector<Trajectory> out(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    RunSchedule s = base;
    s.seed = seeds[i];
    out[i] = run(oracle, cfg, s, theta0);
  }
  return out;
}

EpochTrace run_epochs(const SupervisedProblem& prob, const Dataset& ds,
                      const OptimizerConfig& cfg, const EpochSchedule& sch,
                      const Vec& theta0) {
  cfg.validate();
  if (sch.epochs == 0) throw std::invalid_argument("run_epochs: epochs must be positive");
  if (sch.batch_size == 0) throw std::invalid_argument("run_epochs: batch_size must be positive");
  if (ds.train_idx.empty()) throw std::invalid_argument("run_epochs: empty train split");
  if (theta0.size() != prob.n_params())
    throw std::invalid_argument("run_epochs: theta0 dimension mismatch");

  RngStream rng(sch.seed);
  OptimizerState st = OptimizerState::init(cfg, theta0);
  OptimizerConfig local = cfg;
  auto ws = prob.make_workspace();

  std::vector<std::size_t> order = ds.train_idx;
  Vec grad(prob.n_params());

  EpochTrace tr;
  tr.seed = sch.seed;
  const bool acc = prob.metric_is_accuracy();

  for (std::uint64_t e = 1; e <= sch.epochs; ++e) {
    if (sch.lr_decay_epoch != 0 && e == sch.lr_decay_epoch + 1)
      local.stepsize *= sch.lr_decay_factor;
    rng.shuffle(order);
    double lsum = 0.0;
    std::size_t nb = 0;
    for (std::size_t at = 0; at < order.size(); at += sch.batch_size) {
      const std::size_t nbatch = std::min(sch.batch_size, order.size() - at);
      const double L = prob.batch_objective_grad(st.theta, ds, order.data() + at,
                                                 nbatch, grad, *ws);
      lsum += L;
      ++nb;
      optimizer_step(st, grad, local, rng, sch.deterministic_noise);
      if (!std::isfinite(L) || !all_finite(st.theta)) {
        tr.blew_up = true;
        tr.blowup_epoch = e;
        tr.final_theta = st.theta;
        tr.final_train_loss = L;
        return tr;
      }
    }
    tr.train_loss.push_back(lsum / static_cast<double>(nb));
    if (!ds.test_idx.empty())
      tr.test_metric.push_back(prob.dataset_metric(st.theta, ds, ds.test_idx, *ws));
  }

  tr.final_train_loss = tr.train_loss.back();
  tr.final_theta = st.theta;
  if (!tr.test_metric.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < tr.test_metric.size(); ++i) {
      if (acc ? tr.test_metric[i] > tr.test_metric[best]
              : tr.test_metric[i] < tr.test_metric[best])
        best = i;
    }
    tr.best_epoch = best + 1;
    tr.best_metric = tr.test_metric[best];
    tr.final_metric = tr.test_metric.back();
  } else {
    tr.best_epoch = sch.epochs;
    tr.best_metric = tr.final_train_loss;
    tr.final_metric = tr.final_train_loss;
  }
  return tr;
}

std::vector<EpochTrace> run_epochs_seeds(const SupervisedProblem& prob,
                                         const Dataset& ds,
                                         const OptimizerConfig& cfg,
                                         const EpochSchedule& base,
                                         const std::vector<std::uint64_t>& seeds,
                                         const std::vector<Vec>& theta0s,
                                         int threads) {
  if (theta0s.size() != seeds.size())
    throw std::invalid_argument("run_epochs_seeds: need one theta0 per seed");
  std::vector<EpochTrace> out(seeds.size());
#ifdef TUSLA_HAS_OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#pragma omp parallel for schedule(dynamic)
#else
  (void)threads;
#endif
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(seeds.size()); ++i) {
    EpochSchedule s = base;
    s.seed = seeds[i];
    out[i] = run_epochs(prob, ds, cfg, s, theta0s[i]);
  }
  return out;
}

}  // namespace tusla
