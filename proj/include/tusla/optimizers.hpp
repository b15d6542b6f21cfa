#pragma once

#include "tusla/core.hpp"
#include "tusla/problems.hpp"

namespace tusla {

enum class Algo { TUSLA, SGLD, SGD, ADAM, AMSGRAD, RMSPROP };

Algo algo_from_string(const std::string& s);
std::string to_string(Algo a);

struct OptimizerConfig {
  Algo algo = Algo::TUSLA;
  double stepsize = 0.0;  // lambda for the Langevin methods, lr otherwise
  double beta = 0.0;      // inverse temperature (TUSLA, SGLD)
  double r = 0.0;         // taming exponent (TUSLA)
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;  // ADAM / AMSGrad
  double alpha = 0.99;                            // RMSProp
  void validate() const;  // throws std::invalid_argument
};

struct OptimizerState {
  Vec theta;
  std::uint64_t n = 0;   // completed steps
  Vec m, v, vmax;        // adaptive-method accumulators
  static OptimizerState init(const OptimizerConfig& cfg, Vec theta0);
};

// Taming factor application: out_i = H_i / (1 + sqrt(lambda) |theta|^(2r)).
// |theta|^(2r) is computed as pow(|theta|^2, r), so r = 0 gives the constant
// divisor 1 + sqrt(lambda) everywhere (pow(0,0) = 1 at the origin).
Vec tame(const Vec& H, const Vec& theta, double lambda, double r);
void tame_inplace(Vec& H, double theta_norm_sq, double lambda, double r);

// Single update steps.  The gradient is the already-averaged batch value.
// With deterministic_noise the Gaussian increment is skipped entirely (no
// draws are consumed).
void tusla_step(OptimizerState& st, const Vec& H, const OptimizerConfig& cfg,
                RngStream& rng, bool deterministic_noise = false);
void sgld_step(OptimizerState& st, const Vec& H, const OptimizerConfig& cfg,
               RngStream& rng, bool deterministic_noise = false);
void adaptive_step(OptimizerState& st, const Vec& grad,
                   const OptimizerConfig& cfg);
void optimizer_step(OptimizerState& st, const Vec& grad,
                    const OptimizerConfig& cfg, RngStream& rng,
                    bool deterministic_noise = false);

// ------------------------------------------------------- streaming driver

struct RunSchedule {
  std::uint64_t n_steps = 0;
  std::size_t batch_size = 1;
  std::uint64_t thinning = 1;  // record at n = thinning, 2 thinning, ...
  std::uint64_t seed = 1;
  bool deterministic_noise = false;
  std::uint64_t lr_decay_step = 0;  // scale stepsize once before this step
  double lr_decay_factor = 1.0;
};

struct Trajectory {
  std::vector<std::uint64_t> steps;
  std::vector<Vec> thetas;  // may contain the non-finite blow-up state
  Vec losses;               // batch U at the recorded theta (pre-update)
  std::uint64_t seed = 0;
  std::size_t dim = 0;
  bool blew_up = false;
  std::uint64_t blowup_step = 0;
};

// Streams batches from the oracle's data law and iterates the configured
// optimizer.  The initial state is not recorded; the final state always is.
// On the first non-finite recorded quantity the run stops with blew_up set.
Trajectory run(const GradientOracle& oracle, const OptimizerConfig& cfg,
               const RunSchedule& sch, const Vec& theta0);

// Seed-parallel front ends; both produce bit-identical results.
std::vector<Trajectory> run_seeds(const GradientOracle& oracle,
                                  const OptimizerConfig& cfg,
                                  const RunSchedule& base,
                                  const std::vector<std::uint64_t>& seeds,
                                  const Vec& theta0, int threads = 0);
std::vector<Trajectory> run_seeds_serial(const GradientOracle& oracle,
                                         const OptimizerConfig& cfg,
                                         const RunSchedule& base,
                                         const std::vector<std::uint64_t>& seeds,
                                         const Vec& theta0);

// --------------------------------------------------------- epoch training

struct EpochSchedule {
  std::uint64_t epochs = 0;
  std::size_t batch_size = 128;
  std::uint64_t seed = 1;
  std::uint64_t lr_decay_epoch = 0;  // stepsize scaled after this epoch (1-based)
  double lr_decay_factor = 1.0;
  bool deterministic_noise = false;
};

struct EpochTrace {
  Vec train_loss;   // per-epoch mean of the batch objective
  Vec test_metric;  // per-epoch metric on the test split (empty if none)
  std::uint64_t best_epoch = 0;  // 1-based
  double best_metric = 0.0;
  double final_metric = 0.0;
  double final_train_loss = 0.0;
  Vec final_theta;
  std::uint64_t seed = 0;
  bool blew_up = false;
  std::uint64_t blowup_epoch = 0;
};

// Epoch loop over the training split: seeded reshuffle each epoch,
// sequential mini-batches (the last one may be short), one optimizer step
// per batch, metric on the test split after every epoch.
EpochTrace run_epochs(const SupervisedProblem& prob, const Dataset& ds,
                      const OptimizerConfig& cfg, const EpochSchedule& sch,
                      const Vec& theta0);

std::vector<EpochTrace> run_epochs_seeds(const SupervisedProblem& prob,
                                         const Dataset& ds,
                                         const OptimizerConfig& cfg,
                                         const EpochSchedule& base,
                                         const std::vector<std::uint64_t>& seeds,
                                         const std::vector<Vec>& theta0s,
                                         int threads = 0);

}  // namespace tusla
