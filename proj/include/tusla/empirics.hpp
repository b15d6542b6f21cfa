#pragma once

#include <cstdint>
#include <functional>

#include "tusla/core.hpp"
#include "tusla/logval.hpp"
#include "tusla/optimizers.hpp"

namespace tusla {

// Euler-Maruyama discretization of dZ_t = -lambda h(Z_t) dt +
// sqrt(2 lambda / beta) dB_t, sampled every `sample_stride` steps after
// `burn_in` steps.
struct SdeConfig {
  double lambda = 1.0;
  double beta = 1.0;
  double dt = 0.01;
  std::size_t n_steps = 0;
  std::size_t burn_in = 0;
  std::size_t sample_stride = 1;
  std::uint64_t seed = 1;
};

struct SdeResult {
  std::vector<Vec> samples;
  bool blew_up = false;
  std::size_t blowup_step = 0;
};

SdeResult euler_maruyama(const std::function<void(const Vec&, Vec&)>& drift,
                         const Vec& z0, const SdeConfig& cfg);

struct GridSpec {
  double lo = 0, hi = 0;
  std::size_t n = 0;  // number of grid points, spacing (hi-lo)/(n-1)
};

// Discretized Gibbs measure pi(dx) proportional to exp(-beta u(x)) dx on a
// 1-D grid.  build() throws when the grid carries boundary mass; build_auto()
// locates the mode, seeds the grid from the local curvature, and widens it
// until the boundary check passes.
struct TargetDensity1D {
  Vec x, pdf, cdf;
  LogVal z;  // normalizing integral of exp(-beta u)
  double beta = 0;

  static TargetDensity1D build(const std::function<double(double)>& u,
                               double beta, const GridSpec& gs);
  static TargetDensity1D build_auto(const std::function<double(double)>& u,
                                    double beta, double scan_lo = -10.0,
                                    double scan_hi = 10.0);

  double quantile(double p) const;
  double moment(const std::function<double(double)>& f) const;
  double abs_moment(double k) const;  // E |X|^k
  double mean() const;
};

// Sorted sample cloud on the real line.
struct EmpiricalMeasure {
  Vec sorted;
  explicit EmpiricalMeasure(Vec samples);
};

// Order-p Wasserstein distance between 1-D distributions (p >= 1), computed
// from quantile couplings.
double wasserstein_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                      double p);
double wasserstein_1d(const EmpiricalMeasure& a, const TargetDensity1D& pi,
                      double p);

// min over a uniform grid, refined by golden-section around the best cell.
double u_star_grid(const std::function<double(double)>& u, double lo,
                   double hi, std::size_t n);
// mean of u over the samples minus u_star
double excess_risk(const std::function<double(double)>& u, const Vec& thetas,
                   double u_star);

// Mean |theta_n|^(2p) across trajectories at each recorded step; requires
// identical recording schedules.
struct MomentTrack {
  std::vector<std::size_t> steps;
  Vec mean_abs_2p;
};
MomentTrack moment_track(const std::vector<Trajectory>& trajs, double p);

}  // namespace tusla
