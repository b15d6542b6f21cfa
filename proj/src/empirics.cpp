#include "tusla/empirics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tusla {

SdeResult euler_maruyama(const std::function<void(const Vec&, Vec&)>& drift,
                         const Vec& z0, const SdeConfig& cfg) {
  if (z0.empty()) throw std::invalid_argument("sde: empty initial state");
  if (!(cfg.lambda > 0) || !(cfg.beta > 0) || !(cfg.dt > 0))
    throw std::invalid_argument("sde: lambda, beta, dt must be positive");
  if (cfg.sample_stride == 0)
    throw std::invalid_argument("sde: sample_stride must be >= 1");
  RngStream rng(cfg.seed);
  const double sigma = std::sqrt(2.0 * cfg.lambda / cfg.beta) *
                       std::sqrt(cfg.dt);
  Vec z = z0, dz(z0.size());
  SdeResult out;
  for (std::size_t k = 0; k < cfg.n_steps; ++k) {
    drift(z, dz);
    for (std::size_t i = 0; i < z.size(); ++i)
      z[i] += -cfg.lambda * dz[i] * cfg.dt + sigma * rng.normal();
    if (!all_finite(z)) {
      out.blew_up = true;
      out.blowup_step = k + 1;
      return out;
    }
    if (k + 1 > cfg.burn_in && (k + 1 - cfg.burn_in) % cfg.sample_stride == 0)
      out.samples.push_back(z);
  }
  return out;
}

TargetDensity1D TargetDensity1D::build(const std::function<double(double)>& u,
                                       double beta, const GridSpec& gs) {
  if (gs.n < 3 || !(gs.hi > gs.lo))
    throw std::invalid_argument("target density: need hi > lo and n >= 3");
  if (!(beta > 0)) throw std::invalid_argument("target density: beta > 0");
  TargetDensity1D td;
  td.beta = beta;
  const double dx = (gs.hi - gs.lo) / static_cast<double>(gs.n - 1);
  td.x.resize(gs.n);
  Vec uv(gs.n);
  double umin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < gs.n; ++i) {
    td.x[i] = gs.lo + dx * static_cast<double>(i);
    uv[i] = u(td.x[i]);
    if (!std::isfinite(uv[i]))
      throw std::runtime_error("target density: objective non-finite at x=" +
                               std::to_string(td.x[i]));
    umin = std::min(umin, uv[i]);
  }
  Vec w(gs.n);
  for (std::size_t i = 0; i < gs.n; ++i)
    w[i] = std::exp(-beta * (uv[i] - umin));
  if (w.front() > 1e-12 || w.back() > 1e-12)
    throw std::runtime_error(
        "target density: boundary mass detected, enlarge the grid");
  double trapz = 0;
  for (std::size_t i = 0; i + 1 < gs.n; ++i)
    trapz += 0.5 * (w[i] + w[i + 1]) * dx;
  if (!(trapz > 0))
    throw std::runtime_error("target density: zero total mass on the grid");
  td.z = LogVal::from_lg(-beta * umin + std::log(trapz));
  td.pdf.resize(gs.n);
  for (std::size_t i = 0; i < gs.n; ++i) td.pdf[i] = w[i] / trapz;
  td.cdf.assign(gs.n, 0.0);
  for (std::size_t i = 0; i + 1 < gs.n; ++i)
    td.cdf[i + 1] = td.cdf[i] + 0.5 * (td.pdf[i] + td.pdf[i + 1]) * dx;
  const double total = td.cdf.back();
  for (auto& c : td.cdf) c /= total;
  td.cdf.back() = 1.0;
  return td;
}

namespace {

double golden_min(const std::function<double(double)>& u, double lo,
                  double hi) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = u(c), fd = u(d);
  for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = u(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = u(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

TargetDensity1D TargetDensity1D::build_auto(
    const std::function<double(double)>& u, double beta, double scan_lo,
    double scan_hi) {
  if (!(scan_hi > scan_lo))
    throw std::invalid_argument("target density: scan_hi must exceed scan_lo");
  const std::size_t nscan = 100001;
  const double dxs = (scan_hi - scan_lo) / static_cast<double>(nscan - 1);
  double best_x = scan_lo, best_u = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nscan; ++i) {
    const double xx = scan_lo + dxs * static_cast<double>(i);
    const double uu = u(xx);
    if (uu < best_u) {
      best_u = uu;
      best_x = xx;
    }
  }
  const double xstar = golden_min(u, std::max(scan_lo, best_x - dxs),
                                  std::min(scan_hi, best_x + dxs));
  // Laplace width from the local curvature
  const double h = 1e-4;
  const double upp = (u(xstar + h) - 2.0 * u(xstar) + u(xstar - h)) / (h * h);
  double sigma_hat = upp > 0 ? 1.0 / std::sqrt(beta * upp) : 1.0;
  if (!std::isfinite(sigma_hat) || sigma_hat <= 0) sigma_hat = 1.0;
  double half = 6.0 * sigma_hat;
  for (int attempt = 0; attempt < 40; ++attempt) {
    GridSpec gs{xstar - half, xstar + half, 1u << 15};
    try {
      return build(u, beta, gs);
    } catch (const std::runtime_error&) {
      half *= 1.5;
    }
  }
  throw std::runtime_error(
      "target density: no admissible grid found after widening");
}

double TargetDensity1D::quantile(double p) const {
  const double pc = std::min(1.0, std::max(0.0, p));
  const auto it = std::lower_bound(cdf.begin(), cdf.end(), pc);
  if (it == cdf.begin()) return x.front();
  const std::size_t i = static_cast<std::size_t>(it - cdf.begin());
  if (i >= cdf.size()) return x.back();
  const double c0 = cdf[i - 1], c1 = cdf[i];
  if (!(c1 > c0)) return x[i];
  const double t = (pc - c0) / (c1 - c0);
  return x[i - 1] + t * (x[i] - x[i - 1]);
}

double TargetDensity1D::moment(const std::function<double(double)>& f) const {
  double acc = 0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double dx = x[i + 1] - x[i];
    acc += 0.5 * (f(x[i]) * pdf[i] + f(x[i + 1]) * pdf[i + 1]) * dx;
  }
  return acc;
}

double TargetDensity1D::abs_moment(double k) const {
  return moment([k](double t) { return std::pow(std::abs(t), k); });
}

double TargetDensity1D::mean() const {
  return moment([](double t) { return t; });
}

EmpiricalMeasure::EmpiricalMeasure(Vec samples) : sorted(std::move(samples)) {
  if (sorted.empty())
    throw std::invalid_argument("empirical measure: no samples");
  if (!all_finite(sorted))
    throw std::invalid_argument("empirical measure: non-finite sample");
  std::sort(sorted.begin(), sorted.end());
}

double wasserstein_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                      double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("wasserstein: p must be >= 1");
  const std::size_t na = a.sorted.size(), nb = b.sorted.size();
  std::size_t K;
  if (na == nb) {
    K = na;
  } else {
    K = std::lcm(na, nb);
    if (K > (1u << 20)) K = 1u << 20;
  }
  double acc = 0;
  for (std::size_t j = 0; j < K; ++j) {
    const double q = (static_cast<double>(j) + 0.5) / static_cast<double>(K);
    const std::size_t ia = std::min(
        na - 1, static_cast<std::size_t>(q * static_cast<double>(na)));
    const std::size_t ib = std::min(
        nb - 1, static_cast<std::size_t>(q * static_cast<double>(nb)));
    acc += std::pow(std::abs(a.sorted[ia] - b.sorted[ib]), p);
  }
  return std::pow(acc / static_cast<double>(K), 1.0 / p);
}

double wasserstein_1d(const EmpiricalMeasure& a, const TargetDensity1D& pi,
                      double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("wasserstein: p must be >= 1");
  const std::size_t n = a.sorted.size();
  double acc = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double q = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
    acc += std::pow(std::abs(a.sorted[j] - pi.quantile(q)), p);
  }
  return std::pow(acc / static_cast<double>(n), 1.0 / p);
}

double u_star_grid(const std::function<double(double)>& u, double lo,
                   double hi, std::size_t n) {
  if (n < 3 || !(hi > lo))
    throw std::invalid_argument("u_star_grid: need hi > lo and n >= 3");
  const double dx = (hi - lo) / static_cast<double>(n - 1);
  double best_x = lo, best_u = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double xx = lo + dx * static_cast<double>(i);
    const double uu = u(xx);
    if (uu < best_u) {
      best_u = uu;
      best_x = xx;
    }
  }
  const double xr = golden_min(u, std::max(lo, best_x - dx),
                               std::min(hi, best_x + dx));
  return std::min(best_u, u(xr));
}

double excess_risk(const std::function<double(double)>& u, const Vec& thetas,
                   double u_star) {
  if (thetas.empty()) throw std::invalid_argument("excess_risk: no samples");
  double acc = 0;
  for (double t : thetas) acc += u(t);
  return acc / static_cast<double>(thetas.size()) - u_star;
}

MomentTrack moment_track(const std::vector<Trajectory>& trajs, double p) {
  if (trajs.empty()) throw std::invalid_argument("moment_track: no runs");
  MomentTrack mt;
  mt.steps = trajs.front().steps;
  for (const auto& t : trajs)
    if (t.steps != mt.steps)
      throw std::invalid_argument(
          "moment_track: trajectories have different recording schedules");
  mt.mean_abs_2p.assign(mt.steps.size(), 0.0);
  for (const auto& t : trajs)
    for (std::size_t i = 0; i < mt.steps.size(); ++i)
      mt.mean_abs_2p[i] += std::pow(norm_sq(t.thetas[i]), p);
  for (auto& v : mt.mean_abs_2p) v /= static_cast<double>(trajs.size());
  return mt;
}

}  // namespace tusla
