#include "tusla/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tusla {

namespace {

// theta^28, theta^29, theta^30 by repeated squaring (exact double products)
struct Pow30 {
  double t29, t30;
  explicit Pow30(double th) {
    const double t2 = th * th, t4 = t2 * t2, t8 = t4 * t4, t16 = t8 * t8;
    const double t28 = t16 * t8 * t4;
    t29 = t28 * th;
    t30 = t28 * t2;
  }
};

}  // namespace

// ------------------------------------------------------------- artificial

ArtificialProblem::ArtificialProblem(double a1, double a2,
                                     std::shared_ptr<const DataLaw> law)
    : GradientOracle(1, 1, 3.0, 14.0, 1.0, std::move(law)), a1_(a1), a2_(a2) {
  if (!law_) throw std::invalid_argument("artificial: data law required");
  if (law_->dim() != 1)
    throw std::invalid_argument("artificial: law must be one-dimensional");
  if (!law_->has_density())
    throw std::invalid_argument("artificial: law must expose a density");
}

double ArtificialProblem::U1(double th, double x) const {
  const double ind = x <= th ? 1.0 : 0.0;
  const Pow30 p(th);
  if (std::fabs(th) <= 1.0)
    return a1_ * th * th * ind + a2_ * th * th * (1.0 - ind) + p.t30;
  const double a3 = 2.0 * a1_, a4 = -a1_, a5 = 2.0 * a2_, a6 = -a2_;
  const double at = std::fabs(th);
  return (a3 * at + a4) * ind + (a5 * at + a6) * (1.0 - ind) + p.t30;
}

double ArtificialProblem::F1(double th) const { return 30.0 * Pow30(th).t29; }

double ArtificialProblem::G1(double th, double x) const {
  const double f = law_->density(th);
  const double ind = x <= th ? 1.0 : 0.0;
  const double diff = a1_ - a2_;
  if (std::fabs(th) <= 1.0)
    return 2.0 * a2_ * th + 2.0 * diff * th * ind + diff * th * th * f;
  const double sgn = th > 1.0 ? 1.0 : -1.0;
  return 2.0 * (a2_ + diff * ind) * sgn + diff * (2.0 * std::fabs(th) - 1.0) * f;
}

double ArtificialProblem::u_exact1(double th) const {
  const double P = law_->cdf(th);
  const double diff = a1_ - a2_;
  const Pow30 p(th);
  if (std::fabs(th) <= 1.0) return p.t30 + a2_ * th * th + diff * th * th * P;
  const double at = std::fabs(th);
  return p.t30 + 2.0 * a2_ * at - a2_ + (2.0 * diff * at - diff) * P;
}

double ArtificialProblem::h_exact1(double th) const {
  const double P = law_->cdf(th);
  const double f = law_->density(th);
  const double diff = a1_ - a2_;
  const Pow30 p(th);
  if (std::fabs(th) <= 1.0)
    return 30.0 * p.t29 + 2.0 * a2_ * th + 2.0 * diff * th * P +
           diff * th * th * f;
  const double a3 = 2.0 * a1_, a4 = -a1_, a5 = 2.0 * a2_, a6 = -a2_;
  const double sgn = th > 1.0 ? 1.0 : -1.0;
  return 30.0 * p.t29 + (a5 + (a3 - a5) * P) * sgn +
         ((a3 - a5) * std::fabs(th) + (a4 - a6)) * f;
}

double ArtificialProblem::eval_U(const Vec& theta, const double* x) const {
  return U1(theta[0], x[0]);
}

void ArtificialProblem::eval_F(const Vec& theta, const double*, Vec& out) const {
  out.assign(1, F1(theta[0]));
}

void ArtificialProblem::eval_G(const Vec& theta, const double* x,
                               Vec& out) const {
  out.assign(1, G1(theta[0], x[0]));
}

double ArtificialProblem::u_exact(const Vec& theta) const {
  return u_exact1(theta[0]);
}

void ArtificialProblem::h_exact(const Vec& theta, Vec& out) const {
  out.assign(1, h_exact1(theta[0]));
}

// ---------------------------------------------------------- fixed-input net

FixedInputNet::FixedInputNet(std::size_t d1, std::size_t m1, std::size_t m2,
                             std::vector<double> c, double eta,
                             std::shared_ptr<const DataLaw> law)
    : GradientOracle(d1 * (1 + m2), m1 + m2, 4.0, 2.0, 2.0, std::move(law)),
      d1_(d1),
      m1_(m1),
      m2_(m2),
      c_(std::move(c)),
      eta_(eta) {
  if (d1 == 0 || m1 == 0 || m2 == 0)
    throw std::invalid_argument("fixed_net: zero dimension");
  if (c_.size() != d1 * m1)
    throw std::invalid_argument("fixed_net: c must be d1 x m1");
  if (!(eta_ > 0.0))
    throw std::invalid_argument("fixed_net: eta must be positive");
  for (std::size_t j = 0; j < d1_; ++j) {
    bool nonzero = false;
    for (std::size_t k = 0; k < m1_; ++k)
      if (c_[j * m1_ + k] != 0.0) nonzero = true;
    if (!nonzero)
      throw std::invalid_argument("fixed_net: row " + std::to_string(j) +
                                  " of c is all zero");
  }
}

double FixedInputNet::c_frobenius() const { return norm(c_); }

void FixedInputNet::forward(const Vec& theta, const double* z,
                            Vec& out) const {
  Vec relu(d1_);
  const double* b0 = theta.data() + m2_ * d1_;
  for (std::size_t j = 0; j < d1_; ++j) {
    double pre = b0[j];
    for (std::size_t k = 0; k < m1_; ++k) pre += c_[j * m1_ + k] * z[k];
    relu[j] = pre > 0.0 ? pre : 0.0;
  }
  out.assign(m2_, 0.0);
  for (std::size_t i = 0; i < m2_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d1_; ++j) s += theta[i * d1_ + j] * relu[j];
    out[i] = s;
  }
}

double FixedInputNet::eval_U(const Vec& theta, const double* x) const {
  Vec out;
  forward(theta, x + m2_, out);
  double s = 0.0;
  for (std::size_t i = 0; i < m2_; ++i) {
    const double e = x[i] - out[i];
    s += e * e;
  }
  return s;
}

void FixedInputNet::eval_F(const Vec& theta, const double*, Vec& out) const {
  const double n2 = norm_sq(theta);
  const double coef = eta_ * n2 * n2;  // eta |theta|^(2r) with r = 2
  out.resize(dim_param());
  for (std::size_t i = 0; i < dim_param(); ++i) out[i] = coef * theta[i];
}

void FixedInputNet::eval_G(const Vec& theta, const double* x, Vec& out) const {
  const double* y = x;
  const double* z = x + m2_;
  const double* b0 = theta.data() + m2_ * d1_;
  Vec relu(d1_), active(d1_);
  for (std::size_t j = 0; j < d1_; ++j) {
    double pre = b0[j];
    for (std::size_t k = 0; k < m1_; ++k) pre += c_[j * m1_ + k] * z[k];
    relu[j] = pre > 0.0 ? pre : 0.0;
    active[j] = pre >= 0.0 ? 1.0 : 0.0;
  }
  Vec err(m2_);
  for (std::size_t i = 0; i < m2_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d1_; ++j) s += theta[i * d1_ + j] * relu[j];
    err[i] = y[i] - s;
  }
  out.assign(dim_param(), 0.0);
  for (std::size_t i = 0; i < m2_; ++i)
    for (std::size_t j = 0; j < d1_; ++j)
      out[i * d1_ + j] = -2.0 * err[i] * relu[j];
  for (std::size_t j = 0; j < d1_; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m2_; ++i) s += err[i] * theta[i * d1_ + j];
    out[m2_ * d1_ + j] = -2.0 * s * active[j];
  }
}

ParamVector FixedInputNet::xavier_init(RngStream& rng) const {
  const double bound = std::sqrt(6.0 / static_cast<double>(d1_ + m2_));
  Vec v(dim_param(), 0.0);
  for (std::size_t i = 0; i < m2_ * d1_; ++i) v[i] = rng.uniform(-bound, bound);
  return ParamVector(std::move(v));
}

// --------------------------------------------------------- feed-forward net

FeedForwardNet::FeedForwardNet(std::size_t in_dim,
                               std::vector<LayerSpec> layers, LossKind loss,
                               double eta, double r_reg,
                               std::shared_ptr<const DataLaw> law)
    : GradientOracle(0, 0, 4.0, r_reg, 2.0, std::move(law)),
      in_dim_(in_dim),
      layers_(std::move(layers)),
      loss_(loss),
      eta_(eta),
      r_reg_(r_reg) {
  if (in_dim_ == 0 || layers_.empty())
    throw std::invalid_argument("ffn: empty architecture");
  if (eta_ < 0.0 || r_reg_ < 0.0)
    throw std::invalid_argument("ffn: eta and r must be nonnegative");
  if (loss_ == LossKind::SoftmaxCrossEntropy &&
      layers_.back().act != Activation::Identity)
    throw std::invalid_argument(
        "ffn: cross-entropy needs an identity last layer");
  std::size_t off = 0, prev = in_dim_;
  for (const auto& L : layers_) {
    if (L.width == 0) throw std::invalid_argument("ffn: zero-width layer");
    w_off_.push_back(off);
    off += L.width * prev;
    b_off_.push_back(L.bias ? off : static_cast<std::size_t>(-1));
    if (L.bias) off += L.width;
    prev = L.width;
  }
  n_params_ = off;
  d_ = off;                         // oracle parameter dimension
  m_ = in_dim_ + layers_.back().width;  // oracle sample is [z; y]
}

std::pair<std::size_t, std::size_t> FeedForwardNet::layer_weight_range(
    std::size_t l) const {
  const std::size_t prev = l == 0 ? in_dim_ : layers_[l - 1].width;
  return {w_off_[l], w_off_[l] + layers_[l].width * prev};
}

void FeedForwardNet::forward(const Vec& theta, const double* z, Vec& out,
                             FfnWorkspace& ws) const {
  const std::size_t L = layers_.size();
  if (ws.act.size() != L + 1) ws.act.resize(L + 1);
  ws.act[0].assign(z, z + in_dim_);
  std::size_t prev = in_dim_;
  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t w = layers_[l].width;
    ws.act[l + 1].resize(w);
    const double* W = theta.data() + w_off_[l];
    const double* b =
        layers_[l].bias ? theta.data() + b_off_[l] : nullptr;
    const Vec& a = ws.act[l];
    for (std::size_t i = 0; i < w; ++i) {
      double pre = b ? b[i] : 0.0;
      const double* row = W + i * prev;
      for (std::size_t j = 0; j < prev; ++j) pre += row[j] * a[j];
      switch (layers_[l].act) {
        case Activation::ReLU: pre = pre > 0.0 ? pre : 0.0; break;
        case Activation::Tanh: pre = std::tanh(pre); break;
        case Activation::Identity: break;
      }
      ws.act[l + 1][i] = pre;
    }
    prev = w;
  }
  out = ws.act[L];
}

double FeedForwardNet::sample_loss(const Vec& theta, const double* z,
                                   const double* y, FfnWorkspace& ws) const {
  forward(theta, z, ws.out, ws);
  const std::size_t k = out_dim();
  if (loss_ == LossKind::Squared) {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double e = y[i] - ws.out[i];
      s += e * e;
    }
    return s;
  }
  double mx = ws.out[0];
  for (std::size_t i = 1; i < k; ++i) mx = std::max(mx, ws.out[i]);
  double lse = 0.0;
  for (std::size_t i = 0; i < k; ++i) lse += std::exp(ws.out[i] - mx);
  lse = mx + std::log(lse);
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s -= y[i] * (ws.out[i] - lse);
  return s;
}

double FeedForwardNet::forward_backward(const Vec& theta, const double* z,
                                        const double* y, Vec& grad,
                                        FfnWorkspace& ws) const {
  const double loss = sample_loss(theta, z, y, ws);
  const std::size_t L = layers_.size();
  const std::size_t k = out_dim();

  ws.delta.resize(k);
  if (loss_ == LossKind::Squared) {
    for (std::size_t i = 0; i < k; ++i)
      ws.delta[i] = 2.0 * (ws.out[i] - y[i]);
    // convert d/d(activation) into d/d(pre-activation) of the last layer
    switch (layers_[L - 1].act) {
      case Activation::ReLU:
        for (std::size_t i = 0; i < k; ++i)
          if (!(ws.act[L][i] > 0.0)) ws.delta[i] = 0.0;
        break;
      case Activation::Tanh:
        for (std::size_t i = 0; i < k; ++i)
          ws.delta[i] *= 1.0 - ws.act[L][i] * ws.act[L][i];
        break;
      case Activation::Identity: break;
    }
  } else {
    double mx = ws.out[0];
    for (std::size_t i = 1; i < k; ++i) mx = std::max(mx, ws.out[i]);
    double zsum = 0.0;
    for (std::size_t i = 0; i < k; ++i) zsum += std::exp(ws.out[i] - mx);
    for (std::size_t i = 0; i < k; ++i)
      ws.delta[i] = std::exp(ws.out[i] - mx) / zsum - y[i];
  }

  for (std::size_t l = L; l-- > 0;) {
    const std::size_t w = layers_[l].width;
    const std::size_t prev = l == 0 ? in_dim_ : layers_[l - 1].width;
    const Vec& a = ws.act[l];
    double* gW = grad.data() + w_off_[l];
    double* gb = layers_[l].bias ? grad.data() + b_off_[l] : nullptr;
    const double* W = theta.data() + w_off_[l];
    ws.delta_prev.assign(prev, 0.0);
    for (std::size_t i = 0; i < w; ++i) {
      const double di = ws.delta[i];
      double* grow = gW + i * prev;
      const double* wrow = W + i * prev;
      for (std::size_t j = 0; j < prev; ++j) {
        grow[j] += di * a[j];
        ws.delta_prev[j] += di * wrow[j];
      }
      if (gb) gb[i] += di;
    }
    if (l > 0) {
      switch (layers_[l - 1].act) {
        case Activation::ReLU:
          for (std::size_t j = 0; j < prev; ++j)
            if (!(a[j] > 0.0)) ws.delta_prev[j] = 0.0;
          break;
        case Activation::Tanh:
          for (std::size_t j = 0; j < prev; ++j)
            ws.delta_prev[j] *= 1.0 - a[j] * a[j];
          break;
        case Activation::Identity: break;
      }
      ws.delta = ws.delta_prev;
    }
  }
  return loss;
}

double FeedForwardNet::reg_value(const Vec& theta) const {
  if (eta_ == 0.0) return 0.0;
  const double n2 = norm_sq(theta);
  return eta_ / (2.0 * (r_reg_ + 1.0)) * std::pow(n2, r_reg_ + 1.0);
}

void FeedForwardNet::add_reg_grad(const Vec& theta, Vec& grad) const {
  if (eta_ == 0.0) return;
  const double coef = eta_ * std::pow(norm_sq(theta), r_reg_);
  for (std::size_t i = 0; i < theta.size(); ++i) grad[i] += coef * theta[i];
}

std::unique_ptr<TrainWorkspace> FeedForwardNet::make_workspace() const {
  return std::make_unique<FfnWorkspace>();
}

double FeedForwardNet::batch_objective_grad(const Vec& theta,
                                            const Dataset& ds,
                                            const std::size_t* idx,
                                            std::size_t n, Vec& grad,
                                            TrainWorkspace& ws) const {
  if (n == 0) throw std::invalid_argument("ffn: empty batch");
  if (ds.feat_dim != in_dim_ || ds.target_dim != out_dim())
    throw std::invalid_argument("ffn: dataset dims " +
                                std::to_string(ds.feat_dim) + "/" +
                                std::to_string(ds.target_dim) +
                                " do not match net " +
                                std::to_string(in_dim_) + "/" +
                                std::to_string(out_dim()));
  auto& w = dynamic_cast<FfnWorkspace&>(ws);
  grad.assign(n_params_, 0.0);
  double loss = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    loss += forward_backward(theta, ds.x_row(idx[k]), ds.y_row(idx[k]), grad, w);
  const double inv = 1.0 / static_cast<double>(n);
  for (double& g : grad) g *= inv;
  add_reg_grad(theta, grad);
  return loss * inv + reg_value(theta);
}

double FeedForwardNet::dataset_metric(const Vec& theta, const Dataset& ds,
                                      const std::vector<std::size_t>& idx,
                                      TrainWorkspace& ws) const {
  if (idx.empty()) throw std::invalid_argument("ffn: empty evaluation split");
  auto& w = dynamic_cast<FfnWorkspace&>(ws);
  const std::size_t k = out_dim();
  double acc = 0.0;
  for (auto i : idx) {
    forward(theta, ds.x_row(i), w.out, w);
    const double* y = ds.y_row(i);
    if (loss_ == LossKind::Squared) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double e = y[j] - w.out[j];
        s += e * e;
      }
      acc += s;
    } else {
      std::size_t am = 0, ay = 0;
      for (std::size_t j = 1; j < k; ++j) {
        if (w.out[j] > w.out[am]) am = j;
        if (y[j] > y[ay]) ay = j;
      }
      acc += am == ay ? 1.0 : 0.0;
    }
  }
  return acc / static_cast<double>(idx.size());
}

ParamVector FeedForwardNet::xavier_init(RngStream& rng) const {
  Vec v(n_params_, 0.0);
  std::size_t prev = in_dim_;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::size_t w = layers_[l].width;
    const double bound = std::sqrt(6.0 / static_cast<double>(prev + w));
    for (std::size_t i = 0; i < w * prev; ++i)
      v[w_off_[l] + i] = rng.uniform(-bound, bound);
    prev = w;
  }
  return ParamVector(std::move(v));
}

double FeedForwardNet::eval_U(const Vec& theta, const double* x) const {
  FfnWorkspace ws;
  return sample_loss(theta, x, x + in_dim_, ws);
}

void FeedForwardNet::eval_F(const Vec& theta, const double*, Vec& out) const {
  out.assign(n_params_, 0.0);
  add_reg_grad(theta, out);
}

void FeedForwardNet::eval_G(const Vec& theta, const double* x, Vec& out) const {
  FfnWorkspace ws;
  out.assign(n_params_, 0.0);
  forward_backward(theta, x, x + in_dim_, out, ws);
}

// -------------------------------------------------------- fixed-net trainer

namespace {

struct FixedNetWorkspace final : TrainWorkspace {
  Vec relu, active, err, out;
};

}  // namespace

std::unique_ptr<TrainWorkspace> FixedNetTrainer::make_workspace() const {
  return std::make_unique<FixedNetWorkspace>();
}

double FixedNetTrainer::batch_objective_grad(const Vec& theta,
                                             const Dataset& ds,
                                             const std::size_t* idx,
                                             std::size_t n, Vec& grad,
                                             TrainWorkspace& ws) const {
  if (n == 0) throw std::invalid_argument("fixed_net: empty batch");
  if (ds.feat_dim != net_->m1() || ds.target_dim != net_->m2())
    throw std::invalid_argument("fixed_net: dataset dims do not match net");
  auto& w = dynamic_cast<FixedNetWorkspace&>(ws);
  const std::size_t d1 = net_->d1(), m1 = net_->m1(), m2 = net_->m2();
  const std::vector<double>& c = net_->c();
  const double* b0 = theta.data() + m2 * d1;
  w.relu.resize(d1);
  w.active.resize(d1);
  w.err.resize(m2);
  grad.assign(theta.size(), 0.0);
  double loss = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const double* z = ds.x_row(idx[s]);
    const double* y = ds.y_row(idx[s]);
    for (std::size_t j = 0; j < d1; ++j) {
      double pre = b0[j];
      for (std::size_t k = 0; k < m1; ++k) pre += c[j * m1 + k] * z[k];
      w.relu[j] = pre > 0.0 ? pre : 0.0;
      w.active[j] = pre >= 0.0 ? 1.0 : 0.0;
    }
    for (std::size_t i = 0; i < m2; ++i) {
      double o = 0.0;
      for (std::size_t j = 0; j < d1; ++j) o += theta[i * d1 + j] * w.relu[j];
      w.err[i] = y[i] - o;
      loss += w.err[i] * w.err[i];
    }
    for (std::size_t i = 0; i < m2; ++i)
      for (std::size_t j = 0; j < d1; ++j)
        grad[i * d1 + j] -= 2.0 * w.err[i] * w.relu[j];
    for (std::size_t j = 0; j < d1; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < m2; ++i) acc += w.err[i] * theta[i * d1 + j];
      grad[m2 * d1 + j] -= 2.0 * acc * w.active[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (double& g : grad) g *= inv;
  const double n2 = norm_sq(theta);
  const double coef = net_->eta() * n2 * n2;
  for (std::size_t i = 0; i < theta.size(); ++i) grad[i] += coef * theta[i];
  return loss * inv + net_->eta() / 6.0 * n2 * n2 * n2;
}

double FixedNetTrainer::dataset_metric(const Vec& theta, const Dataset& ds,
                                       const std::vector<std::size_t>& idx,
                                       TrainWorkspace& ws) const {
  if (idx.empty())
    throw std::invalid_argument("fixed_net: empty evaluation split");
  auto& w = dynamic_cast<FixedNetWorkspace&>(ws);
  double acc = 0.0;
  for (auto i : idx) {
    net_->forward(theta, ds.x_row(i), w.out);
    const double* y = ds.y_row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < net_->m2(); ++j) {
      const double e = y[j] - w.out[j];
      s += e * e;
    }
    acc += s;
  }
  return acc / static_cast<double>(idx.size());
}

}  // namespace tusla
