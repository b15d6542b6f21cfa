#pragma once

#include "tusla/core.hpp"
#include "tusla/data.hpp"

namespace tusla {

// Scalar objective (d = m = 1) with a discontinuous stochastic gradient:
//   U(theta, x) = a1 theta^2 1{x<=theta} + a2 theta^2 1{x>theta} + theta^30
// inside |theta| <= 1 and the matching piecewise-linear continuation
// outside.  Growth/regularity constants: q = 3, r = 14, rho = 1.  The law
// must expose a density; u and its gradient then have closed forms.
class ArtificialProblem final : public GradientOracle {
 public:
  ArtificialProblem(double a1, double a2, std::shared_ptr<const DataLaw> law);

  double a1() const { return a1_; }
  double a2() const { return a2_; }

  double U1(double th, double x) const;
  double F1(double th) const;
  double G1(double th, double x) const;
  double H1(double th, double x) const { return F1(th) + G1(th, x); }
  double u_exact1(double th) const;
  double h_exact1(double th) const;

  double eval_U(const Vec& theta, const double* x) const override;
  void eval_F(const Vec& theta, const double* x, Vec& out) const override;
  void eval_G(const Vec& theta, const double* x, Vec& out) const override;
  bool has_u_exact() const override { return true; }
  double u_exact(const Vec& theta) const override;
  bool has_h_exact() const override { return true; }
  void h_exact(const Vec& theta, Vec& out) const override;

 private:
  double a1_, a2_;
};

// Single hidden ReLU layer with a frozen input matrix c (d1 x m1); the
// trainable parameter is theta = [W1 row-major (m2 x d1), b0 (d1)].  Data
// samples are x = [y (m2); z (m1)].  Per-sample objective is the squared
// error |y - N(theta, z)|^2; the ridge term eta/(2(r+1)) |theta|^(2(r+1))
// with r = 2 enters through F = eta theta |theta|^(2r).  q = 4, rho = 2.
class FixedInputNet final : public GradientOracle {
 public:
  FixedInputNet(std::size_t d1, std::size_t m1, std::size_t m2,
                std::vector<double> c, double eta,
                std::shared_ptr<const DataLaw> law = nullptr);

  std::size_t d1() const { return d1_; }
  std::size_t m1() const { return m1_; }
  std::size_t m2() const { return m2_; }
  double eta() const { return eta_; }
  double c_frobenius() const;
  const std::vector<double>& c() const { return c_; }

  void forward(const Vec& theta, const double* z, Vec& out) const;
  double eval_U(const Vec& theta, const double* x) const override;
  void eval_F(const Vec& theta, const double* x, Vec& out) const override;
  void eval_G(const Vec& theta, const double* x, Vec& out) const override;

  // W1 ~ U(+-sqrt(6/(d1+m2))), b0 = 0
  ParamVector xavier_init(RngStream& rng) const;

 private:
  std::size_t d1_, m1_, m2_;
  std::vector<double> c_;
  double eta_;
};

enum class Activation { ReLU, Tanh, Identity };
enum class LossKind { Squared, SoftmaxCrossEntropy };

struct LayerSpec {
  std::size_t width = 0;
  Activation act = Activation::ReLU;
  bool bias = true;
};

// Scratch space handed to the training entry points so a shared problem
// object stays immutable and re-entrant.
struct TrainWorkspace {
  virtual ~TrainWorkspace() = default;
};

// Mini-batch training interface over an in-memory dataset.
class SupervisedProblem {
 public:
  virtual ~SupervisedProblem() = default;
  virtual std::size_t n_params() const = 0;
  virtual std::unique_ptr<TrainWorkspace> make_workspace() const = 0;
  // mean per-sample loss plus the ridge term; grad gets the full gradient
  virtual double batch_objective_grad(const Vec& theta, const Dataset& ds,
                                      const std::size_t* idx, std::size_t n,
                                      Vec& grad, TrainWorkspace& ws) const = 0;
  // evaluation metric over the given rows: MSE, or accuracy for classifiers
  virtual double dataset_metric(const Vec& theta, const Dataset& ds,
                                const std::vector<std::size_t>& idx,
                                TrainWorkspace& ws) const = 0;
  virtual bool metric_is_accuracy() const { return false; }
};

// Workspace for the dense nets below.
struct FfnWorkspace final : TrainWorkspace {
  std::vector<Vec> act;
  Vec delta, delta_prev, out, grad1;
};

// Fully-connected feed-forward network with manual backpropagation.
// Flat parameter layout, layer by layer: weights row-major, then the bias
// when present.  ReLU derivative at 0 is taken as 0.  With the
// cross-entropy loss the last layer must be Identity; softmax is applied
// inside the loss.  The ridge term eta/(2(r+1)) |theta|^(2(r+1)) is added
// to the objective and eta theta |theta|^(2r) to the gradient.
class FeedForwardNet final : public GradientOracle, public SupervisedProblem {
 public:
  FeedForwardNet(std::size_t in_dim, std::vector<LayerSpec> layers,
                 LossKind loss, double eta, double r_reg,
                 std::shared_ptr<const DataLaw> law = nullptr);

  std::size_t n_params() const override { return dim_param(); }
  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return layers_.back().width; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  LossKind loss() const { return loss_; }

  // [first, last) parameter range of layer l's weight block
  std::pair<std::size_t, std::size_t> layer_weight_range(std::size_t l) const;

  void forward(const Vec& theta, const double* z, Vec& out,
               FfnWorkspace& ws) const;
  // per-sample loss (without ridge) and its gradient added into grad
  double forward_backward(const Vec& theta, const double* z, const double* y,
                          Vec& grad, FfnWorkspace& ws) const;

  std::unique_ptr<TrainWorkspace> make_workspace() const override;
  double batch_objective_grad(const Vec& theta, const Dataset& ds,
                              const std::size_t* idx, std::size_t n, Vec& grad,
                              TrainWorkspace& ws) const override;
  double dataset_metric(const Vec& theta, const Dataset& ds,
                        const std::vector<std::size_t>& idx,
                        TrainWorkspace& ws) const override;
  bool metric_is_accuracy() const override {
    return loss_ == LossKind::SoftmaxCrossEntropy;
  }

  ParamVector xavier_init(RngStream& rng) const;

  // GradientOracle view over samples x = [z; y]
  double eval_U(const Vec& theta, const double* x) const override;
  void eval_F(const Vec& theta, const double* x, Vec& out) const override;
  void eval_G(const Vec& theta, const double* x, Vec& out) const override;

 private:
  double sample_loss(const Vec& theta, const double* z, const double* y,
                     FfnWorkspace& ws) const;
  void add_reg_grad(const Vec& theta, Vec& grad) const;
  double reg_value(const Vec& theta) const;

  std::size_t in_dim_;
  std::vector<LayerSpec> layers_;
  LossKind loss_;
  double eta_, r_reg_;
  std::vector<std::size_t> w_off_, b_off_;  // b_off_[l] == npos if no bias
  std::size_t n_params_ = 0;
};

// Dataset training adapter for FixedInputNet (features z, targets y).
class FixedNetTrainer final : public SupervisedProblem {
 public:
  explicit FixedNetTrainer(std::shared_ptr<const FixedInputNet> net)
      : net_(std::move(net)) {}
  std::size_t n_params() const override { return net_->dim_param(); }
  std::unique_ptr<TrainWorkspace> make_workspace() const override;
  double batch_objective_grad(const Vec& theta, const Dataset& ds,
                              const std::size_t* idx, std::size_t n, Vec& grad,
                              TrainWorkspace& ws) const override;
  double dataset_metric(const Vec& theta, const Dataset& ds,
                        const std::vector<std::size_t>& idx,
                        TrainWorkspace& ws) const override;

 private:
  std::shared_ptr<const FixedInputNet> net_;
};

}  // namespace tusla
