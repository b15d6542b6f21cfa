#pragma once

#include <functional>

#include "tusla/core.hpp"
#include "tusla/logval.hpp"
#include "tusla/problems.hpp"

namespace tusla {

// Primitive regularity/dissipativity constants of a problem instance, the
// inputs of every derived bound.  mu(k) = E[(1+|X0|)^k]; mu_two_rho_m1 =
// E[(1+2|X0|)^(rho-1)].
struct AssumptionConstants {
  double q = 0, r = 0, rbar = 0, rho = 1;
  double L_G = 0, K_G = 0, L_F = 0, K_F = 0, a = 0, b = 0;
  double d = 1;
  double beta = 1;
  double h0_norm = 0;  // |h(0)|
  std::function<double(double)> mu;
  double mu_two_rho_m1 = 1;
  void validate() const;  // throws std::invalid_argument
};

AssumptionConstants artificial_assumptions(const ArtificialProblem& prob,
                                           double beta);
AssumptionConstants fixed_net_assumptions(const FixedInputNet& net,
                                          double beta, double C_Z_max,
                                          double Cbar_Z_max,
                                          std::function<double(double)> mu,
                                          double mu_two_rho_m1);

struct GrowthConstants {
  double K_H = 0;  // K_H := 2^(2r) K_G + K_F
  double L_h = 0;  // L_h := L_G + L_F E[(1+2|X0|)^(rho-1)] + 1
};
GrowthConstants derive_growth(const AssumptionConstants& ac);

struct DissipativityConstants {
  double a_F = 0;  // a_F := a/2
  double R_F = 0;  // R_F := max{(4b/a)^(1/(2r-rbar)), 2^(1/(2r))}
  double b_F = 0;  // b_F := (a/2+b) R_F^(rbar+2) + K_F^2 mu(2 rho)/(2a)
  double a_h = 0;  // a_h := 2^q K_G mu(rho)
  double b_h = 0;  // b_h := 3 (2^(q+1) K_G mu(rho)/min{1,a_F})^(q+2) + b_F
};
DissipativityConstants derive_dissipativity(const AssumptionConstants& ac);

struct OneSidedConstants {
  double R = 0;    // R := max{1, (3^(q-1) L_G/a)^(1/(2r-q+1)), (2b/a)^(1/(2r-rbar))}
  double L_R = 0;  // L_R := L_h (1+2R)^(2r)
};
// throws std::invalid_argument when 2r - q + 1 <= 0
OneSidedConstants derive_one_sided(const AssumptionConstants& ac);

// Largest admissible stepsize for 2p-th moment control, and the relaxed
// variant that drops the binomial factor.
LogVal stepsize_max(double p, const AssumptionConstants& ac);
LogVal stepsize_max_relaxed(const AssumptionConstants& ac);

// Second-moment (p = 1) bound: sup_n E|theta_n|^2 <= E|theta_0|^2 +
// c0 (1 + 1/(a_F kappa)).
struct MomentP1 {
  double M0 = 0, kappa = 0;
  LogVal c0;
};
MomentP1 moment_bound_p1(const AssumptionConstants& ac);

// 2p-th moment cascade (integer p >= 1 for the first block, p >= 2 for the
// beta-dependent tails); kappa_sharp = min of the two kappas, c_sharp = max
// of the two additive constants.
struct MomentCascade {
  double p = 0;
  LogVal c3, M1, c4;
  double kappa_bar = 0;
  LogVal M2, c5, cbar0;
  LogVal M3, c6;
  double kappa_tilde = 0;
  LogVal M4, c7, ctilde0;
  double kappa_sharp = 0;
  LogVal c_sharp;
};
MomentCascade moment_bound_constants(double p, const AssumptionConstants& ac);

// Lyapunov drift: V_p(theta) = (1+|theta|^2)^(p/2);
// c_V1 = a_h p/4, c_V2 = (3/4) a_h p v_p(M_V(p)).
struct DriftConstants {
  double M_V = 0, c_V1 = 0, c_V2 = 0, v_p_M_V = 0;
};
DriftConstants drift_constants(double p, double a_h, double b_h, double d,
                               double beta);
double v_p(double w, double p);
double V_p(const Vec& theta, double p);

struct ContractionConstants {
  double c0_dot = 0, c1_dot = 0;
  LogVal I, eps, phi_bar, c_dot, c_hat;
};
ContractionConstants contraction_constants(double c_V1, double c_V2,
                                           double L_R, double beta);

// Inputs that come from the invariant measure and the initial condition.
struct TheoremInputs {
  double intV2_pi = 2.0;             // integral of V_2 d pi
  double pi_abs_moment_4rp2 = 1.0;   // E_pi |theta|^(4r+2)
  double theta0_moment_4rp2 = 1.0;   // E|theta_0|^(4r+2)
  double theta0_moment_4_2rp1 = 1.0; // E|theta_0|^(4(2r+1))
};

struct TheoremConstants {
  LogVal C01, C11;
  LogVal Cb0, Cb1, Cb2, Cb3, Cb4, Cb5, Cb6, Cb7;
  LogVal C0, C1, C2, C3, C4, C5, C6, C7, C8;
  double C9 = 0;
  double R_theta_star = 0;
  LogVal mn;  // min{c_dot, a_F kappa_sharp_2 / 2, a_h}
  TheoremInputs inputs;
  double r = 0, beta = 0;
  LogVal lambda_max_4rp2;
};
TheoremConstants theorem_constants(const AssumptionConstants& ac,
                                   const TheoremInputs& in);

enum class BoundKind { W1, W2, ExcessRisk };

struct BoundValue {
  LogVal value;
  bool lambda_exceeds_max = false;  // stepsize above the admissible maximum
};
BoundValue evaluate_bound(BoundKind kind, double n, double lambda,
                          const TheoremConstants& tc);

// Flat report of every constant with its defining formula, for the CLI.
struct ReportEntry {
  std::string name;
  LogVal value;
  std::string definition;
};
std::vector<ReportEntry> bounds_report(const AssumptionConstants& ac,
                                       const TheoremInputs& in,
                                       const std::vector<int>& moment_ps);

}  // namespace tusla
