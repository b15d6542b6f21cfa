#include "tusla/bounds.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tusla {

namespace {

constexpr double kPi = 3.14159265358979323846;

LogVal lv(double x) { return LogVal::from_value(x); }

// kappa(M) = M^(2r) / (2 (1 + M^(2r))), stable for astronomically large M.
double kappa_of(const LogVal& M, double r) {
  if (M.is_zero()) return 0.0;
  const double t = 2.0 * r * M.lg();  // log M^(2r)
  if (t >= 0.0) return 0.5 / (1.0 + std::exp(-t));
  return 0.5 * std::exp(t) / (1.0 + std::exp(t));
}

LogVal pow2(double e) { return LogVal::from_lg(e * std::log(2.0)); }
LogVal pow3(double e) { return LogVal::from_lg(e * std::log(3.0)); }

LogVal binom(double n, double k) {
  return LogVal::from_lg(log_binomial(n, k));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("assumption constants: " + what);
}

double ipart(double x, const char* name) {
  const double p = std::round(x);
  if (std::abs(x - p) > 1e-9 || p < 1.0)
    throw std::invalid_argument(std::string(name) +
                                " must be a positive integer, got " +
                                std::to_string(x));
  return p;
}

}  // namespace

void AssumptionConstants::validate() const {
  require(q >= 1.0, "q must be >= 1");
  require(r > 0.0, "r must be > 0");
  require(rbar >= 0.0 && 2.0 * r > rbar, "need 0 <= rbar < 2r");
  require(rho >= 0.0, "rho must be >= 0");
  require(L_G >= 0 && K_G > 0, "K_G must be > 0, L_G >= 0");
  require(L_F >= 0 && K_F >= 0, "L_F, K_F must be >= 0");
  require(a > 0.0, "a must be > 0");
  require(b >= 0.0, "b must be >= 0");
  require(d >= 1.0, "d must be >= 1");
  require(beta > 0.0, "beta must be > 0");
  require(h0_norm >= 0.0, "h0_norm must be >= 0");
  require(static_cast<bool>(mu), "mu must be callable");
  require(std::abs(mu(0.0) - 1.0) < 1e-9, "mu(0) must equal 1");
  require(mu_two_rho_m1 > 0.0, "mu_two_rho_m1 must be > 0");
}

AssumptionConstants artificial_assumptions(const ArtificialProblem& prob,
                                           double beta) {
  auto law = prob.data_law();
  const double c_X = law->density_sup();
  const double L_X = law->density_lipschitz();
  const double s = 1.0 + std::abs(prob.a1()) + std::abs(prob.a2());
  AssumptionConstants ac;
  ac.q = prob.q();
  ac.r = prob.r();
  ac.rbar = 0.0;
  ac.rho = prob.rho();
  ac.L_G = (4.0 + 5.0 * c_X + 2.0 * L_X) * s;
  ac.K_G = (4.0 + 2.0 * c_X) * s;
  ac.L_F = 870.0;
  ac.K_F = 30.0;
  ac.a = 15.0;
  ac.b = 0.0;
  ac.d = 1.0;
  ac.beta = beta;
  ac.h0_norm = std::abs(prob.h_exact1(0.0));
  ac.mu = [law](double k) { return law->moment_one_plus_abs(k); };
  ac.mu_two_rho_m1 = law->moment_one_plus_two_abs(ac.rho - 1.0);
  return ac;
}

AssumptionConstants fixed_net_assumptions(const FixedInputNet& net,
                                          double beta, double C_Z_max,
                                          double Cbar_Z_max,
                                          std::function<double(double)> mu,
                                          double mu_two_rho_m1) {
  const double cF = net.c_frobenius();
  const double m2 = net.m2(), d1 = net.d1();
  const double eta = net.eta();
  AssumptionConstants ac;
  ac.q = net.q();
  ac.r = net.r();
  ac.rbar = 0.0;
  ac.rho = net.rho();
  ac.mu = std::move(mu);
  ac.L_G = 55.0 * m2 * d1 * d1 * (1.0 + cF) * (1.0 + cF) *
           (1.0 + C_Z_max + Cbar_Z_max) * ac.mu(2.0);
  ac.K_G = 8.0 * m2 * d1 * d1 * (1.0 + cF) * (1.0 + cF);
  ac.L_F = 5.0 * eta;
  ac.K_F = eta;
  ac.a = eta / 2.0;
  ac.b = 0.0;
  ac.d = static_cast<double>(net.dim_param());
  ac.beta = beta;
  ac.h0_norm = 0.0;  // G(0,x) = 0 and F(0) = 0
  ac.mu_two_rho_m1 = mu_two_rho_m1;
  return ac;
}

GrowthConstants derive_growth(const AssumptionConstants& ac) {
  GrowthConstants g;
  g.K_H = std::pow(2.0, 2.0 * ac.r) * ac.K_G + ac.K_F;
  g.L_h = ac.L_G + ac.L_F * ac.mu_two_rho_m1 + 1.0;
  return g;
}

DissipativityConstants derive_dissipativity(const AssumptionConstants& ac) {
  DissipativityConstants dc;
  dc.a_F = ac.a / 2.0;
  const double r1 =
      ac.b > 0.0 ? std::pow(4.0 * ac.b / ac.a, 1.0 / (2.0 * ac.r - ac.rbar))
                 : 0.0;
  dc.R_F = std::max(r1, std::pow(2.0, 1.0 / (2.0 * ac.r)));
  dc.b_F = (ac.a / 2.0 + ac.b) * std::pow(dc.R_F, ac.rbar + 2.0) +
           ac.K_F * ac.K_F * ac.mu(2.0 * ac.rho) / (2.0 * ac.a);
  dc.a_h = std::pow(2.0, ac.q) * ac.K_G * ac.mu(ac.rho);
  dc.b_h = 3.0 * std::pow(std::pow(2.0, ac.q + 1.0) * ac.K_G * ac.mu(ac.rho) /
                              std::min(1.0, dc.a_F),
                          ac.q + 2.0) +
           dc.b_F;
  return dc;
}

OneSidedConstants derive_one_sided(const AssumptionConstants& ac) {
  const double expo = 2.0 * ac.r - ac.q + 1.0;
  if (expo <= 0.0)
    throw std::invalid_argument(
        "one-sided constants need 2r - q + 1 > 0, got " + std::to_string(expo));
  const GrowthConstants g = derive_growth(ac);
  OneSidedConstants oc;
  const double r1 =
      std::pow(std::pow(3.0, ac.q - 1.0) * ac.L_G / ac.a, 1.0 / expo);
  const double r2 =
      ac.b > 0.0 ? std::pow(2.0 * ac.b / ac.a, 1.0 / (2.0 * ac.r - ac.rbar))
                 : 0.0;
  oc.R = std::max({1.0, r1, r2});
  oc.L_R = g.L_h * std::pow(1.0 + 2.0 * oc.R, 2.0 * ac.r);
  return oc;
}

LogVal stepsize_max(double p, const AssumptionConstants& ac) {
  p = ipart(p, "p");
  const DissipativityConstants dc = derive_dissipativity(ac);
  const double ratio = dc.a_F / ac.K_F;
  const double t1 =
      std::min(ratio * ratio, std::pow(ratio, 2.0 / (2.0 * p - 1.0)));
  const LogVal denom = lv(9.0) * binom(2.0 * p, p) * binom(2.0 * p, p) *
                       lv(ac.K_F * ac.K_F) *
                       lv(ac.mu(2.0 * p * ac.rho)).pow(2.0);
  LogVal out = LogVal::min(LogVal::one(), lv(t1) / denom);
  out = LogVal::min(out, lv(1.0 / dc.a_F));
  out = LogVal::min(out, lv(1.0 / (4.0 * dc.a_F * dc.a_F)));
  return out;
}

LogVal stepsize_max_relaxed(const AssumptionConstants& ac) {
  const DissipativityConstants dc = derive_dissipativity(ac);
  const double v = std::min(
      {1.0, dc.a_F * dc.a_F / (16.0 * std::pow(ac.K_F, 4.0)),
       1.0 / dc.a_F, 1.0 / (4.0 * dc.a_F * dc.a_F)});
  return lv(v);
}

MomentP1 moment_bound_p1(const AssumptionConstants& ac) {
  const DissipativityConstants dc = derive_dissipativity(ac);
  MomentP1 m;
  m.M0 = std::pow(
      std::pow(2.0, ac.q + 2.0) * ac.K_G * ac.mu(2.0 * ac.rho) /
          std::min(1.0, dc.a_F),
      1.0 / (2.0 * ac.r - ac.q + 1.0));
  m.kappa = kappa_of(lv(m.M0), ac.r);
  const double mu_rho = ac.mu(ac.rho);
  const double mu_2rho = ac.mu(2.0 * ac.rho);
  const double c0 =
      2.0 * ac.d / ac.beta + dc.a_F * m.kappa * m.M0 * m.M0 +
      std::pow(2.0, ac.q + 1.0) * ac.K_G * mu_rho *
          std::pow(m.M0, ac.q + 1.0) +
      2.0 * dc.b_F + std::pow(2.0, ac.q + 1.0) * ac.K_G * mu_rho +
      std::pow(2.0, 2.0 * ac.q + 1.0) * ac.K_G * ac.K_G * mu_2rho +
      4.0 * ac.K_F * ac.K_F * mu_2rho;
  m.c0 = lv(c0);
  return m;
}

namespace {

struct C3C4 {
  LogVal c3, M1, c4;
  double kappa_bar = 0;
};

C3C4 c3c4_block(double p, const AssumptionConstants& ac,
                const DissipativityConstants& dc) {
  C3C4 out;
  const double mu_rho = ac.mu(ac.rho);
  out.c3 = binom(2.0 * p, p).pow(2.0) * pow2(2.0 * p * (ac.q + 1.0)) *
           lv(p * (2.0 * p - 1.0)) * lv(ac.K_G).pow(2.0 * p) *
           lv(1.0 + ac.K_F).pow(2.0 * p) * lv(ac.mu(2.0 * p * ac.rho));
  out.M1 = (lv(4.0 * p * dc.b_F) +
            lv(std::pow(2.0, ac.q + 2.0) * p * ac.K_G * mu_rho) +
            lv(2.0) * out.c3) /
           lv(std::min(1.0, dc.a_F));
  out.kappa_bar = kappa_of(out.M1, ac.r);
  out.c4 = lv(dc.a_F * out.kappa_bar) * out.M1.pow(2.0 * p) +
           lv(std::pow(2.0, ac.q + 1.0) * p * ac.K_G * mu_rho) *
               out.M1.pow(2.0 * p + ac.q - 1.0) +
           (lv(2.0 * p * dc.b_F) +
            lv(std::pow(2.0, ac.q + 1.0) * p * ac.K_G * mu_rho) + out.c3) *
               (LogVal::one() + out.M1.pow(2.0 * p - 1.0));
  return out;
}

struct C6Block {
  LogVal M3, c6;
  double kappa_tilde = 0;
};

C6Block c6_block(double p, const AssumptionConstants& ac,
                 const DissipativityConstants& dc) {
  C6Block out;
  const double bk = 1.0 + 2.0 * dc.b_F + 4.0 * ac.K_F * ac.K_F;
  const LogVal inner =
      pow2(2.0 * p * (ac.q + 1.0)) * lv(ac.K_G).pow(2.0 * p) *
          lv(ac.mu(2.0 * p * ac.rho)) +
      lv(bk).pow(p);
  out.M3 = binom(p, std::ceil(p / 2.0)) * pow3(p + 2.0) * lv(p) * inner /
           lv(std::min(1.0, dc.a_F));
  out.kappa_tilde = kappa_of(out.M3, ac.r);
  LogVal sum;  // zero
  const double bk2 = 2.0 * dc.b_F + 4.0 * ac.K_F * ac.K_F;
  for (double k = 1.0; k <= p + 0.5; k += 1.0) {
    const LogVal term =
        binom(p, k) * pow3(k) *
        (pow2(k * (2.0 * ac.q + 2.0)) * lv(ac.K_G).pow(2.0 * k) *
             lv(ac.mu(2.0 * k * ac.rho)) +
         lv(bk2).pow(k)) *
        out.M3.pow(2.0 * p + k * (ac.q - 1.0));
    sum = sum + term;
  }
  out.c6 = lv(dc.a_F * out.kappa_tilde) * out.M3.pow(2.0 * p) + sum;
  return out;
}

// tail(p) = c_p + 2^(2p-2) p (2p-1) (d/beta) c_{p-1}
//         + 2^(2p-4) (2p(2p-1))^(p+1) (d/beta)^p
//         + 2^(2p-2) p (2p-1) (d/beta) M^(2p-2),
// with M^2 = 2^(2p-1) p (2p-1) (d/beta) / (a_F kappa).
LogVal tail_sum(double p, const LogVal& cp, const LogVal& cpm1, double kappa,
                const AssumptionConstants& ac,
                const DissipativityConstants& dc, LogVal* M_out) {
  const double db = ac.d / ac.beta;
  const LogVal M2sq =
      pow2(2.0 * p - 1.0) * lv(p * (2.0 * p - 1.0)) * lv(db) /
      lv(dc.a_F * kappa);
  const LogVal M = M2sq.sqrt();
  if (M_out) *M_out = M;
  const LogVal c5 = cp +
                    pow2(2.0 * p - 2.0) * lv(p * (2.0 * p - 1.0)) * lv(db) *
                        cpm1 +
                    pow2(2.0 * p - 4.0) *
                        lv(2.0 * p * (2.0 * p - 1.0)).pow(p + 1.0) *
                        lv(db).pow(p);
  return c5 + pow2(2.0 * p - 2.0) * lv(p * (2.0 * p - 1.0)) * lv(db) *
                  M.pow(2.0 * p - 2.0);
}

}  // namespace

MomentCascade moment_bound_constants(double p, const AssumptionConstants& ac) {
  p = ipart(p, "p");
  if (p < 2.0)
    throw std::invalid_argument("moment cascade needs integer p >= 2");
  const DissipativityConstants dc = derive_dissipativity(ac);
  MomentCascade mc;
  mc.p = p;

  const C3C4 hi = c3c4_block(p, ac, dc);
  const C3C4 lo = c3c4_block(p - 1.0, ac, dc);
  mc.c3 = hi.c3;
  mc.M1 = hi.M1;
  mc.c4 = hi.c4;
  mc.kappa_bar = hi.kappa_bar;
  mc.cbar0 = tail_sum(p, hi.c4, lo.c4, hi.kappa_bar, ac, dc, &mc.M2);
  {
    const double db = ac.d / ac.beta;
    mc.c5 = hi.c4 +
            pow2(2.0 * p - 2.0) * lv(p * (2.0 * p - 1.0)) * lv(db) * lo.c4 +
            pow2(2.0 * p - 4.0) * lv(2.0 * p * (2.0 * p - 1.0)).pow(p + 1.0) *
                lv(db).pow(p);
  }

  const C6Block thi = c6_block(p, ac, dc);
  const C6Block tlo = c6_block(p - 1.0, ac, dc);
  mc.M3 = thi.M3;
  mc.c6 = thi.c6;
  mc.kappa_tilde = thi.kappa_tilde;
  mc.ctilde0 = tail_sum(p, thi.c6, tlo.c6, thi.kappa_tilde, ac, dc, &mc.M4);
  {
    const double db = ac.d / ac.beta;
    mc.c7 = thi.c6 +
            pow2(2.0 * p - 2.0) * lv(p * (2.0 * p - 1.0)) * lv(db) * tlo.c6 +
            pow2(2.0 * p - 4.0) * lv(2.0 * p * (2.0 * p - 1.0)).pow(p + 1.0) *
                lv(db).pow(p);
  }

  mc.kappa_sharp = std::min(mc.kappa_bar, mc.kappa_tilde);
  mc.c_sharp = LogVal::max(mc.cbar0, mc.ctilde0);
  return mc;
}

double v_p(double w, double p) { return std::pow(1.0 + w * w, p / 2.0); }

double V_p(const Vec& theta, double p) {
  return std::pow(1.0 + norm_sq(theta), p / 2.0);
}

DriftConstants drift_constants(double p, double a_h, double b_h, double d,
                               double beta) {
  if (p < 2.0) throw std::invalid_argument("drift constants need p >= 2");
  DriftConstants dr;
  dr.M_V = std::sqrt(1.0 / 3.0 + 4.0 * b_h / (3.0 * a_h) +
                     4.0 * d / (3.0 * a_h * beta) +
                     4.0 * (p - 2.0) / (3.0 * a_h * beta));
  dr.v_p_M_V = v_p(dr.M_V, p);
  dr.c_V1 = a_h * p / 4.0;
  dr.c_V2 = 0.75 * a_h * p * dr.v_p_M_V;
  return dr;
}

ContractionConstants contraction_constants(double c_V1, double c_V2,
                                           double L_R, double beta) {
  if (c_V1 <= 0 || c_V2 <= 0 || L_R <= 0 || beta <= 0)
    throw std::invalid_argument("contraction constants need positive inputs");
  ContractionConstants cc;
  cc.c0_dot = 2.0 * std::sqrt(4.0 * c_V2 * (1.0 + c_V1) / c_V1 - 1.0);
  cc.c1_dot = 2.0 * std::sqrt(2.0 * c_V2 / c_V1 - 1.0);
  const double A = std::sqrt(beta * L_R / 8.0);
  const double B = std::sqrt(8.0 / (beta * L_R));
  cc.I = log_integral_exp_t2(B, cc.c1_dot * A + B) / lv(A);
  const LogVal denom =
      lv(4.0 * c_V2) * lv(std::sqrt(2.0 * beta * kPi / L_R)) * cc.I;
  cc.eps = LogVal::min(LogVal::one(), LogVal::one() / denom);
  const double e0 = cc.c0_dot * A + B;
  cc.phi_bar = LogVal::from_lg(
      -(0.5 * std::log(8.0 * beta * kPi / L_R) + std::log(cc.c0_dot) +
        e0 * e0));
  cc.c_dot = LogVal::min(LogVal::min(cc.phi_bar, lv(c_V1)),
                         lv(4.0 * c_V2) * cc.eps * lv(c_V1)) /
             lv(2.0);
  cc.c_hat = LogVal::from_lg(std::log(2.0) + std::log1p(cc.c0_dot) +
                             beta * L_R * cc.c0_dot * cc.c0_dot / 8.0 +
                             2.0 * cc.c0_dot - cc.eps.lg());
  return cc;
}

TheoremConstants theorem_constants(const AssumptionConstants& ac,
                                   const TheoremInputs& in) {
  ac.validate();
  const double r = ac.r;
  const double p29 = ipart(2.0 * r + 1.0, "2r+1");
  const double p56 = ipart(4.0 * r, "4r");
  const double p58 = ipart(4.0 * r + 2.0, "4r+2");

  const GrowthConstants g = derive_growth(ac);
  const DissipativityConstants dc = derive_dissipativity(ac);
  const OneSidedConstants oc = derive_one_sided(ac);
  const MomentCascade s2 = moment_bound_constants(2.0, ac);
  const MomentCascade s29 = moment_bound_constants(p29, ac);
  const MomentCascade s56 = moment_bound_constants(p56, ac);
  const MomentCascade s58 = moment_bound_constants(p58, ac);
  const DriftConstants d2 = drift_constants(2.0, dc.a_h, dc.b_h, ac.d, ac.beta);
  const DriftConstants d4 = drift_constants(4.0, dc.a_h, dc.b_h, ac.d, ac.beta);
  const ContractionConstants cc =
      contraction_constants(d2.c_V1, d2.c_V2, oc.L_R, ac.beta);

  auto excess = [&](const MomentCascade& s) {
    // c_sharp (1 + 2/(a_F kappa_sharp))
    return s.c_sharp *
           (LogVal::one() + lv(2.0 / (dc.a_F * s.kappa_sharp)));
  };

  TheoremConstants tc;
  tc.inputs = in;
  tc.r = r;
  tc.beta = ac.beta;
  tc.lambda_max_4rp2 = stepsize_max(p58, ac);

  tc.C01 = lv(64.0) * lv(g.K_H).pow(4.0) * lv(ac.mu(4.0 * ac.rho));
  tc.C11 = tc.C01 * (LogVal::one() + excess(s58)) +
           lv(32.0 * ac.d * (ac.d + 2.0) / (ac.beta * ac.beta));

  const LogVal ebl = LogVal::from_lg(4.0 * oc.L_R);
  const LogVal term_a = pow3(4.0 * r) * lv(g.L_h * g.L_h) / lv(oc.L_R);
  const LogVal term_b =
      lv(16.0 * g.K_H * g.K_H * (1.0 + 1.0 / oc.L_R)) +
      pow2(4.0 * r + 4.0 + 2.0 * ac.rho) *
          lv(1.0 + ac.L_F + ac.L_G).pow(2.0);
  tc.Cb0 = ebl * (term_a * tc.C01 + term_b * lv(ac.mu(2.0 * ac.rho)));
  tc.Cb1 = ebl * (term_a + term_b) *
               (tc.C11 + excess(s56) + LogVal::one()) +
           lv(4.0) * ebl * lv(ac.h0_norm * ac.h0_norm);

  tc.mn = LogVal::min(LogVal::min(cc.c_dot, lv(dc.a_F * s2.kappa_sharp / 2.0)),
                      lv(dc.a_h));
  const LogVal e_mn4 = LogVal::from_lg(tc.mn.value() / 4.0);
  const LogVal e_mn8 = LogVal::from_lg(tc.mn.value() / 8.0);

  tc.Cb2 = e_mn4 * cc.c_hat * (LogVal::one() + lv(4.0) / tc.mn) *
           (tc.Cb0 + lv(12.0));
  tc.Cb3 = lv(2.0) * (cc.c_hat / cc.c_dot) *
           LogVal::from_lg(cc.c_dot.value() / 2.0) *
           (tc.Cb1 + lv(12.0) * excess(s2) + lv(9.0 * d4.v_p_M_V) + lv(15.0));
  tc.C0 = tc.mn / lv(4.0);
  tc.C1 = pow2(2.0 * (2.0 * r + 1.0) - 1.0) * e_mn4 *
          (tc.Cb0.sqrt() + tc.Cb2 + cc.c_hat * lv(2.0 + in.intV2_pi));
  tc.C2 = tc.Cb1.sqrt() + tc.Cb3;

  tc.Cb4 = e_mn8 * cc.c_hat.sqrt() * (LogVal::one() + lv(8.0) / tc.mn) *
           (tc.Cb0.sqrt() + lv(2.0 * std::sqrt(2.0)));
  tc.Cb5 = lv(4.0) * cc.c_hat.sqrt() / cc.c_dot *
           LogVal::from_lg(cc.c_dot.value() / 4.0) *
           (tc.Cb1.sqrt() + lv(2.0 * std::sqrt(2.0)) * excess(s2).sqrt() +
            (lv(3.0) * lv(d4.v_p_M_V)).sqrt() + lv(3.0 * std::sqrt(2.0)));
  tc.C3 = tc.mn / lv(8.0);
  tc.C4 = pow2(2.0 * r + 1.0) * e_mn8 *
          (tc.Cb0.sqrt() + tc.Cb4 +
           cc.c_hat.sqrt() * lv(std::sqrt(2.0 + in.intV2_pi)));
  tc.C5 = tc.Cb1.sqrt() + tc.Cb5;

  tc.Cb6 = lv(g.K_H * ac.mu(ac.rho));
  tc.C6 = tc.C3;
  const LogVal cz_sqrt = lv(std::sqrt(in.pi_abs_moment_4rp2));
  const LogVal pre = pow2(2.0 * r) * tc.Cb6 / lv(2.0 * r + 2.0);
  tc.C7 = tc.C4 *
          (pre * (LogVal::one() + excess(s29).sqrt() + cz_sqrt) + tc.Cb6) *
          lv(in.theta0_moment_4_2rp1 + 1.0);
  tc.C8 = tc.C5 *
          (pre * ((lv(in.theta0_moment_4rp2) + excess(s29)).sqrt() + cz_sqrt) +
           tc.Cb6);

  tc.R_theta_star = std::max(std::sqrt(dc.b_h / dc.a_h),
                             std::sqrt(2.0 * ac.d / (ac.beta * g.L_h)));
  tc.Cb7 = LogVal::from_lg(std::log(g.L_h) +
                           2.0 * r * std::log(1.0 + 4.0 * tc.R_theta_star));
  tc.C9 = ac.d / 2.0 *
              (tc.Cb7.lg() + 1.0 - std::log(dc.a_h) +
               std::log(ac.beta * dc.b_h / ac.d + 1.0)) +
          std::log(2.0);
  return tc;
}

BoundValue evaluate_bound(BoundKind kind, double n, double lambda,
                          const TheoremConstants& tc) {
  if (!(lambda > 0.0) || !(n >= 0.0))
    throw std::invalid_argument("evaluate_bound needs lambda > 0 and n >= 0");
  BoundValue out;
  out.lambda_exceeds_max = lv(lambda) > tc.lambda_max_4rp2;
  const double e0 = tc.inputs.theta0_moment_4_2rp1;
  switch (kind) {
    case BoundKind::W1:
      out.value = tc.C1 * LogVal::from_lg(-tc.C0.value() * lambda * n) *
                      lv(e0 + 1.0) +
                  tc.C2 * lv(std::sqrt(lambda));
      break;
    case BoundKind::W2:
      out.value = tc.C4 * LogVal::from_lg(-tc.C3.value() * lambda * n) *
                      lv(std::sqrt(e0 + 1.0)) +
                  tc.C5 * lv(std::pow(lambda, 0.25));
      break;
    case BoundKind::ExcessRisk:
      out.value = tc.C7 * LogVal::from_lg(-tc.C6.value() * lambda * n) +
                  tc.C8 * lv(std::pow(lambda, 0.25)) +
                  lv(tc.C9 / tc.beta);
      break;
  }
  return out;
}

std::vector<ReportEntry> bounds_report(const AssumptionConstants& ac,
                                       const TheoremInputs& in,
                                       const std::vector<int>& moment_ps) {
  ac.validate();
  std::vector<ReportEntry> rep;
  auto add = [&rep](const std::string& name, LogVal v,
                    const std::string& def) {
    rep.push_back({name, v, def});
  };
  add("q", lv(ac.q), "growth exponent of G");
  add("r", lv(ac.r), "taming exponent");
  add("rho", lv(ac.rho), "data growth exponent");
  add("beta", lv(ac.beta), "inverse temperature");
  add("d", lv(ac.d), "parameter dimension");

  const GrowthConstants g = derive_growth(ac);
  add("K_H", lv(g.K_H), "K_H := 2^(2r) K_G + K_F");
  add("L_h", lv(g.L_h), "L_h := L_G + L_F E[(1+2|X0|)^(rho-1)] + 1");

  const DissipativityConstants dc = derive_dissipativity(ac);
  add("a_F", lv(dc.a_F), "a_F := a/2");
  add("R_F", lv(dc.R_F), "R_F := max{(4b/a)^(1/(2r-rbar)), 2^(1/(2r))}");
  add("b_F", lv(dc.b_F),
      "b_F := (a/2+b) R_F^(rbar+2) + K_F^2 mu(2 rho)/(2a)");
  add("a_h", lv(dc.a_h), "a_h := 2^q K_G mu(rho)");
  add("b_h", lv(dc.b_h),
      "b_h := 3 (2^(q+1) K_G mu(rho)/min{1,a_F})^(q+2) + b_F");

  const OneSidedConstants oc = derive_one_sided(ac);
  add("R", lv(oc.R),
      "R := max{1, (3^(q-1) L_G/a)^(1/(2r-q+1)), (2b/a)^(1/(2r-rbar))}");
  add("L_R", lv(oc.L_R), "L_R := L_h (1+2R)^(2r)");

  add("lambda_max_relaxed", stepsize_max_relaxed(ac),
      "min{1, a_F^2/(16 K_F^4), 1/a_F, 1/(4 a_F^2)}");

  const MomentP1 m1 = moment_bound_p1(ac);
  add("M0", lv(m1.M0),
      "M0 := (2^(q+2) K_G mu(2 rho)/min{1,a_F})^(1/(2r-q+1))");
  add("kappa", lv(m1.kappa), "kappa := M0^(2r)/(2(1+M0^(2r)))");
  add("c0", m1.c0, "additive constant of the second-moment bound");

  for (int p : moment_ps) {
    const std::string sp = std::to_string(p);
    add("lambda_max_p" + sp, stepsize_max(p, ac),
        "largest stepsize admissible for the 2p-th moment, p=" + sp);
    if (p >= 2) {
      const MomentCascade mc = moment_bound_constants(p, ac);
      add("kappa_sharp_p" + sp, lv(mc.kappa_sharp),
          "kappa_sharp := min{kappa_bar, kappa_tilde}, p=" + sp);
      add("c_sharp_p" + sp, mc.c_sharp,
          "c_sharp := max{cbar0, ctilde0}, p=" + sp);
    }
  }

  const DriftConstants d2 = drift_constants(2.0, dc.a_h, dc.b_h, ac.d, ac.beta);
  add("M_V_p2", lv(d2.M_V),
      "M_V := sqrt(1/3 + 4 b_h/(3 a_h) + 4 d/(3 a_h beta) + 4(p-2)/(3 a_h "
      "beta)), p=2");
  add("c_V1_p2", lv(d2.c_V1), "c_V1 := a_h p/4, p=2");
  add("c_V2_p2", lv(d2.c_V2), "c_V2 := (3/4) a_h p v_p(M_V), p=2");

  const ContractionConstants cc =
      contraction_constants(d2.c_V1, d2.c_V2, oc.L_R, ac.beta);
  add("c0_dot", lv(cc.c0_dot), "c0_dot := 2 sqrt(4 c_V2 (1+c_V1)/c_V1 - 1)");
  add("c1_dot", lv(cc.c1_dot), "c1_dot := 2 sqrt(2 c_V2/c_V1 - 1)");
  add("eps_contraction", cc.eps,
      "eps := min{1, (4 c_V2 sqrt(2 beta pi/L_R) I)^(-1)}");
  add("c_dot", cc.c_dot,
      "c_dot := min{phi_bar, c_V1, 4 c_V2 eps c_V1}/2");
  add("c_hat", cc.c_hat,
      "c_hat := 2 (1+c0_dot) exp(beta L_R c0_dot^2/8 + 2 c0_dot)/eps");

  const TheoremConstants tc = theorem_constants(ac, in);
  add("C0", tc.C0, "exponential rate of the W1 bound");
  add("C1", tc.C1, "transient coefficient of the W1 bound");
  add("C2", tc.C2, "sqrt(lambda) coefficient of the W1 bound");
  add("C3", tc.C3, "exponential rate of the W2 bound");
  add("C4", tc.C4, "transient coefficient of the W2 bound");
  add("C5", tc.C5, "lambda^(1/4) coefficient of the W2 bound");
  add("C6", tc.C6, "exponential rate of the excess-risk bound");
  add("C7", tc.C7, "transient coefficient of the excess-risk bound");
  add("C8", tc.C8, "lambda^(1/4) coefficient of the excess-risk bound");
  add("C9", lv(tc.C9),
      "C9 := (d/2) log(Cb7 e/a_h (beta b_h/d + 1)) + log 2");
  add("R_theta_star", lv(tc.R_theta_star),
      "R* := max{sqrt(b_h/a_h), sqrt(2d/(beta L_h))}");
  return rep;
}

}  // namespace tusla
