#include "qro/estimators.hpp"

namespace qro {
namespace {

constexpr double kEpsFloor = 1e-12;
constexpr double kPdSlack = 1e-10;

void check_physical(const Mat2& V, double hbar, const char* who) {
  if (physicality_margin(V, symplectic(), hbar) < -1e-9)
    throw NoStabilizingSolution(std::string(who) +
                                ": stationary covariance violates the uncertainty relation");
}

}  // namespace

LqgWeights::LqgWeights(const Mat2& M_, const Mat2& N_, double r_) : M(M_), N(N_), r(r_) {
  if (!(r > 0)) throw std::invalid_argument("LqgWeights: r must be positive");
  if ((M - M.transpose()).norm() > 0 || (N - N.transpose()).norm() > 0)
    throw std::invalid_argument("LqgWeights: M, N must be symmetric");
  if (min_eig_sym(M) < -1e-12 || min_eig_sym(N) < -1e-12)
    throw std::invalid_argument("LqgWeights: M, N must be positive semidefinite");
}

RobustTuning::RobustTuning(double d1, double d2, const EpsArray& e)
    : delta1(d1), delta2(d2), eps(e) {
  if (!(delta1 > 0) || !(delta2 > 0))
    throw std::invalid_argument("RobustTuning: delta1, delta2 must be positive");
  for (double v : eps)
    if (!(v > 0)) throw std::invalid_argument("RobustTuning: eps must be positive");
}

KalmanResult kalman_stationary(const SystemModel& model) {
  const DerivedModel d = derive_matrices(model);
  const double hbar = model.hbar;

  // Stationary covariance equation
  //   A V + V A' + D - (1/hbar)(V F' + hbar m)(F V + hbar m') = 0.
  // Expanding the square moves the cross terms into the drift:
  //   (A - m F) V + V (A - m F)' - (1/hbar) V F'F V + (D - hbar m m') = 0.
  CareProblem p;
  p.Adrift = (d.A - d.m * d.F).transpose();
  p.Qconst = symmetrize(d.D - hbar * d.m * d.m.transpose());
  p.Rquad = d.F.transpose() * d.F / hbar;
  p.sign = -1;

  KalmanResult out;
  out.report = solve_care(p);
  out.Vinf = out.report.solution;
  if (min_eig_sym(out.Vinf) <= kPdSlack)
    throw NoStabilizingSolution("kalman_stationary: covariance is not positive definite");
  check_physical(out.Vinf, hbar, "kalman_stationary");

  const Vec2 cross = out.Vinf * d.F.transpose() + hbar * d.m;
  const double res = (d.A * out.Vinf + out.Vinf * d.A.transpose() + d.D -
                      cross * cross.transpose() / hbar)
                         .norm();
  if (res > 1e-8 * std::max(1.0, d.D.norm()))
    throw NoStabilizingSolution("kalman_stationary: stationary residual " +
                                std::to_string(res));
  out.gain = out.Vinf * d.F.transpose() / hbar + d.m;
  return out;
}

LqgResult lqg_stationary_gain(const SystemModel& model, const LqgWeights& w) {
  const DerivedModel d = derive_matrices(model);

  // K A + A' K - (2/r) K B B' K + M/2 = 0, L = -(2/r) B' K.
  CareProblem p;
  p.Adrift = d.A;
  p.Qconst = 0.5 * w.M;
  p.Rquad = (2.0 / w.r) * model.B * model.B.transpose();
  p.sign = -1;

  LqgResult out;
  out.report = solve_care(p);
  out.Kinf = out.report.solution;
  out.L = -(2.0 / w.r) * model.B.transpose() * out.Kinf;
  if (!hurwitz(d.A + model.B * out.L))
    throw NoStabilizingSolution("lqg_stationary_gain: closed loop is not Hurwitz");
  return out;
}

RiskResult risk_stationary(const SystemModel& model, const LqgWeights& w, double mu) {
  if (mu < 0) throw std::invalid_argument("risk_stationary: mu must be nonnegative");
  const DerivedModel d = derive_matrices(model);
  const double hbar = model.hbar;
  const Mat2 sigma = symplectic();

  // Covariance equation: the Kalman form plus mu (V M V - (hbar^2/4) S'M S),
  // which only shifts the quadratic weight and the constant term.
  CareProblem pv;
  pv.Adrift = (d.A - d.m * d.F).transpose();
  pv.Qconst = symmetrize(d.D - hbar * d.m * d.m.transpose() -
                         mu * hbar * hbar / 4.0 * sigma.transpose() * w.M * sigma);
  pv.Rquad = symmetrize(d.F.transpose() * d.F / hbar - mu * w.M);
  pv.sign = -1;

  RiskResult out;
  out.report_v = solve_care(pv);
  out.Vmu = out.report_v.solution;
  check_physical(out.Vmu, hbar, "risk_stationary");

  const Mat2 terminal_core = Mat2::Identity() - mu * w.N * out.Vmu;
  if (std::abs(terminal_core.determinant()) < 1e-10)
    throw RiskSingular("risk_stationary: I - mu N V is singular");

  const Vec2 b = out.Vmu * d.F.transpose() / hbar + d.m;

  // Backward cost equation at stationarity:
  //   K Ar + Ar' K - K ((2/r) B B' - 2 mu b b') K + M/2 = 0, Ar = A + mu V M.
  CareProblem pk;
  pk.Adrift = d.A + mu * out.Vmu * w.M;
  pk.Qconst = 0.5 * w.M;
  pk.Rquad = symmetrize((2.0 / w.r) * model.B * model.B.transpose() -
                        2.0 * mu * b * b.transpose());
  pk.sign = -1;

  // Newton continuation from the risk-neutral gain; the quadratic weight may
  // be indefinite, so the invariant-subspace route is kept as fallback.
  try {
    const LqgResult lqg = lqg_stationary_gain(model, w);
    out.report_k = solve_care_from(pk, lqg.Kinf);
  } catch (const Error&) {
    out.report_k = solve_care(pk);
  }
  out.Kmu = out.report_k.solution;

  out.observer.R = d.A + mu * out.Vmu * w.M - b * d.F;
  out.observer.k = b;
  out.observer.L = -(2.0 / w.r) * model.B.transpose() * out.Kmu;
  out.observer.B = model.B;
  return out;
}

EpsArray default_epsilons(const UncertaintyBounds& bounds) {
  if (bounds.g < 0 || bounds.r1 < 0 || bounds.r2 < 0)
    throw std::invalid_argument("default_epsilons: bounds must be nonnegative");
  const double sg = std::sqrt(bounds.g);
  const double s1 = std::sqrt(bounds.r1);
  const double s2 = std::sqrt(bounds.r2);
  EpsArray eps{sg,        std::max(s1, s2), std::max(s1, s2), bounds.r1,
               bounds.r2, s1,               s2,               s2};
  for (double& e : eps) e = std::max(e, kEpsFloor);
  return eps;
}

RobustSynthesis robust_synthesize(const SystemModel& model, const UncertaintyBounds& bounds,
                                  const RowVec2& L, const RobustTuning& tuning) {
  const DerivedModel d = derive_matrices(model);
  const Mat2 sigma = symplectic();
  const BoundMatrices bm = bound_matrices(tuning.eps, bounds, model);
  const Mat2 Dp = symmetrize(d.D + bm.Q2 + bm.Q3);
  const Mat2 Acl = d.A + model.B * L;

  // Equation for P1 carries the quadratic term with a plus sign:
  //   (A + BL) P1 + P1 (A + BL)' + P1 Q1 P1 + Dp + delta1 I = 0.
  // Its useful root is the large (anti-stabilizing) one: that is the branch
  // with P1^-1 -> 0 as Q1 -> 0, which the small root does not satisfy, and the
  // only branch for which the P2 equation below stays solvable.
  CareProblem p1;
  p1.Adrift = Acl.transpose();
  p1.Qconst = Dp + tuning.delta1 * Mat2::Identity();
  p1.Rquad = bm.Q1;
  p1.sign = +1;

  RobustSynthesis out;
  try {
    out.report1 = solve_care(p1, CareBranch::antistabilizing);
  } catch (const Error& e) {
    throw InfeasibleP1(std::string("robust_synthesize: P1 equation infeasible (") +
                       e.what() + ")");
  }
  out.P1 = out.report1.solution;
  if (min_eig_sym(out.P1) <= kPdSlack)
    throw InfeasibleP1("robust_synthesize: P1 is not positive definite");

  const Mat2 P1i = out.P1.inverse();
  const Mat2 Ap = d.A + Dp * P1i;
  const RowVec2 Fp = d.F + bm.mu1 * (model.Ctilde.imag() * sigma) * P1i;

  // Equation for P2, with the gain already optimized out:
  //   Ap P2 + P2 Ap' + Dp + delta2 I
  //     - (1/mu2)(P2 Fp' + mu1 m)(Fp P2 + mu1 m')
  //     - P2 (L'B'P1^-1 + P1^-1 B L) P2 = 0.
  // Expanding the rank-one square and moving its cross terms into the drift
  // leaves a standard quadratic form:
  //   drift  A2 = Ap - (mu1/mu2) m Fp
  //   weight W2 = Fp'Fp / mu2 + L'B'P1^-1 + P1^-1 B L
  //   const  Qc = Dp + delta2 I - (mu1^2/mu2) m m'.
  const Mat2 A2 = Ap - (bm.mu1 / bm.mu2) * d.m * Fp;
  const Mat2 W2 = symmetrize(Fp.transpose() * Fp / bm.mu2 +
                             L.transpose() * (model.B.transpose() * P1i) +
                             (P1i * model.B) * L);
  const Mat2 Qc2 = symmetrize(Dp + tuning.delta2 * Mat2::Identity() -
                              (bm.mu1 * bm.mu1 / bm.mu2) * d.m * d.m.transpose());

  CareProblem p2;
  p2.Adrift = A2.transpose();
  p2.Qconst = Qc2;
  p2.Rquad = W2;
  p2.sign = -1;

  try {
    out.report2 = solve_care(p2);
  } catch (const Error& e) {
    throw InfeasibleP2(std::string("robust_synthesize: P2 equation infeasible (") +
                       e.what() + ")");
  }
  out.P2 = out.report2.solution;
  if (min_eig_sym(out.P2) <= kPdSlack)
    throw InfeasibleP2("robust_synthesize: P2 is not positive definite");

  // Residual of the unexpanded P2 equation, as an independent consistency check.
  const Vec2 cross = out.P2 * Fp.transpose() + bm.mu1 * d.m;
  const Mat2 res2 = Ap * out.P2 + out.P2 * Ap.transpose() + Dp +
                    tuning.delta2 * Mat2::Identity() -
                    cross * cross.transpose() / bm.mu2 -
                    out.P2 *
                        (L.transpose() * model.B.transpose() * P1i + P1i * model.B * L) *
                        out.P2;
  if (res2.norm() > 1e-8 * std::max(1.0, p2.Qconst.norm()))
    throw InfeasibleP2("robust_synthesize: unexpanded P2 residual " +
                       std::to_string(res2.norm()));

  out.observer.k = cross / bm.mu2;
  out.observer.R = Ap - out.observer.k * Fp -
                   out.P2 * L.transpose() * model.B.transpose() * P1i;
  out.observer.L = L;
  out.observer.B = model.B;
  out.trace_bound = out.P2.trace();
  out.intermediates = {Ap, Dp, Fp, bm.mu1, bm.mu2, bm.Q1, bm.Q2, bm.Q3};
  return out;
}

LinearObserver kalman_observer_realization(const SystemModel& model, const LqgWeights& w) {
  const DerivedModel d = derive_matrices(model);
  const KalmanResult kal = kalman_stationary(model);
  const LqgResult lqg = lqg_stationary_gain(model, w);
  LinearObserver obs;
  obs.R = d.A - kal.gain * d.F;
  obs.k = kal.gain;
  obs.L = lqg.L;
  obs.B = model.B;
  return obs;
}

}  // namespace qro
