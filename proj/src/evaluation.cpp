#include "qro/evaluation.hpp"

#include "qro/riccati.hpp"
#include "qro/uncertainty.hpp"

#include <cmath>

namespace qro {

AugmentedSystem augment(const SystemModel& model, const UncertaintyRealization& u,
                        const LinearObserver& obs) {
  const DerivedModel d = derive_matrices(model);
  const double hbar = model.hbar;
  const Mat2& A = d.A;
  const Mat2& D = d.D;
  const RowVec2& F = d.F;
  const Vec2& m = d.m;
  const Vec2& k = obs.k;

  AugmentedSystem aug;
  aug.hbar = hbar;

  // Nominal closed-loop blocks in (estimate, error) coordinates.
  const Mat2 BL = obs.B * obs.L;
  aug.Abar.topLeftCorner<2, 2>() = A + BL;
  aug.Abar.topRightCorner<2, 2>() = -BL;
  aug.Abar.bottomLeftCorner<2, 2>() = A - obs.R - k * F;
  aug.Abar.bottomRightCorner<2, 2>() = obs.R;

  aug.Dbar.topLeftCorner<2, 2>() = D;
  aug.Dbar.topRightCorner<2, 2>() = D - hbar * (m * k.transpose());
  aug.Dbar.bottomLeftCorner<2, 2>() = D - hbar * (k * m.transpose());
  aug.Dbar.bottomRightCorner<2, 2>() =
      D - hbar * (k * m.transpose() + m * k.transpose() - k * k.transpose());

  // Realized perturbation enters the estimate row through the plant and the
  // error row additionally through the measured output.
  aug.Abar += delta_abar(model, u, k);
  aug.Dbar += delta_dbar(model, u, k);

  aug.SigmaBar = symplectic_blocks(4);
  return aug;
}

EvalResult stationary_error(const AugmentedSystem& aug) {
  EvalResult out;
  if (!hurwitz(aug.Abar)) {
    out.verdict = Verdict::Unstable;
    out.diagnostic = "augmented drift is not Hurwitz";
    return out;
  }
  Mat4 Wbar;
  try {
    Wbar = solve_lyapunov(aug.Abar, aug.Dbar);
  } catch (const Error& e) {
    out.verdict = Verdict::Unstable;
    out.diagnostic = e.what();
    return out;
  }
  out.Wbar = Wbar;
  const double margin = physicality_margin(Wbar, aug.SigmaBar, aug.hbar);
  if (margin < -1e-9) {
    out.verdict = Verdict::Unphysical;
    out.diagnostic = "covariance violates the uncertainty relation";
    return out;
  }
  out.verdict = Verdict::Stable;
  out.error = Wbar(2, 2) + Wbar(3, 3);
  return out;
}

CovariancePath transient_covariance(const AugmentedSystem& aug, const Mat4& Vbar0,
                                    double dt, double t_end) {
  const Mat4 A = aug.Abar;
  const Mat4 D = aug.Dbar;
  auto rhs = [&](const MatrixXd& V) -> MatrixXd {
    return A * V + V * A.transpose() + D;
  };
  const int stride = 10;
  const OdeResult r = integrate_matrix_ode(rhs, Vbar0, dt, t_end, 0.0, stride);

  CovariancePath path;
  path.t = r.path.t;
  path.V.reserve(r.path.x.size());
  for (const MatrixXd& v : r.path.x) path.V.push_back(Mat4(v));
  return path;
}

bool domination_premise_check(const Mat4& Abar, const Mat4& Dbar, const Mat4& Xbar) {
  const Mat4 S = Abar * Xbar + Xbar * Abar.transpose() + Dbar;
  return max_eig_sym(S) <= -1e-10;
}

StatePath simulate_filter_trajectory(const SystemModel& model, const LinearObserver& obs,
                                     bool use_control, const Vec2& x0, double t_end,
                                     double dt, std::uint64_t seed) {
  if (dt <= 0.0 || t_end <= 0.0) throw std::invalid_argument("simulate: dt and t_end must be positive");
  const DerivedModel d = derive_matrices(model);

  // Unconditional estimator dynamics: substituting the innovation form of the
  // measurement back into the filter gives drift R + k F (plus B L when the
  // estimate is fed back) and noise k dW with dW a Wiener increment of
  // variance hbar dt.
  Mat2 drift = obs.R + obs.k * d.F;
  if (use_control) drift += obs.B * obs.L;

  Rng rng(seed);
  const double sqrt_hdt = std::sqrt(model.hbar * dt);

  const auto n_steps = static_cast<std::size_t>(std::ceil(t_end / dt));
  StatePath path;
  path.t.reserve(n_steps + 1);
  path.x.reserve(n_steps + 1);

  Vec2 x = x0;
  double t = 0.0;
  path.t.push_back(t);
  path.x.push_back(x);
  for (std::size_t i = 0; i < n_steps; ++i) {
    const double dW = sqrt_hdt * rng.normal();
    x = x + dt * (drift * x) + obs.k * dW;
    t = static_cast<double>(i + 1) * dt;
    if (!x.allFinite()) throw NonFinite("simulate: state diverged to non-finite values");
    path.t.push_back(t);
    path.x.push_back(x);
  }
  return path;
}

}  // namespace qro
