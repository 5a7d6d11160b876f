#include "qro/campaigns.hpp"

#include "qro/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace qro {

namespace {

std::vector<Mat4> make_shared_xbars(int n_xbar, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0));
  std::vector<Mat4> xs;
  xs.reserve(static_cast<std::size_t>(n_xbar));
  for (int j = 0; j < n_xbar; ++j) {
    Mat4 r;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) r(a, b) = rng.normal();
    const double shift = rng.uniform(0.1, 1.0);
    xs.push_back(Mat4(r * r.transpose() + shift * Mat4::Identity()));
  }
  return xs;
}

struct IneqSample {
  double margin1;  // min over the shared Xbar set
  double margin2;
  double margin_basic;
};

// One sample of the three inequality checks; identical in the serial and
// parallel campaigns because all randomness comes from the derived seeds.
IneqSample ineq_sample(const SystemModel& model, const UncertaintyBounds& bounds,
                       const EpsArray& eps, const Vec2& k, const BoundMatrices& bm,
                       const std::vector<Mat4>& xbars, std::uint64_t seed, std::int64_t i,
                       std::int64_t n_samples) {
  IneqSample s{};
  const UncertaintyRealization u = sample_admissible(bounds, derive_seed(seed, static_cast<std::uint64_t>(i) + 1));

  s.margin1 = std::numeric_limits<double>::infinity();
  for (const Mat4& x : xbars) s.margin1 = std::min(s.margin1, verify_ineq1(x, u, model, k, bm, eps));
  s.margin2 = verify_ineq2(u, model, k, bm, eps);

  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(n_samples + 1 + i)));
  const int rows = 1 + static_cast<int>(rng.uniform(0.0, 3.0));
  const int cols = 1 + static_cast<int>(rng.uniform(0.0, 3.0));
  MatrixXd X(rows, cols), Y(rows, cols);
  for (int a = 0; a < rows; ++a)
    for (int b = 0; b < cols; ++b) {
      X(a, b) = rng.normal();
      Y(a, b) = rng.normal();
    }
  s.margin_basic = weighted_cross_bound_check(X, Y, rng.uniform(0.05, 20.0));
  return s;
}

IneqCampaignResult run_ineq(const SystemModel& model, const UncertaintyBounds& bounds,
                            const EpsArray& eps, const Vec2& k, std::int64_t n_samples,
                            int n_xbar, std::uint64_t seed, double slack, bool parallel) {
  const BoundMatrices bm = bound_matrices(eps, bounds, model);
  const std::vector<Mat4> xbars = make_shared_xbars(n_xbar, seed);

  double w1 = std::numeric_limits<double>::infinity();
  double w2 = std::numeric_limits<double>::infinity();
  double wb = std::numeric_limits<double>::infinity();
  std::int64_t viol = 0;

  if (parallel) {
#pragma omp parallel for reduction(min : w1, w2, wb) reduction(+ : viol) schedule(static)
    for (std::int64_t i = 0; i < n_samples; ++i) {
      const IneqSample s = ineq_sample(model, bounds, eps, k, bm, xbars, seed, i, n_samples);
      w1 = std::min(w1, s.margin1);
      w2 = std::min(w2, s.margin2);
      wb = std::min(wb, s.margin_basic);
      if (s.margin1 < -slack) ++viol;
      if (s.margin2 < -slack) ++viol;
      if (s.margin_basic < -slack) ++viol;
    }
  } else {
    for (std::int64_t i = 0; i < n_samples; ++i) {
      const IneqSample s = ineq_sample(model, bounds, eps, k, bm, xbars, seed, i, n_samples);
      w1 = std::min(w1, s.margin1);
      w2 = std::min(w2, s.margin2);
      wb = std::min(wb, s.margin_basic);
      if (s.margin1 < -slack) ++viol;
      if (s.margin2 < -slack) ++viol;
      if (s.margin_basic < -slack) ++viol;
    }
  }

  IneqCampaignResult out;
  out.n_samples = n_samples;
  out.violations = viol;
  out.worst1 = w1;
  out.worst2 = w2;
  out.worst_basic = wb;
  return out;
}

struct LemmaInstance {
  bool premise;
  bool conclusion;
  double margin;
};

LemmaInstance lemma_instance(std::uint64_t seed, int i, double dt, double t_end, double t_check) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
  Mat4 r, s, b;
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c) {
      r(a, c) = rng.normal();
      s(a, c) = rng.normal();
      b(a, c) = rng.normal();
    }
  // Symmetric part bounded above by -0.3 I, so Abar is Hurwitz by construction.
  const Mat4 Abar = -(r * r.transpose() + 0.3 * Mat4::Identity()) + 0.5 * (s - s.transpose());
  const Mat4 Dbar = b * b.transpose();

  // Xbar solves Abar X + X Abar' = -(Dbar + 0.1 I), so the premise holds with
  // a 0.1 gap and the stationary covariance sits strictly below Xbar.
  const Mat4 Xbar = solve_lyapunov(Abar, Mat4(Dbar + 0.1 * Mat4::Identity()));

  LemmaInstance out{};
  out.premise = domination_premise_check(Abar, Dbar, Xbar);

  AugmentedSystem aug;
  aug.Abar = Abar;
  aug.Dbar = Dbar;
  const CovariancePath path = transient_covariance(aug, Mat4::Zero(), dt, t_end);

  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < path.t.size(); ++j) {
    if (path.t[j] < t_check) continue;
    worst = std::min(worst, min_eig_sym(Mat4(Xbar + 1e-6 * Mat4::Identity() - path.V[j])));
  }
  out.margin = worst;
  out.conclusion = worst >= 0.0;
  return out;
}

LemmaCampaignResult run_lemma(int n_instances, std::uint64_t seed, double dt, double t_end,
                              double t_check, bool parallel) {
  int premise_ok = 0;
  int conclusion_ok = 0;
  double worst = std::numeric_limits<double>::infinity();

  if (parallel) {
#pragma omp parallel for reduction(+ : premise_ok, conclusion_ok) reduction(min : worst) \
    schedule(static)
    for (int i = 0; i < n_instances; ++i) {
      const LemmaInstance li = lemma_instance(seed, i, dt, t_end, t_check);
      if (li.premise) {
        ++premise_ok;
        if (li.conclusion) ++conclusion_ok;
        worst = std::min(worst, li.margin);
      }
    }
  } else {
    for (int i = 0; i < n_instances; ++i) {
      const LemmaInstance li = lemma_instance(seed, i, dt, t_end, t_check);
      if (li.premise) {
        ++premise_ok;
        if (li.conclusion) ++conclusion_ok;
        worst = std::min(worst, li.margin);
      }
    }
  }

  LemmaCampaignResult out;
  out.n_instances = n_instances;
  out.premise_ok = premise_ok;
  out.conclusion_ok = conclusion_ok;
  out.worst_margin = worst;
  return out;
}

struct TrajectoryOutcome {
  bool diverged;
  bool bounded;
};

TrajectoryOutcome trajectory_outcome(const SystemModel& model, const LinearObserver& obs,
                                     bool use_control, const Vec2& x0, double t_end, double dt,
                                     std::uint64_t seed, int i) {
  const double diverge_threshold = 100.0 * x0.norm() + 1.0;
  TrajectoryOutcome out{false, false};
  double peak = 0.0;
  try {
    const StatePath path =
        simulate_filter_trajectory(model, obs, use_control, x0, t_end, dt,
                                   derive_seed(seed, static_cast<std::uint64_t>(i)));
    for (const Vec2& x : path.x) peak = std::max(peak, std::abs(x(0)));
  } catch (const NonFinite&) {
    out.diverged = true;
    return out;
  }
  out.diverged = peak > diverge_threshold;
  out.bounded = peak <= 5.0;
  return out;
}

TrajectoryCampaignResult run_trajectory(const SystemModel& model, const LinearObserver& obs,
                                        bool use_control, int n_seeds, std::uint64_t seed,
                                        const Vec2& x0, double t_end, double dt, bool parallel) {
  int diverged = 0;
  int bounded = 0;

  if (parallel) {
#pragma omp parallel for reduction(+ : diverged, bounded) schedule(static)
    for (int i = 0; i < n_seeds; ++i) {
      const TrajectoryOutcome o = trajectory_outcome(model, obs, use_control, x0, t_end, dt, seed, i);
      if (o.diverged) ++diverged;
      if (o.bounded) ++bounded;
    }
  } else {
    for (int i = 0; i < n_seeds; ++i) {
      const TrajectoryOutcome o = trajectory_outcome(model, obs, use_control, x0, t_end, dt, seed, i);
      if (o.diverged) ++diverged;
      if (o.bounded) ++bounded;
    }
  }

  TrajectoryCampaignResult out;
  out.n_seeds = n_seeds;
  out.diverged = diverged;
  out.bounded = bounded;
  return out;
}

}  // namespace

IneqCampaignResult ineq_campaign(const SystemModel& model, const UncertaintyBounds& bounds,
                                 const EpsArray& eps, const Vec2& k, std::int64_t n_samples,
                                 int n_xbar, std::uint64_t seed, double slack) {
  return run_ineq(model, bounds, eps, k, n_samples, n_xbar, seed, slack, true);
}

IneqCampaignResult ineq_campaign_serial(const SystemModel& model, const UncertaintyBounds& bounds,
                                        const EpsArray& eps, const Vec2& k, std::int64_t n_samples,
                                        int n_xbar, std::uint64_t seed, double slack) {
  return run_ineq(model, bounds, eps, k, n_samples, n_xbar, seed, slack, false);
}

LemmaCampaignResult lemma_campaign(int n_instances, std::uint64_t seed, double dt, double t_end,
                                   double t_check) {
  return run_lemma(n_instances, seed, dt, t_end, t_check, true);
}

LemmaCampaignResult lemma_campaign_serial(int n_instances, std::uint64_t seed, double dt,
                                          double t_end, double t_check) {
  return run_lemma(n_instances, seed, dt, t_end, t_check, false);
}

TrajectoryCampaignResult trajectory_campaign(const SystemModel& model, const LinearObserver& obs,
                                             bool use_control, int n_seeds, std::uint64_t seed,
                                             const Vec2& x0, double t_end, double dt) {
  return run_trajectory(model, obs, use_control, n_seeds, seed, x0, t_end, dt, true);
}

TrajectoryCampaignResult trajectory_campaign_serial(const SystemModel& model,
                                                    const LinearObserver& obs, bool use_control,
                                                    int n_seeds, std::uint64_t seed, const Vec2& x0,
                                                    double t_end, double dt) {
  return run_trajectory(model, obs, use_control, n_seeds, seed, x0, t_end, dt, false);
}

}  // namespace qro
