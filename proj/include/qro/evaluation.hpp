#pragma once

#include "qro/estimators.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qro {

// Joint dynamics of [estimate, estimate - true state] under a concrete
// uncertainty realization: d zbar = Abar zbar dt + noise with diffusion Dbar.
struct AugmentedSystem {
  Mat4 Abar = Mat4::Zero();
  Mat4 Dbar = Mat4::Zero();
  Mat4 SigmaBar = Mat4::Zero();
  double hbar = 1.0;
};

enum class Verdict { Stable, Unstable, Unphysical };

struct EvalResult {
  Verdict verdict = Verdict::Unstable;
  std::optional<double> error;  // trace of the error block, present iff Stable
  std::optional<Mat4> Wbar;
  std::string diagnostic;
};

AugmentedSystem augment(const SystemModel& model, const UncertaintyRealization& u,
                        const LinearObserver& obs);

// Stationary covariance of the augmented system; reports Unstable when the
// drift is not Hurwitz and Unphysical when the covariance breaks the
// generalized uncertainty relation (both are rendered "N/A" in tables).
EvalResult stationary_error(const AugmentedSystem& aug);

struct CovariancePath {
  std::vector<double> t;
  std::vector<Mat4> V;
};

CovariancePath transient_covariance(const AugmentedSystem& aug, const Mat4& Vbar0,
                                    double dt, double t_end);

// Premise of the comparison lemma: Abar Xbar + Xbar Abar' + Dbar strictly
// negative definite (then the stationary covariance is dominated by Xbar).
bool domination_premise_check(const Mat4& Abar, const Mat4& Dbar, const Mat4& Xbar);

struct StatePath {
  std::vector<double> t;
  std::vector<Vec2> x;
};

// Euler-Maruyama sample path of the estimator driven by its innovation
// process (a Wiener process of variance hbar dt); deterministic per seed.
StatePath simulate_filter_trajectory(const SystemModel& model, const LinearObserver& obs,
                                     bool use_control, const Vec2& x0, double t_end,
                                     double dt, std::uint64_t seed);

}  // namespace qro
