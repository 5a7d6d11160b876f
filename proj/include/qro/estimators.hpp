#pragma once

#include "qro/model.hpp"
#include "qro/riccati.hpp"
#include "qro/uncertainty.hpp"

#include <array>

namespace qro {

// Quadratic cost weights: running state weight M, terminal weight N, control
// weight r (scalar, single control channel).
struct LqgWeights {
  Mat2 M = Mat2::Zero();
  Mat2 N = Mat2::Zero();
  double r = 1.0;

  LqgWeights() = default;
  LqgWeights(const Mat2& M_, const Mat2& N_, double r_);
};

// Common realization of every estimator here: dx = R x dt + B u dt + k dY
// with the separated feedback u = L x.
struct LinearObserver {
  Mat2 R = Mat2::Zero();
  Vec2 k = Vec2::Zero();
  RowVec2 L = RowVec2::Zero();
  Vec2 B = Vec2::Zero();
};

struct KalmanResult {
  Mat2 Vinf;       // stationary conditional covariance
  Vec2 gain;       // output-injection gain of the filter
  SolveReport report;
};

struct LqgResult {
  Mat2 Kinf;
  RowVec2 L;
  SolveReport report;
};

struct RiskResult {
  Mat2 Vmu;
  LinearObserver observer;
  Mat2 Kmu;
  SolveReport report_v;
  SolveReport report_k;
};

struct RobustTuning {
  double delta1 = 0.0;
  double delta2 = 0.0;
  EpsArray eps{};

  RobustTuning() = default;
  RobustTuning(double d1, double d2, const EpsArray& e);
};

struct RobustIntermediates {
  Mat2 Aprime;
  Mat2 Dprime;
  RowVec2 Fprime;
  double mu1 = 0.0;
  double mu2 = 0.0;
  Mat2 Q1, Q2, Q3;
};

struct RobustSynthesis {
  Mat2 P1;
  Mat2 P2;
  LinearObserver observer;
  double trace_bound = 0.0;  // = trace(P2), the guaranteed stationary error
  RobustIntermediates intermediates;
  SolveReport report1;
  SolveReport report2;
};

KalmanResult kalman_stationary(const SystemModel& model);

LqgResult lqg_stationary_gain(const SystemModel& model, const LqgWeights& w);

RiskResult risk_stationary(const SystemModel& model, const LqgWeights& w, double mu);

// Guaranteed-cost observer for the admissible uncertainty set described by
// `bounds`, given a fixed feedback row L.
RobustSynthesis robust_synthesize(const SystemModel& model, const UncertaintyBounds& bounds,
                                  const RowVec2& L, const RobustTuning& tuning);

// The epsilon schedule under which the robust observer collapses to the
// Kalman filter as the uncertainty radii shrink; zero entries are floored at
// 1e-12 to keep the Q-matrix ratios finite.
EpsArray default_epsilons(const UncertaintyBounds& bounds);

LinearObserver kalman_observer_realization(const SystemModel& model, const LqgWeights& w);

}  // namespace qro
