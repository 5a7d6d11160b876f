#pragma once

#include "qro/evaluation.hpp"
#include "qro/uncertainty.hpp"

#include <cstdint>

namespace qro {

// Randomized property campaigns. Each has an OpenMP-parallel kernel and a
// plain-loop serial reference; both draw every sample from a seed derived
// deterministically from (base seed, sample index), so the two variants
// produce identical results and the parallel one is order-independent.

struct IneqCampaignResult {
  std::int64_t n_samples = 0;
  std::int64_t violations = 0;   // margins below -slack across all three checks
  double worst1 = 0.0;           // worst ineq-1 margin over samples and Xbar
  double worst2 = 0.0;           // worst ineq-2 margin over samples
  double worst_basic = 0.0;      // worst scalar cross-bound margin
};

IneqCampaignResult ineq_campaign(const SystemModel& model, const UncertaintyBounds& bounds,
                                 const EpsArray& eps, const Vec2& k, std::int64_t n_samples,
                                 int n_xbar, std::uint64_t seed, double slack = 1e-8);
IneqCampaignResult ineq_campaign_serial(const SystemModel& model, const UncertaintyBounds& bounds,
                                        const EpsArray& eps, const Vec2& k, std::int64_t n_samples,
                                        int n_xbar, std::uint64_t seed, double slack = 1e-8);

struct LemmaCampaignResult {
  int n_instances = 0;
  int premise_ok = 0;      // instances whose constructed Xbar passes domination_premise_check
  int conclusion_ok = 0;   // of those, instances with V_t within Xbar + 1e-6 I late-time
  double worst_margin = 0.0;
};

LemmaCampaignResult lemma_campaign(int n_instances, std::uint64_t seed, double dt,
                                   double t_end, double t_check = 200.0);
LemmaCampaignResult lemma_campaign_serial(int n_instances, std::uint64_t seed, double dt,
                                          double t_end, double t_check = 200.0);

struct TrajectoryCampaignResult {
  int n_seeds = 0;
  int diverged = 0;  // |position estimate| exceeded 100*|x0|+1 before t_end
  int bounded = 0;   // max |position estimate| stayed <= 5
};

TrajectoryCampaignResult trajectory_campaign(const SystemModel& model, const LinearObserver& obs,
                                             bool use_control, int n_seeds, std::uint64_t seed,
                                             const Vec2& x0, double t_end = 20.0, double dt = 1e-3);
TrajectoryCampaignResult trajectory_campaign_serial(const SystemModel& model,
                                                    const LinearObserver& obs, bool use_control,
                                                    int n_seeds, std::uint64_t seed, const Vec2& x0,
                                                    double t_end = 20.0, double dt = 1e-3);

}  // namespace qro
