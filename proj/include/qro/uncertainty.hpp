#pragma once

#include "qro/base.hpp"
#include "qro/model.hpp"

#include <array>

namespace qro {

// The matrices that dominate every admissible perturbation of the error
// dynamics, plus the two scalars entering the observer-gain construction.
struct BoundMatrices {
  Mat2 Q1 = Mat2::Zero();
  Mat2 Q2 = Mat2::Zero();
  Mat2 Q3 = Mat2::Zero();
  double mu1 = 0.0;
  double mu2 = 0.0;
};

using EpsArray = std::array<double, 8>;

BoundMatrices bound_matrices(const EpsArray& eps, const UncertaintyBounds& bounds,
                             const SystemModel& model);

// Margin of the scalar-weighted cross bound X'Y + Y'X <= eps X'X + (1/eps) Y'Y:
// smallest eigenvalue of (RHS - LHS), which is nonnegative for every real X, Y.
double weighted_cross_bound_check(const MatrixXd& X, const MatrixXd& Y, double eps);

struct BarredBounds {
  Mat4 Qbar1 = Mat4::Zero();
  Mat4 Qbar2 = Mat4::Zero();
  Mat4 Qbar3 = Mat4::Zero();
};

// 4x4 counterparts of Q1/Q2/Q3 on the augmented [estimate, error] coordinates;
// Qbar2 and Qbar3 absorb the observer gain k.
BarredBounds barred_bound_matrices(const BoundMatrices& bm, const Vec2& k,
                                   const SystemModel& model,
                                   const UncertaintyBounds& bounds, const EpsArray& eps);

// Margin of dAbar Xbar + Xbar dAbar' <= Xbar Qbar1 Xbar + Qbar2 at a concrete
// admissible u; nonnegative up to solver slack for every admissible u.
double verify_ineq1(const Mat4& Xbar, const UncertaintyRealization& u,
                    const SystemModel& model, const Vec2& observer_k,
                    const BoundMatrices& bm, const EpsArray& eps);

// Margin of dDbar <= Qbar3 at a concrete admissible u.
double verify_ineq2(const UncertaintyRealization& u, const SystemModel& model,
                    const Vec2& observer_k, const BoundMatrices& bm,
                    const EpsArray& eps);

// Augmented-coordinate perturbation blocks shared with the evaluation module.
Mat4 delta_abar(const SystemModel& model, const UncertaintyRealization& u, const Vec2& k);
Mat4 delta_dbar(const SystemModel& model, const UncertaintyRealization& u, const Vec2& k);

}  // namespace qro
