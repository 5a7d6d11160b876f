#include "qro/uncertainty.hpp"

namespace qro {
namespace {

void require_positive(const EpsArray& eps) {
  for (double e : eps)
    if (!(e > 0)) throw std::invalid_argument("bound_matrices: eps must be positive");
}

}  // namespace

BoundMatrices bound_matrices(const EpsArray& eps, const UncertaintyBounds& bounds,
                             const SystemModel& model) {
  require_positive(eps);
  const double e1 = eps[0], e2 = eps[1], e3 = eps[2], e4 = eps[3], e5 = eps[4],
               e6 = eps[5], e7 = eps[6], e8 = eps[7];
  const double g = bounds.g, r1 = bounds.r1, r2 = bounds.r2, hbar = model.hbar;
  const Mat2 sigma = symplectic();
  const RowVec2 c1 = model.Ctilde.real();
  const RowVec2 c2 = model.Ctilde.imag();
  const Mat2 gram1 = c1.transpose() * c1;
  const Mat2 gram2 = c2.transpose() * c2;

  BoundMatrices bm;
  bm.Q1 = (e1 + e2 + e4 + e5) * Mat2::Identity() + e3 * (gram1 + gram2);
  bm.Q2 = (g / e1 + (r1 + r2) / e3 + r1 * r2 / e4 + r1 * r2 / e5) * Mat2::Identity() +
          (2.0 / e2) * sigma * (r2 * gram1 + r1 * gram2) * sigma.transpose();
  bm.Q3 = hbar * (r1 / e6 + r2 / e7 + r2 / e8 + r1 + r2) * Mat2::Identity() +
          hbar * sigma * (e6 * gram1 + e7 * gram2) * sigma.transpose();
  bm.Q1 = symmetrize(bm.Q1);
  bm.Q2 = symmetrize(bm.Q2);
  bm.Q3 = symmetrize(bm.Q3);
  bm.mu1 = hbar + 4.0 * r1 / e2;
  bm.mu2 = hbar + 8.0 * r1 / e2 + hbar * e8;
  return bm;
}

double weighted_cross_bound_check(const MatrixXd& X, const MatrixXd& Y, double eps) {
  if (!(eps > 0)) throw std::invalid_argument("weighted_cross_bound_check: eps must be positive");
  if (X.rows() != Y.rows() || X.cols() != Y.cols())
    throw std::invalid_argument("weighted_cross_bound_check: shape mismatch");
  const MatrixXd lhs = X.transpose() * Y + Y.transpose() * X;
  const MatrixXd rhs = eps * X.transpose() * X + (1.0 / eps) * Y.transpose() * Y;
  return min_eig_sym(rhs - lhs);
}

BarredBounds barred_bound_matrices(const BoundMatrices& bm, const Vec2& k,
                                   const SystemModel& model,
                                   const UncertaintyBounds& bounds, const EpsArray& eps) {
  require_positive(eps);
  const double hbar = model.hbar;
  const Vec2 m = derive_matrices(model).m;
  const Mat2 mk = m * k.transpose();
  const Mat2 km = k * m.transpose();
  const Mat2 kk = k * k.transpose();

  BarredBounds out;
  out.Qbar1.topLeftCorner<2, 2>() = bm.Q1;

  out.Qbar2 << bm.Q2, bm.Q2, bm.Q2, bm.Q2;
  Mat4 cross = Mat4::Zero();
  cross.topRightCorner<2, 2>() = mk;
  cross.bottomLeftCorner<2, 2>() = km;
  cross.bottomRightCorner<2, 2>() = km + mk - 2.0 * kk;
  out.Qbar2 -= (4.0 * bounds.r1 / eps[1]) * cross;

  out.Qbar3 << bm.Q3, bm.Q3, bm.Q3, bm.Q3;
  out.Qbar3.bottomRightCorner<2, 2>() += hbar * eps[7] * kk;

  out.Qbar1 = symmetrize(out.Qbar1);
  out.Qbar2 = symmetrize(out.Qbar2);
  out.Qbar3 = symmetrize(out.Qbar3);
  return out;
}

Mat4 delta_abar(const SystemModel& model, const UncertaintyRealization& u, const Vec2& k) {
  const Mat2 dA = delta_drift(model, u);
  const RowVec2 dF = delta_output(u);
  Mat4 out = Mat4::Zero();
  out.topLeftCorner<2, 2>() = dA;
  out.bottomLeftCorner<2, 2>() = dA - k * dF;
  return out;
}

Mat4 delta_dbar(const SystemModel& model, const UncertaintyRealization& u, const Vec2& k) {
  const Mat2 dD = delta_diffusion(model, u);
  const Vec2 dm = delta_cross(u);
  Mat4 out;
  out << dD, dD, dD, dD;
  Mat4 cross = Mat4::Zero();
  cross.topRightCorner<2, 2>() = dm * k.transpose();
  cross.bottomLeftCorner<2, 2>() = k * dm.transpose();
  cross.bottomRightCorner<2, 2>() = k * dm.transpose() + dm * k.transpose();
  return symmetrize(out - model.hbar * cross);
}

namespace {

// The barred assemblies need only r1 from the radii, and mu1 = hbar + 4 r1/e2
// makes it recoverable from an already-built BoundMatrices.
UncertaintyBounds radii_from(const BoundMatrices& bm, const SystemModel& model,
                             const EpsArray& eps) {
  UncertaintyBounds b;
  b.r1 = (bm.mu1 - model.hbar) * eps[1] / 4.0;
  return b;
}

}  // namespace

double verify_ineq1(const Mat4& Xbar, const UncertaintyRealization& u,
                    const SystemModel& model, const Vec2& observer_k,
                    const BoundMatrices& bm, const EpsArray& eps) {
  const BarredBounds qb = barred_bound_matrices(bm, observer_k, model,
                                                radii_from(bm, model, eps), eps);
  const Mat4 dAbar = delta_abar(model, u, observer_k);
  const Mat4 lhs = dAbar * Xbar + Xbar * dAbar.transpose();
  const Mat4 rhs = Xbar * qb.Qbar1 * Xbar + qb.Qbar2;
  return min_eig_sym(rhs - lhs);
}

double verify_ineq2(const UncertaintyRealization& u, const SystemModel& model,
                    const Vec2& observer_k, const BoundMatrices& bm,
                    const EpsArray& eps) {
  const BarredBounds qb = barred_bound_matrices(bm, observer_k, model,
                                                radii_from(bm, model, eps), eps);
  return min_eig_sym(qb.Qbar3 - delta_dbar(model, u, observer_k));
}

}  // namespace qro
