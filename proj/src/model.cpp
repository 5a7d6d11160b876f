#include "qro/model.hpp"

namespace qro {
namespace {

using Cplx = std::complex<double>;
using CMat2 = Eigen::Matrix2cd;

// Gram matrix a^dagger b of two complex row vectors.
CMat2 cross_gram(const CRow2& a, const CRow2& b) { return a.adjoint() * b; }

}  // namespace

SystemModel::SystemModel(double hbar_, const Mat2& G_, const CRow2& Ctilde_, const Vec2& B_)
    : hbar(hbar_), G(G_), Ctilde(Ctilde_), B(B_) {
  if (!(hbar > 0)) throw std::invalid_argument("SystemModel: hbar must be positive");
  if (G(0, 1) != G(1, 0)) throw std::invalid_argument("SystemModel: G must be symmetric");
  if (!G.allFinite() || !B.allFinite() || !Ctilde.allFinite())
    throw std::invalid_argument("SystemModel: non-finite entry");
}

DerivedModel derive_matrices(const SystemModel& model) {
  const Mat2 sigma = symplectic();
  const CMat2 gram = cross_gram(model.Ctilde, model.Ctilde);
  DerivedModel d;
  d.Sigma = sigma;
  d.A = sigma * (model.G + gram.imag());
  d.F = 2.0 * model.Ctilde.real();
  d.D = model.hbar * sigma * gram.real() * sigma.transpose();
  d.D = symmetrize(d.D);
  d.m = sigma.transpose() * model.Ctilde.imag().transpose();
  return d;
}

Mat2 delta_drift(const SystemModel& model, const UncertaintyRealization& u) {
  const Mat2 sigma = symplectic();
  const CMat2 t = cross_gram(model.Ctilde, u.deltaC) + cross_gram(u.deltaC, model.Ctilde) +
                  cross_gram(u.deltaC, u.deltaC);
  return sigma * u.deltaG + sigma * t.imag();
}

Mat2 delta_diffusion(const SystemModel& model, const UncertaintyRealization& u) {
  const Mat2 sigma = symplectic();
  const CMat2 t = cross_gram(model.Ctilde, u.deltaC) + cross_gram(u.deltaC, model.Ctilde) +
                  cross_gram(u.deltaC, u.deltaC);
  return symmetrize(model.hbar * sigma * t.real() * sigma.transpose());
}

RowVec2 delta_output(const UncertaintyRealization& u) { return 2.0 * u.deltaC.real(); }

Vec2 delta_cross(const UncertaintyRealization& u) {
  return symplectic().transpose() * u.deltaC.imag().transpose();
}

SystemModel perturbed(const SystemModel& model, const UncertaintyRealization& u) {
  return SystemModel(model.hbar, symmetrize(model.G + u.deltaG),
                     model.Ctilde + u.deltaC, model.B);
}

bool is_admissible(const UncertaintyRealization& u, const UncertaintyBounds& b, double slack) {
  const Mat2 gsq = u.deltaG * u.deltaG;
  if (min_eig_sym(b.g * Mat2::Identity() - gsq) < -slack) return false;
  const RowVec2 re = u.deltaC.real();
  const RowVec2 im = u.deltaC.imag();
  if (min_eig_sym(b.r1 * Mat2::Identity() - re.transpose() * re) < -slack) return false;
  if (min_eig_sym(b.r2 * Mat2::Identity() - im.transpose() * im) < -slack) return false;
  return true;
}

UncertaintyRealization sample_admissible(const UncertaintyBounds& b, Rng& rng) {
  UncertaintyRealization u;

  // dG = O diag(s) O' with a random rotation O and |s_i| <= sqrt(g); the
  // square of such a matrix is O diag(s^2) O' <= g I.
  const double theta = rng.uniform(0.0, 2.0 * M_PI);
  Mat2 rot;
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  const double root = std::sqrt(b.g);
  Vec2 s(rng.uniform(-root, root), rng.uniform(-root, root));
  if (b.g <= 0) s.setZero();
  u.deltaG = symmetrize(rot * s.asDiagonal() * rot.transpose());

  // Rank-one Gram bound v'v <= r I is just |v|^2 <= r: draw a direction and a
  // norm uniform in [0, sqrt(r)].
  const auto row = [&rng](double r) -> RowVec2 {
    if (r <= 0) return RowVec2::Zero();
    RowVec2 v(rng.normal(), rng.normal());
    const double n = v.norm();
    if (n == 0.0) return RowVec2::Zero();
    return v * (rng.uniform(0.0, std::sqrt(r)) / n);
  };
  const RowVec2 re = row(b.r1);
  const RowVec2 im = row(b.r2);
  u.deltaC = re.cast<std::complex<double>>() +
             std::complex<double>(0, 1) * im.cast<std::complex<double>>();
  return u;
}

UncertaintyRealization sample_admissible(const UncertaintyBounds& b, std::uint64_t seed) {
  Rng rng(seed);
  return sample_admissible(b, rng);
}

Mat2 q2_coeff_to_deltaG(double d, double sign, DeltaGConvention conv) {
  if (d < 0) throw std::invalid_argument("q2_coeff_to_deltaG: coefficient must be >= 0");
  const double factor = (conv == DeltaGConvention::alternate) ? 2.0 : 1.0;
  Mat2 dg = Mat2::Zero();
  dg(0, 0) = (sign < 0 ? -1.0 : 1.0) * factor * std::sqrt(d);
  return dg;
}

}  // namespace qro
