#pragma once

#include "qro/base.hpp"

namespace qro {

// Physical data of one bosonic mode coupled to a probe field: Hamiltonian
// (1/2) x' G x, field coupling operator c = Ctilde x, control channel B.
struct SystemModel {
  double hbar = 1.0;
  Mat2 G = Mat2::Zero();
  CRow2 Ctilde = CRow2::Zero();
  Vec2 B = Vec2::Zero();

  SystemModel() = default;
  SystemModel(double hbar_, const Mat2& G_, const CRow2& Ctilde_, const Vec2& B_);
};

// Drift/diffusion/output data of the conditional (homodyne) dynamics.
struct DerivedModel {
  Mat2 A;       // drift of the mean
  RowVec2 F;    // measurement row, F = Ctilde + conj(Ctilde)
  Mat2 D;       // diffusion, symmetric PSD
  Vec2 m;       // noise/output cross coupling
  Mat2 Sigma;   // the symplectic form, kept alongside for convenience
};

// Admissible-set radii: (dG)^2 <= g I, Re(dC)'Re(dC) <= r1 I,
// Im(dC)'Im(dC) <= r2 I.
struct UncertaintyBounds {
  double g = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
};

// One concrete perturbation (dG, dC) of the Hamiltonian and coupling.
struct UncertaintyRealization {
  Mat2 deltaG = Mat2::Zero();
  CRow2 deltaC = CRow2::Zero();
};

DerivedModel derive_matrices(const SystemModel& model);

// Perturbations of the derived matrices induced by u.
Mat2 delta_drift(const SystemModel& model, const UncertaintyRealization& u);
Mat2 delta_diffusion(const SystemModel& model, const UncertaintyRealization& u);
RowVec2 delta_output(const UncertaintyRealization& u);
Vec2 delta_cross(const UncertaintyRealization& u);

// Model with the perturbation folded in; derive_matrices(perturbed(...))
// minus derive_matrices(model) recovers the delta_* values.
SystemModel perturbed(const SystemModel& model, const UncertaintyRealization& u);

bool is_admissible(const UncertaintyRealization& u, const UncertaintyBounds& b,
                   double slack = 1e-12);

UncertaintyRealization sample_admissible(const UncertaintyBounds& b, Rng& rng);
UncertaintyRealization sample_admissible(const UncertaintyBounds& b, std::uint64_t seed);

// A perturbation of the potential by -/+ sqrt(d) q^2 enters the Hamiltonian
// quadratic form through its (q, q) entry.  Two readings of the factor of two
// are in circulation; `primary` keeps (dG)^2 = diag(d, 0) inside the bound
// d <= g, `alternate` is the literal (1/2) x' dG x normalization.
enum class DeltaGConvention { primary, alternate };

Mat2 q2_coeff_to_deltaG(double d, double sign,
                        DeltaGConvention conv = DeltaGConvention::primary);

}  // namespace qro
