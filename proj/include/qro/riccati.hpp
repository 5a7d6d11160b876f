#pragma once

#include "qro/base.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace qro {

// Container for the algebraic Riccati equation
//
//   Adrift' P + P Adrift + sign * (P Rquad P) + Qconst = 0
//
// in "control" orientation; equations written with the drift on the left
// (A P + P A' ...) are passed in through Adrift = A'.
struct CareProblem {
  Mat2 Adrift;
  Mat2 Qconst;
  Mat2 Rquad;
  int sign = -1;  // sign of the quadratic term
};

// Which root of the quadratic equation to pick: `stabilizing` closes the loop
// (Adrift + sign*Rquad*P Hurwitz), `antistabilizing` picks the opposite
// invariant subspace (the large root).
enum class CareBranch { stabilizing, antistabilizing };

enum class CareMethod { hamiltonian, newton, ode_integration };

struct SolveReport {
  Mat2 solution = Mat2::Zero();
  double residual = 0.0;  // Frobenius norm of the equation at the solution
  CareMethod method = CareMethod::hamiltonian;
  int iterations = 0;
};

// True iff every eigenvalue of A has real part < -margin.
bool hurwitz(const MatrixXd& A, double margin = 1e-10);

// Solves A W + W A' + Q = 0 for Hurwitz A by Kronecker vectorization into an
// n^2 x n^2 dense system (n in {2, 4}).
MatrixXd solve_lyapunov(const MatrixXd& A, const MatrixXd& Q);

// Stabilizing (or anti-stabilizing) root of the CARE.  Tries the Hamiltonian
// invariant-subspace method first, then a damped Newton iteration, then (for
// contracting filter-type problems) integration of the Riccati ODE to
// stationarity.  A specific method can be forced, e.g. for cross-checks.
SolveReport solve_care(const CareProblem& p,
                       CareBranch branch = CareBranch::stabilizing,
                       std::optional<CareMethod> force = std::nullopt);

// Damped Newton iteration started from an explicit guess; useful when a
// nearby root is already known (e.g. continuation in a parameter).
SolveReport solve_care_from(const CareProblem& p, const Mat2& initial_guess,
                            CareBranch branch = CareBranch::stabilizing);

// Residual of the equation at P (independent of how P was obtained).
double care_residual(const CareProblem& p, const Mat2& P);

struct OdePath {
  std::vector<double> t;
  std::vector<MatrixXd> x;
};

struct OdeResult {
  MatrixXd x_final;
  double t_final = 0.0;
  bool stationary = false;
  OdePath path;  // sampled every `record_stride` steps; empty when stride is 0
};

// Fixed-step RK4 for symmetric-matrix-valued ODEs dX/dt = rhs(X).  Symmetry is
// re-enforced each step; stops early once |rhs(X)|_F <= stationary_tol when a
// positive tolerance is given.
OdeResult integrate_matrix_ode(const std::function<MatrixXd(const MatrixXd&)>& rhs,
                               MatrixXd x0, double dt, double t_end,
                               double stationary_tol = 0.0, int record_stride = 0);

}  // namespace qro
