#include "qro/riccati.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace qro {
namespace {

// Solves A X + X A' + Q = 0 by vectorization: (I kron A + A kron I) vec(X) =
// -vec(Q).  No stability requirement beyond lambda_i + lambda_j != 0.
MatrixXd lyap_direct(const MatrixXd& A, const MatrixXd& Q) {
  const int n = static_cast<int>(A.rows());
  MatrixXd K = MatrixXd::Zero(n * n, n * n);
  const MatrixXd eye = MatrixXd::Identity(n, n);
  // column-major vec: vec(A X) = (I kron A) vec(X), vec(X A') = (A kron I) vec(X)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      K.block(i * n, j * n, n, n) += eye(i, j) * A;  // I kron A
      K.block(i * n, j * n, n, n) += A(i, j) * eye;  // A kron I
    }
  Eigen::FullPivLU<MatrixXd> lu(K);
  if (!lu.isInvertible())
    throw SingularSystem("lyapunov vectorized system is numerically singular");
  Eigen::VectorXd q(n * n);
  for (int j = 0; j < n; ++j) q.segment(j * n, n) = Q.col(j);
  const Eigen::VectorXd x = lu.solve(-q);
  MatrixXd X(n, n);
  for (int j = 0; j < n; ++j) X.col(j) = x.segment(j * n, n);
  return symmetrize(X);
}

double equation_scale(const CareProblem& p) {
  return std::max(1.0, p.Qconst.norm());
}

Mat2 closed_loop(const CareProblem& p, const Mat2& P) {
  return p.Adrift + p.sign * p.Rquad * P;
}

bool branch_ok(const CareProblem& p, const Mat2& P, CareBranch branch) {
  const Mat2 acl = closed_loop(p, P);
  return branch == CareBranch::stabilizing ? hurwitz(acl) : hurwitz(-acl);
}

// One damped Newton sweep on f(P) = Adrift'P + P Adrift + sign P Rquad P + Qconst:
// the derivative in direction E is Acl'E + E Acl with Acl the closed loop.
int newton_refine(const CareProblem& p, Mat2& P, int max_iter, double tol) {
  int used = 0;
  double res = care_residual(p, P);
  for (int it = 0; it < max_iter && res > tol; ++it) {
    const Mat2 f = p.Adrift.transpose() * P + P * p.Adrift +
                   p.sign * (P * p.Rquad * P) + p.Qconst;
    const Mat2 acl = closed_loop(p, P);
    Mat2 step;
    try {
      step = lyap_direct(acl.transpose(), f);
    } catch (const SingularSystem&) {
      break;
    }
    double lambda = 1.0;
    Mat2 trial = P;
    double trial_res = res;
    for (int h = 0; h < 30; ++h) {
      trial = symmetrize(P + lambda * step);
      trial_res = care_residual(p, trial);
      if (trial_res < res) break;
      lambda *= 0.5;
    }
    if (!(trial_res < res)) break;  // no further progress
    P = trial;
    res = trial_res;
    ++used;
  }
  return used;
}

SolveReport finalize(const CareProblem& p, Mat2 P, CareMethod method, int iterations) {
  P = symmetrize(P);
  if (!P.allFinite()) throw NonFinite("care solution has non-finite entries");
  SolveReport rep;
  rep.solution = P;
  rep.residual = care_residual(p, P);
  rep.method = method;
  rep.iterations = iterations;
  if (rep.residual > 1e-8 * equation_scale(p))
    throw NoStabilizingSolution("care residual " + std::to_string(rep.residual) +
                                " exceeds tolerance");
  return rep;
}

SolveReport solve_hamiltonian(const CareProblem& p, CareBranch branch) {
  // The equation A'X + XA - X W X + Q = 0 with W = -sign*Rquad has the
  // associated 4x4 matrix Z = [[A, -W], [-Q, -A']]; a basis [U1; U2] of the
  // invariant subspace for the chosen half of the spectrum gives X = U2 U1^-1.
  Eigen::Matrix4d Z;
  Z.topLeftCorner<2, 2>() = p.Adrift;
  Z.topRightCorner<2, 2>() = p.sign * p.Rquad;
  Z.bottomLeftCorner<2, 2>() = -p.Qconst;
  Z.bottomRightCorner<2, 2>() = -p.Adrift.transpose();

  const Eigen::EigenSolver<Eigen::Matrix4d> es(Z);
  if (es.info() != Eigen::Success)
    throw NoStabilizingSolution("eigen decomposition of the quadratic pencil failed");

  const auto& vals = es.eigenvalues();
  std::array<int, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return vals(a).real() < vals(b).real();
  });
  if (branch == CareBranch::antistabilizing) std::reverse(order.begin(), order.end());

  // Dichotomy: the selected pair must be strictly off the imaginary axis and
  // on the requested side.
  const double re_in = vals(order[1]).real();
  const double re_out = vals(order[2]).real();
  const bool ok = branch == CareBranch::stabilizing ? (re_in < -1e-10 && re_out > 1e-10)
                                                    : (re_in > 1e-10 && re_out < -1e-10);
  if (!ok)
    throw NoStabilizingSolution("quadratic pencil has no spectral dichotomy");

  Eigen::Matrix<std::complex<double>, 4, 2> U;
  U.col(0) = es.eigenvectors().col(order[0]);
  U.col(1) = es.eigenvectors().col(order[1]);
  const Eigen::Matrix2cd U1 = U.topRows<2>();
  const Eigen::Matrix2cd U2 = U.bottomRows<2>();
  Eigen::FullPivLU<Eigen::Matrix2cd> lu(U1);
  if (!lu.isInvertible())
    throw NoStabilizingSolution("invariant subspace basis block is singular");
  const Eigen::Matrix2cd Xc = U2 * lu.inverse();
  const double scale = std::max(1.0, Xc.real().norm());
  if (Xc.imag().norm() > 1e-6 * scale)
    throw NoStabilizingSolution("invariant subspace is not conjugate-closed");

  Mat2 P = symmetrize(Xc.real());
  const int iters = newton_refine(p, P, 5, 1e-13 * equation_scale(p));
  return finalize(p, P, CareMethod::hamiltonian, iters);
}

SolveReport solve_newton(const CareProblem& p, CareBranch branch) {
  // Lyapunov-regularized initial guess first: shift the drift far enough into
  // the stable half plane that a plain Lyapunov solve is meaningful.  Damped
  // Newton has no global branch guarantee, so fall back to a small fan of
  // scaled-identity starts before giving up.
  const Eigen::EigenSolver<Mat2> es(p.Adrift);
  const double shift = std::max(0.0, es.eigenvalues().real().maxCoeff()) + 1.0;
  const Mat2 As = p.Adrift - shift * Mat2::Identity();

  std::vector<Mat2> starts;
  starts.push_back(lyap_direct(As.transpose(), symmetrize(p.Qconst) + Mat2::Identity()));
  for (double a : {1.0, -1.0, 10.0, -10.0, 0.1, -0.1})
    starts.push_back(a * Mat2::Identity());

  const double tol = 1e-13 * equation_scale(p);
  for (const Mat2& start : starts) {
    Mat2 P = start;
    const int iters = newton_refine(p, P, 100, tol);
    if (care_residual(p, P) > 1e-8 * equation_scale(p)) continue;
    if (!branch_ok(p, P, branch)) continue;
    return finalize(p, P, CareMethod::newton, iters);
  }
  throw NoStabilizingSolution("newton runs converged to the wrong branch or stalled");
}

SolveReport solve_ode(const CareProblem& p, CareBranch branch) {
  if (p.sign != -1 || branch != CareBranch::stabilizing)
    throw NoStabilizingSolution("ode fallback requires a contracting filter-type equation");
  const auto rhs = [&p](const MatrixXd& X) -> MatrixXd {
    if (X.norm() > 1e12) throw Diverged("riccati ode fallback diverged");
    return p.Adrift.transpose() * X + X * p.Adrift + p.sign * (X * p.Rquad * X) + p.Qconst;
  };
  // A loose stationarity tolerance suffices here: the fixed-step iteration
  // stalls near machine precision at roughly ulp(X)/dt, and the Newton polish
  // below recovers full accuracy from any nearby iterate.
  OdeResult r;
  try {
    r = integrate_matrix_ode(rhs, MatrixXd::Identity(2, 2), 1e-3, 2e3, 1e-9);
  } catch (const NonFinite&) {
    throw Diverged("riccati ode fallback diverged");
  }
  if (!r.stationary)
    throw Diverged("riccati ode fallback exceeded the 2e3 time-unit horizon");
  Mat2 P = r.x_final;
  const int iters = newton_refine(p, P, 5, 1e-13 * equation_scale(p));
  return finalize(p, P, CareMethod::ode_integration, iters);
}

}  // namespace

bool hurwitz(const MatrixXd& A, double margin) {
  const Eigen::EigenSolver<MatrixXd> es(A, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff() < -margin;
}

MatrixXd solve_lyapunov(const MatrixXd& A, const MatrixXd& Q) {
  if (A.rows() != A.cols() || Q.rows() != Q.cols() || A.rows() != Q.rows())
    throw std::invalid_argument("solve_lyapunov: shape mismatch");
  if (!hurwitz(A)) throw NotHurwitz("solve_lyapunov: drift is not Hurwitz");
  const MatrixXd W = lyap_direct(A, symmetrize(Q));
  const double res = (A * W + W * A.transpose() + symmetrize(Q)).norm();
  if (res > 1e-10 * std::max(1.0, Q.norm()))
    throw SingularSystem("solve_lyapunov: residual " + std::to_string(res) +
                         " exceeds tolerance");
  return W;
}

SolveReport solve_care_from(const CareProblem& p, const Mat2& initial_guess,
                            CareBranch branch) {
  Mat2 P = symmetrize(initial_guess);
  const int iters = newton_refine(p, P, 100, 1e-13 * equation_scale(p));
  if (!branch_ok(p, P, branch))
    throw NoStabilizingSolution("newton iterate converged to the wrong branch");
  return finalize(p, P, CareMethod::newton, iters);
}

double care_residual(const CareProblem& p, const Mat2& P) {
  return (p.Adrift.transpose() * P + P * p.Adrift + p.sign * (P * p.Rquad * P) +
          p.Qconst)
      .norm();
}

SolveReport solve_care(const CareProblem& p, CareBranch branch,
                       std::optional<CareMethod> force) {
  if (force) {
    switch (*force) {
      case CareMethod::hamiltonian: return solve_hamiltonian(p, branch);
      case CareMethod::newton: return solve_newton(p, branch);
      case CareMethod::ode_integration: return solve_ode(p, branch);
    }
  }
  std::string first_failure;
  try {
    return solve_hamiltonian(p, branch);
  } catch (const Error& e) {
    first_failure = e.what();
  }
  try {
    return solve_newton(p, branch);
  } catch (const Error&) {
  }
  if (p.sign == -1 && branch == CareBranch::stabilizing) {
    try {
      return solve_ode(p, branch);
    } catch (const Error&) {
    }
  }
  throw NoStabilizingSolution("no stabilizing solution found (" + first_failure + ")");
}

OdeResult integrate_matrix_ode(const std::function<MatrixXd(const MatrixXd&)>& rhs,
                               MatrixXd x0, double dt, double t_end,
                               double stationary_tol, int record_stride) {
  if (!(dt > 0)) throw std::invalid_argument("integrate_matrix_ode: dt must be positive");
  if (!(t_end > 0)) throw std::invalid_argument("integrate_matrix_ode: t_end must be positive");

  OdeResult out;
  MatrixXd X = symmetrize(x0);
  double t = 0.0;
  long step = 0;
  const auto record = [&](double time, const MatrixXd& state) {
    out.path.t.push_back(time);
    out.path.x.push_back(state);
  };
  if (record_stride > 0) record(0.0, X);

  while (t < t_end - 1e-12) {
    const double h = std::min(dt, t_end - t);
    const MatrixXd k1 = rhs(X);
    if (stationary_tol > 0 && k1.norm() <= stationary_tol) {
      out.stationary = true;
      break;
    }
    const MatrixXd k2 = rhs(X + 0.5 * h * k1);
    const MatrixXd k3 = rhs(X + 0.5 * h * k2);
    const MatrixXd k4 = rhs(X + h * k3);
    X = symmetrize(X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    if (!X.allFinite())
      throw NonFinite("integrate_matrix_ode: state became non-finite at t=" +
                      std::to_string(t + h));
    t += h;
    ++step;
    if (record_stride > 0 && step % record_stride == 0) record(t, X);
  }
  if (record_stride > 0 && (out.path.t.empty() || out.path.t.back() != t)) record(t, X);
  out.x_final = X;
  out.t_final = t;
  return out;
}

}  // namespace qro
