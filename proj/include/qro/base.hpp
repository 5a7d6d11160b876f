#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace qro {

using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Vec2 = Eigen::Vector2d;
using RowVec2 = Eigen::RowVector2d;
using CRow2 = Eigen::Matrix<std::complex<double>, 1, 2>;
using Eigen::MatrixXd;

// ---- error taxonomy ----

// Common base so callers can map failures to process exit codes in one place.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotHurwitz : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct NoStabilizingSolution : Error { using Error::Error; };
struct Diverged : Error { using Error::Error; };
struct NonFinite : Error { using Error::Error; };
struct RiskSingular : Error { using Error::Error; };
struct InfeasibleP1 : Error { using Error::Error; };
struct InfeasibleP2 : Error { using Error::Error; };
struct AllInfeasible : Error { using Error::Error; };

struct ConfigError : Error {
  ConfigError(const std::string& what, int line_no = 0)
      : Error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + what : what),
        line(line_no) {}
  int line;
};

// ---- small linear-algebra helpers ----

// Symplectic form of a single mode in (q, p) coordinates.
inline Mat2 symplectic() {
  Mat2 s;
  s << 0, 1, -1, 0;
  return s;
}

template <typename Derived>
Eigen::Matrix<double, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>
symmetrize(const Eigen::MatrixBase<Derived>& x) {
  return 0.5 * (x + x.transpose());
}

inline bool all_finite(const MatrixXd& x) { return x.allFinite(); }

inline double min_eig_sym(const MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(s), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double max_eig_sym(const MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(s), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// Block matrix with the symplectic form in every 2x2 block; n must be even.
inline MatrixXd symplectic_blocks(int n) {
  const Mat2 s = symplectic();
  MatrixXd out = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; i += 2)
    for (int j = 0; j < n; j += 2) out.block<2, 2>(i, j) = s;
  return out;
}

// Smallest eigenvalue of the Hermitian matrix V + i(hbar/2) S; a symmetrized
// covariance of a physical state keeps this nonnegative (up to solver noise).
inline double physicality_margin(const MatrixXd& v, const MatrixXd& s, double hbar) {
  using Cplx = std::complex<double>;
  Eigen::MatrixXcd h = v.cast<Cplx>() + Cplx(0, 0.5 * hbar) * s.cast<Cplx>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// ---- deterministic random numbers ----
//
// mt19937_64 is fully specified by the standard; the distributions below are
// hand-rolled so that streams are reproducible across standard libraries.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform on [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // standard normal via the Marsaglia polar method
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Independent per-item seed stream (splitmix64 finalizer), so parallel loops
// can draw identical samples regardless of scheduling.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace qro
