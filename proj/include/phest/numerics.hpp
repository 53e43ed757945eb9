// phest: parametric channel estimation for uplink OFDMA with hopping pilots
// Copyright (C) 2026 the phest authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "phest/errors.hpp"
#include "phest/rng.hpp"

namespace phest::numerics {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

namespace detail {

inline void require_nonempty_finite(const ComplexMatrix& a, const char* op) {
  if (a.rows() < 1 || a.cols() < 1) {
    throw DimensionError(std::string(op) + ": matrix must be at least 1x1");
  }
  if (!a.allFinite()) {
    throw DomainError(std::string(op) + ": non-finite entries");
  }
}

}  // namespace detail

/// Eigenvalue/eigenvector pairs of a Hermitian matrix. `values` is sorted
/// non-increasing and the k-th column of `vectors` pairs with values[k];
/// the columns are orthonormal.
struct EigenPairs {
  RealVector values;
  ComplexMatrix vectors;
};

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized as
/// (A + A^H)/2 first; `tol` bounds the relative asymmetry the caller is
/// allowed to pass in (||A - A^H||_F <= tol * ||A||_F).
inline EigenPairs hermitian_evd(const ComplexMatrix& a, double tol = 1e-8) {
  detail::require_nonempty_finite(a, "hermitian_evd");
  if (a.rows() != a.cols()) throw DimensionError("hermitian_evd: matrix must be square");
  const double scale = a.norm();
  if (tol > 0.0 && scale > 0.0 && (a - a.adjoint()).norm() > tol * scale) {
    throw DomainError("hermitian_evd: input is not Hermitian within tolerance");
  }
  const ComplexMatrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw DomainError("hermitian_evd: eigensolver did not converge");
  }
  const Eigen::Index n = a.rows();
  EigenPairs out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  // Eigen returns ascending order; flip to descending.
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[i] = solver.eigenvalues()[n - 1 - i];
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

/// Moore-Penrose pseudo-inverse via SVD. Singular values below
/// rtol * sigma_max are treated as zero.
inline ComplexMatrix pseudo_inverse(const ComplexMatrix& a, double rtol = 1e-10) {
  detail::require_nonempty_finite(a, "pseudo_inverse");
  if (!(rtol > 0.0 && rtol < 1.0)) {
    throw DomainError("pseudo_inverse: rtol must lie in (0, 1)");
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? rtol * sv[0] : 0.0;
  RealVector inv = RealVector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff && sv[i] > 0.0) inv[i] = 1.0 / sv[i];
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

enum class ShiftSolveMode { LS, TLS };

/// Solves U_up * Q = U_dw for the subspace rotation Q, either by linear
/// least squares or by the total-least-squares construction (SVD of the
/// concatenation [U_up | U_dw], Q = -V12 * V22^-1 from the right singular
/// block of the L smallest singular values). Throws
/// DegenerateSubspaceError when U_up is rank deficient (LS) or the V22
/// partition is singular (TLS) so callers can fall back.
inline ComplexMatrix solve_shift_operator(const ComplexMatrix& u_up,
                                          const ComplexMatrix& u_dw,
                                          ShiftSolveMode mode) {
  detail::require_nonempty_finite(u_up, "solve_shift_operator");
  detail::require_nonempty_finite(u_dw, "solve_shift_operator");
  if (u_up.rows() != u_dw.rows() || u_up.cols() != u_dw.cols()) {
    throw DimensionError("solve_shift_operator: U_up and U_dw must have equal shapes");
  }
  const Eigen::Index rows = u_up.rows();
  const Eigen::Index l = u_up.cols();
  if (rows < l) {
    throw DimensionError("solve_shift_operator: need at least as many rows as columns");
  }

  if (mode == ShiftSolveMode::LS) {
    Eigen::JacobiSVD<ComplexMatrix> svd(u_up, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& sv = svd.singularValues();
    if (sv[sv.size() - 1] <= 1e-12 * sv[0]) {
      throw DegenerateSubspaceError("solve_shift_operator: U_up is rank deficient");
    }
    return pseudo_inverse(u_up) * u_dw;
  }

  ComplexMatrix cat(rows, 2 * l);
  cat << u_up, u_dw;
  Eigen::JacobiSVD<ComplexMatrix> svd(cat, Eigen::ComputeFullV);
  const ComplexMatrix& v = svd.matrixV();  // 2L x 2L
  const ComplexMatrix v12 = v.block(0, l, l, l);
  const ComplexMatrix v22 = v.block(l, l, l, l);
  Eigen::JacobiSVD<ComplexMatrix> v22_svd(v22);
  const RealVector& vs = v22_svd.singularValues();
  // Columns of V are unit vectors, so an absolute threshold is meaningful.
  if (vs[vs.size() - 1] <= 1e-12) {
    throw DegenerateSubspaceError("solve_shift_operator: singular V22 block in TLS");
  }
  return -v12 * v22.inverse();
}

/// Eigenvalues of a general (small, non-Hermitian) square matrix,
/// returned as an unordered multiset.
inline std::vector<Complex> general_eigenvalues(const ComplexMatrix& a) {
  detail::require_nonempty_finite(a, "general_eigenvalues");
  if (a.rows() != a.cols()) throw DimensionError("general_eigenvalues: matrix must be square");
  if (a.rows() > 64) {
    throw DimensionError("general_eigenvalues: restricted to the small-matrix regime (n <= 64)");
  }
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw DomainError("general_eigenvalues: eigensolver did not converge");
  }
  std::vector<Complex> out(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) out[i] = solver.eigenvalues()[i];
  return out;
}

/// Zeroth-order Bessel function of the first kind. Power series below
/// x = 12 and the Hankel asymptotic expansion above; absolute error stays
/// below 1e-9 over [0, 1e3].
inline double bessel_j0(double x) {
  x = std::abs(x);
  if (x < 12.0) {
    const double q = -0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 80; ++k) {
      term *= q / (static_cast<double>(k) * static_cast<double>(k));
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum) + 1e-300) break;
    }
    return sum;
  }
  // J0(x) = sqrt(2/(pi x)) [P(x) cos(x - pi/4) - Q(x) sin(x - pi/4)] with
  // |a_m| = prod_{j<=m} (2j-1)^2 / (8^m m!); truncate when terms stop
  // shrinking (asymptotic tail) or become negligible.
  const double inv_x = 1.0 / x;
  double p = 1.0;
  double q = 0.0;
  double am = 1.0;   // |a_m|
  double xm = 1.0;   // x^-m
  double prev = std::numeric_limits<double>::max();
  for (int m = 1; m <= 34; ++m) {
    const double odd = 2.0 * m - 1.0;
    am *= odd * odd / (8.0 * m);
    xm *= inv_x;
    const double t = am * xm;
    if (t >= prev || t < 1e-18) break;
    prev = t;
    if (m % 2 == 0) {
      p += ((m / 2) % 2 == 0) ? t : -t;
    } else {
      q += (((m - 1) / 2) % 2 == 0) ? -t : t;
    }
  }
  const double chi = x - 0.25 * kPi;
  return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

/// i.i.d. circularly symmetric complex Gaussian samples: real and
/// imaginary parts are each N(0, variance/2). Box-Muller on the supplied
/// stream, so a fixed seed reproduces the vector bit for bit.
inline ComplexVector complex_gaussian(Eigen::Index n, double variance, SplitMix64& rng) {
  if (n < 0) throw DimensionError("complex_gaussian: negative length");
  if (variance < 0.0) throw DomainError("complex_gaussian: variance must be non-negative");
  ComplexVector out(n);
  const double s = std::sqrt(0.5 * variance);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u1 = rng.uniform_open01();
    const double u2 = rng.uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * kPi * u2;
    out[i] = Complex(s * r * std::cos(phi), s * r * std::sin(phi));
  }
  return out;
}

}  // namespace phest::numerics
