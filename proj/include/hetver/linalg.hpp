#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace hetver {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

// Tolerances shared by every numeric check in the library.
inline constexpr double kStructureTol = 1e-10;   // Hermitian / unitary / norm
inline constexpr double kEigenClipTol = 1e-8;    // eigenvalues in [-tol, 0) count as 0
inline constexpr double kTraceTol = 1e-8;
inline constexpr std::size_t kMaxQubits = 6;

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_error(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  return max_abs(m - m.adjoint());
}

inline bool is_hermitian(const ComplexMatrix& m, double tol = kStructureTol) {
  return hermiticity_error(m) <= tol;
}

inline bool is_unitary(const ComplexMatrix& m, double tol = kStructureTol) {
  if (m.rows() != m.cols()) return false;
  const auto identity = ComplexMatrix::Identity(m.rows(), m.cols());
  return max_abs(m.adjoint() * m - identity) <= tol;
}

/// Kronecker product; the left operand indexes the most significant block.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

struct HermitianEigen {
  RealVector values;      // ascending
  ComplexMatrix vectors;  // columns are eigenvectors
};

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized first
/// so round-off in the lower triangle does not leak into the result.
inline HermitianEigen hermitian_eigen(const ComplexMatrix& m) {
  if (!is_hermitian(m)) {
    throw std::invalid_argument("hermitian_eigen: matrix is not Hermitian (max |M - M^dagger| = " +
                                std::to_string(hermiticity_error(m)) + ")");
  }
  const ComplexMatrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("hermitian_eigen: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline ComplexMatrix from_eigen(const RealVector& values, const ComplexMatrix& vectors) {
  return vectors * values.cast<Complex>().asDiagonal() * vectors.adjoint();
}

/// Principal square root of a Hermitian positive-semidefinite matrix.
/// Eigenvalues in [-1e-8, 0) are clipped to zero; anything more negative is
/// rejected.
inline ComplexMatrix matrix_sqrt_psd(const ComplexMatrix& m) {
  if (!is_hermitian(m)) {
    throw std::invalid_argument("matrix_sqrt_psd: matrix is not Hermitian");
  }
  HermitianEigen eig = hermitian_eigen(m);
  if (eig.values.size() > 0 && eig.values.minCoeff() < -kEigenClipTol) {
    throw std::domain_error("matrix_sqrt_psd: eigenvalue " + std::to_string(eig.values.minCoeff()) +
                            " is below -1e-8");
  }
  RealVector roots = eig.values.unaryExpr([](double v) { return std::sqrt(std::max(v, 0.0)); });
  return from_eigen(roots, eig.vectors);
}

inline std::size_t dimension_for(std::size_t num_qubits) { return std::size_t{1} << num_qubits; }

/// Returns n such that 2^n == dim, or throws.
inline std::size_t qubits_for_dimension(std::size_t dim, const char* who) {
  std::size_t n = 0;
  while ((std::size_t{1} << n) < dim) ++n;
  if ((std::size_t{1} << n) != dim || dim == 0) {
    throw std::invalid_argument(std::string(who) + ": dimension " + std::to_string(dim) +
                                " is not a power of two");
  }
  if (n > kMaxQubits) {
    throw std::invalid_argument(std::string(who) + ": " + std::to_string(n) +
                                " qubits exceeds the supported maximum of 6");
  }
  return n;
}

}  // namespace hetver
