#pragma once

#include "hetver/states.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace hetver {

namespace detail {

inline void require_same_shape(const DensityMatrix& a, const DensityMatrix& b, const char* who) {
  if (a.dimension() != b.dimension()) {
    throw std::invalid_argument(std::string(who) + ": dimension mismatch (" + std::to_string(a.dimension()) +
                                " vs " + std::to_string(b.dimension()) + ")");
  }
}

inline constexpr double kSpectralFloor = 1e-13;

inline bool is_psd(const DensityMatrix& m) { return m.min_eigenvalue() >= -kEigenClipTol; }

}  // namespace detail

/// Square-root (Uhlmann) fidelity Tr sqrt( sqrt(a) b sqrt(a) ).
///
/// Not clamped: raw tomographic reconstructions that are not positive can
/// give values above 1. The square root is taken of whichever argument is
/// positive semidefinite (the expression is symmetric in that case); the
/// sandwiched matrix may then carry small negative eigenvalues, which
/// contribute zero.
inline double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  detail::require_same_shape(a, b, "fidelity");
  const DensityMatrix* root_side = &a;
  const DensityMatrix* other = &b;
  if (!detail::is_psd(a)) {
    if (!detail::is_psd(b)) throw std::domain_error("fidelity: neither argument is positive semidefinite");
    std::swap(root_side, other);
  }
  // Eigenvalues below kSpectralFloor are solver noise; their square roots
  // (~1e-8) would otherwise swamp an exact result.
  const HermitianEigen root = hermitian_eigen(root_side->matrix());
  const RealVector roots =
      root.values.unaryExpr([](double v) { return v > detail::kSpectralFloor ? std::sqrt(v) : 0.0; });
  const ComplexMatrix r = from_eigen(roots, root.vectors);
  const ComplexMatrix inner = r * other->matrix() * r;
  const RealVector values = hermitian_eigen(0.5 * (inner + inner.adjoint())).values;
  double total = 0.0;
  for (double v : values)
    if (v > detail::kSpectralFloor) total += std::sqrt(v);
  return total;
}

/// Half the trace norm of rho - sigma.
inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  detail::require_same_shape(rho, sigma, "trace_distance");
  const RealVector values = hermitian_eigen(rho.matrix() - sigma.matrix()).values;
  return 0.5 * values.cwiseAbs().sum();
}

inline double total_variation_distance(const ProbabilityDistribution& p, const ProbabilityDistribution& q) {
  const auto pm = p.as_map();
  const auto qm = q.as_map();
  if (pm.size() != qm.size() ||
      !std::equal(pm.begin(), pm.end(), qm.begin(), [](const auto& x, const auto& y) { return x.first == y.first; })) {
    throw std::invalid_argument("total_variation_distance: outcome spaces differ");
  }
  double sum = 0.0;
  for (auto pit = pm.begin(), qit = qm.begin(); pit != pm.end(); ++pit, ++qit) sum += std::abs(pit->second - qit->second);
  return 0.5 * sum;
}

/// Unit-trace eigenvalue projection onto the physical states. Eigenvalues are
/// walked from the smallest up; negative mass is zeroed and its deficit is
/// spread evenly over the eigenvalues that stay positive (nearest physical
/// state in the Frobenius norm within the input's eigenbasis).
inline DensityMatrix project_to_physical(const DensityMatrix& a) {
  const HermitianEigen eig = hermitian_eigen(a.matrix());
  const auto d = static_cast<std::size_t>(eig.values.size());
  std::vector<double> mu(eig.values.data(), eig.values.data() + d);  // ascending

  double excess = 1.0 - std::accumulate(mu.begin(), mu.end(), 0.0);
  std::size_t remaining = d;
  std::size_t i = 0;
  while (i < d && mu[i] + excess / static_cast<double>(remaining) < 0.0) {
    excess += mu[i];
    mu[i] = 0.0;
    --remaining;
    ++i;
  }
  if (remaining == 0) throw std::domain_error("project_to_physical: no positive spectrum to rescale");
  for (std::size_t j = i; j < d; ++j) mu[j] += excess / static_cast<double>(remaining);

  RealVector values(static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j) values(static_cast<Eigen::Index>(j)) = mu[j];
  ComplexMatrix m = from_eigen(values, eig.vectors);
  if (a.physical() && max_abs(m - a.matrix()) <= 1e-12) m = a.matrix();
  return DensityMatrix(std::move(m));
}

}  // namespace hetver
