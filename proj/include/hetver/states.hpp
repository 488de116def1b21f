#pragma once

#include "hetver/linalg.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hetver {

/// Bit position of `qubit` inside a basis index. Qubit 0 is the most
/// significant bit everywhere in this library.
inline std::size_t bit_of(std::size_t qubit, std::size_t num_qubits) {
  return num_qubits - 1 - qubit;
}

/// Bitstring label of a basis index, qubit 0 first.
inline std::string basis_label(std::size_t index, std::size_t num_qubits) {
  std::string out(num_qubits, '0');
  for (std::size_t q = 0; q < num_qubits; ++q)
    if ((index >> bit_of(q, num_qubits)) & 1U) out[q] = '1';
  return out;
}

inline std::size_t basis_index(const std::string& bits) {
  std::size_t index = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("basis_index: '" + bits + "' is not a bitstring");
    index = (index << 1U) | static_cast<std::size_t>(c == '1');
  }
  return index;
}

class StateVector {
 public:
  explicit StateVector(ComplexVector amplitudes)
      : num_qubits_(qubits_for_dimension(static_cast<std::size_t>(amplitudes.size()), "StateVector")),
        amplitudes_(std::move(amplitudes)) {
    const double norm2 = amplitudes_.squaredNorm();
    if (std::abs(norm2 - 1.0) > kStructureTol) {
      throw std::invalid_argument("StateVector: squared norm " + std::to_string(norm2) + " is not 1");
    }
  }

  static StateVector basis(std::size_t num_qubits, std::size_t index) {
    ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dimension_for(num_qubits)));
    if (index >= dimension_for(num_qubits)) throw std::invalid_argument("StateVector::basis: index out of range");
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(std::move(v));
  }

  /// Computational basis state from a bitstring such as "1100".
  static StateVector from_bits(const std::string& bits) {
    if (bits.empty()) throw std::invalid_argument("StateVector::from_bits: empty bitstring");
    return basis(bits.size(), basis_index(bits));
  }

  /// alpha|0> + beta|1>, normalized.
  static StateVector qubit(Complex alpha, Complex beta) {
    ComplexVector v(2);
    v << alpha, beta;
    const double n = v.norm();
    if (n == 0.0) throw std::invalid_argument("StateVector::qubit: zero vector");
    return StateVector(v / n);
  }

  [[nodiscard]] std::size_t num_qubits() const { return num_qubits_; }
  [[nodiscard]] std::size_t dimension() const { return static_cast<std::size_t>(amplitudes_.size()); }
  [[nodiscard]] const ComplexVector& amplitudes() const { return amplitudes_; }
  [[nodiscard]] Complex amplitude(std::size_t i) const { return amplitudes_(static_cast<Eigen::Index>(i)); }
  [[nodiscard]] ComplexMatrix projector() const { return amplitudes_ * amplitudes_.adjoint(); }

 private:
  std::size_t num_qubits_;
  ComplexVector amplitudes_;
};

/// Hermitian matrix over 2^n amplitudes. `physical()` reports whether the
/// matrix is also a valid quantum state (unit trace, PSD); raw tomography
/// output and unnormalized conditioned blocks are allowed and flagged.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix matrix) : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols()) throw std::invalid_argument("DensityMatrix: matrix is not square");
    num_qubits_ = qubits_for_dimension(static_cast<std::size_t>(matrix_.rows()), "DensityMatrix");
    const double herm = hermiticity_error(matrix_);
    if (herm > kStructureTol) {
      throw std::invalid_argument("DensityMatrix: matrix is not Hermitian (max |M - M^dagger| = " +
                                  std::to_string(herm) + ")");
    }
    matrix_ = 0.5 * (matrix_ + matrix_.adjoint()).eval();
    const bool unit_trace = std::abs(trace() - 1.0) <= kTraceTol;
    physical_ = unit_trace && min_eigenvalue() >= -kEigenClipTol;
  }

  static DensityMatrix from_state(const StateVector& psi) { return DensityMatrix(psi.projector()); }

  static DensityMatrix maximally_mixed(std::size_t num_qubits) {
    const auto d = static_cast<Eigen::Index>(dimension_for(num_qubits));
    return DensityMatrix(ComplexMatrix::Identity(d, d) / static_cast<double>(d));
  }

  [[nodiscard]] std::size_t num_qubits() const { return num_qubits_; }
  [[nodiscard]] std::size_t dimension() const { return static_cast<std::size_t>(matrix_.rows()); }
  [[nodiscard]] const ComplexMatrix& matrix() const { return matrix_; }
  [[nodiscard]] bool physical() const { return physical_; }
  [[nodiscard]] double trace() const { return matrix_.trace().real(); }
  [[nodiscard]] double purity() const { return (matrix_ * matrix_).trace().real(); }
  [[nodiscard]] Complex operator()(std::size_t i, std::size_t j) const {
    return matrix_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  [[nodiscard]] RealVector eigenvalues() const { return hermitian_eigen(matrix_).values; }
  [[nodiscard]] double min_eigenvalue() const { return eigenvalues().minCoeff(); }

 private:
  std::size_t num_qubits_ = 0;
  ComplexMatrix matrix_;
  bool physical_ = false;
};

/// Discrete distribution over bitstring outcomes.
class ProbabilityDistribution {
 public:
  ProbabilityDistribution(std::vector<std::string> outcomes, std::vector<double> probabilities)
      : outcomes_(std::move(outcomes)), probabilities_(std::move(probabilities)) {
    if (outcomes_.size() != probabilities_.size() || outcomes_.empty()) {
      throw std::invalid_argument("ProbabilityDistribution: outcome/probability size mismatch");
    }
    double total = 0.0;
    for (double p : probabilities_) {
      if (!(p >= 0.0)) throw std::invalid_argument("ProbabilityDistribution: negative probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("ProbabilityDistribution: probabilities sum to " + std::to_string(total));
    }
    std::vector<std::string> sorted = outcomes_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("ProbabilityDistribution: duplicate outcome label");
    }
  }

  [[nodiscard]] const std::vector<std::string>& outcomes() const { return outcomes_; }
  [[nodiscard]] const std::vector<double>& probabilities() const { return probabilities_; }
  [[nodiscard]] std::size_t size() const { return outcomes_.size(); }

  [[nodiscard]] double probability(const std::string& outcome) const {
    auto it = std::find(outcomes_.begin(), outcomes_.end(), outcome);
    return it == outcomes_.end() ? 0.0 : probabilities_[static_cast<std::size_t>(it - outcomes_.begin())];
  }

  [[nodiscard]] std::map<std::string, double> as_map() const {
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < outcomes_.size(); ++i) out.emplace(outcomes_[i], probabilities_[i]);
    return out;
  }

 private:
  std::vector<std::string> outcomes_;
  std::vector<double> probabilities_;
};

/// Computational-basis outcome distribution of a state over all its qubits.
inline ProbabilityDistribution computational_distribution(const DensityMatrix& rho) {
  std::vector<std::string> labels;
  std::vector<double> probs;
  double total = 0.0;
  for (std::size_t i = 0; i < rho.dimension(); ++i) {
    labels.push_back(basis_label(i, rho.num_qubits()));
    probs.push_back(std::max(rho(i, i).real(), 0.0));
    total += probs.back();
  }
  if (total <= 0.0) throw std::domain_error("computational_distribution: zero trace");
  for (double& p : probs) p /= total;
  return {std::move(labels), std::move(probs)};
}

inline StateVector tensor_product(const StateVector& a, const StateVector& b) {
  if (a.num_qubits() + b.num_qubits() > kMaxQubits) {
    throw std::invalid_argument("tensor_product: result exceeds 6 qubits");
  }
  return StateVector(kron(a.amplitudes(), b.amplitudes()));
}

inline DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.num_qubits() + b.num_qubits() > kMaxQubits) {
    throw std::invalid_argument("tensor_product: result exceeds 6 qubits");
  }
  return DensityMatrix(kron(a.matrix(), b.matrix()));
}

namespace detail {

inline std::vector<std::size_t> validated_qubit_set(std::span<const std::size_t> qubits, std::size_t num_qubits,
                                                    const char* who) {
  std::vector<std::size_t> out(qubits.begin(), qubits.end());
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw std::invalid_argument(std::string(who) + ": duplicate qubit index");
  }
  for (std::size_t q : out) {
    if (q >= num_qubits) {
      throw std::invalid_argument(std::string(who) + ": qubit index " + std::to_string(q) + " out of range for " +
                                  std::to_string(num_qubits) + " qubits");
    }
  }
  return out;
}

/// Full basis index built from the bits of `sub` placed on `qubits` (in order).
inline std::size_t scatter_bits(std::size_t sub, std::span<const std::size_t> qubits, std::size_t num_qubits) {
  std::size_t full = 0;
  const std::size_t k = qubits.size();
  for (std::size_t j = 0; j < k; ++j)
    if ((sub >> (k - 1 - j)) & 1U) full |= std::size_t{1} << bit_of(qubits[j], num_qubits);
  return full;
}

}  // namespace detail

/// Reduced state on `keep` (result qubits follow ascending index order).
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> keep) {
  const std::size_t n = rho.num_qubits();
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  const std::vector<std::size_t> kept = detail::validated_qubit_set(keep, n, "partial_trace");
  std::vector<std::size_t> traced;
  for (std::size_t q = 0; q < n; ++q)
    if (!std::binary_search(kept.begin(), kept.end(), q)) traced.push_back(q);

  const std::size_t dk = dimension_for(kept.size());
  const std::size_t dt = dimension_for(traced.size());
  std::vector<std::size_t> kept_offset(dk), traced_offset(dt);
  for (std::size_t i = 0; i < dk; ++i) kept_offset[i] = detail::scatter_bits(i, kept, n);
  for (std::size_t t = 0; t < dt; ++t) traced_offset[t] = detail::scatter_bits(t, traced, n);

  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  for (std::size_t i = 0; i < dk; ++i)
    for (std::size_t j = 0; j < dk; ++j) {
      Complex acc = 0.0;
      for (std::size_t t = 0; t < dt; ++t) acc += rho(kept_offset[i] | traced_offset[t], kept_offset[j] | traced_offset[t]);
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
    }
  return DensityMatrix(std::move(out));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<std::size_t> keep) {
  return partial_trace(rho, std::span<const std::size_t>(keep.begin(), keep.size()));
}

/// The <outcome|rho|outcome> block on `qubit`; the remaining qubits keep
/// their relative order. With `renormalize` the block is divided by the
/// outcome probability.
inline DensityMatrix condition_on_ancilla(const DensityMatrix& rho, std::size_t qubit, int outcome,
                                          bool renormalize = true) {
  const std::size_t n = rho.num_qubits();
  if (qubit >= n) throw std::invalid_argument("condition_on_ancilla: qubit index out of range");
  if (n < 2) throw std::invalid_argument("condition_on_ancilla: need at least two qubits");
  if (outcome != 0 && outcome != 1) throw std::invalid_argument("condition_on_ancilla: outcome must be 0 or 1");

  std::vector<std::size_t> rest;
  for (std::size_t q = 0; q < n; ++q)
    if (q != qubit) rest.push_back(q);
  const std::size_t dr = dimension_for(rest.size());
  const std::size_t fixed = outcome == 1 ? std::size_t{1} << bit_of(qubit, n) : 0;
  std::vector<std::size_t> offset(dr);
  for (std::size_t i = 0; i < dr; ++i) offset[i] = detail::scatter_bits(i, rest, n) | fixed;

  ComplexMatrix block(static_cast<Eigen::Index>(dr), static_cast<Eigen::Index>(dr));
  for (std::size_t i = 0; i < dr; ++i)
    for (std::size_t j = 0; j < dr; ++j)
      block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rho(offset[i], offset[j]);

  if (renormalize) {
    const double p = block.trace().real();
    if (p < 1e-12) {
      throw std::domain_error("condition_on_ancilla: outcome " + std::to_string(outcome) + " on qubit " +
                              std::to_string(qubit) + " has probability " + std::to_string(p) +
                              "; conditioning is undefined");
    }
    block /= p;
  }
  return DensityMatrix(std::move(block));
}

}  // namespace hetver
