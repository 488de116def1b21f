#pragma once

#include "hetver/measurement.hpp"
#include "hetver/metrics.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hetver {

/// Tensor product of single-qubit Paulis written as a string over {I,X,Y,Z},
/// qubit 0 first.
class PauliString {
 public:
  explicit PauliString(std::string letters) : letters_(std::move(letters)) {
    if (letters_.empty()) throw std::invalid_argument("PauliString: empty string");
    for (char c : letters_)
      if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
        throw std::invalid_argument("PauliString: invalid letter '" + std::string(1, c) + "' in '" + letters_ + "'");
      }
  }

  [[nodiscard]] const std::string& letters() const { return letters_; }
  [[nodiscard]] std::size_t size() const { return letters_.size(); }
  [[nodiscard]] char operator[](std::size_t i) const { return letters_[i]; }
  [[nodiscard]] bool identity() const { return letters_.find_first_not_of('I') == std::string::npos; }

  /// True if a measurement in `setting` determines this string's value.
  [[nodiscard]] bool measurable_in(const std::string& setting) const {
    if (setting.size() != letters_.size()) return false;
    for (std::size_t i = 0; i < letters_.size(); ++i)
      if (letters_[i] != 'I' && letters_[i] != setting[i]) return false;
    return true;
  }

  [[nodiscard]] ComplexMatrix matrix() const {
    ComplexMatrix out = ComplexMatrix::Identity(1, 1);
    for (char c : letters_) out = kron(out, single(c));
    return out;
  }

  /// All 4^m strings in lexicographic order over "IXYZ".
  static std::vector<PauliString> all(std::size_t num_qubits) {
    std::vector<PauliString> out;
    const std::string alphabet = "IXYZ";
    const std::size_t total = std::size_t{1} << (2 * num_qubits);
    for (std::size_t k = 0; k < total; ++k) {
      std::string s(num_qubits, 'I');
      for (std::size_t q = 0; q < num_qubits; ++q) s[q] = alphabet[(k >> (2 * (num_qubits - 1 - q))) & 3U];
      out.emplace_back(std::move(s));
    }
    return out;
  }

  friend auto operator<=>(const PauliString&, const PauliString&) = default;

 private:
  static ComplexMatrix single(char c) {
    ComplexMatrix m(2, 2);
    switch (c) {
      case 'X': m << 0.0, 1.0, 1.0, 0.0; break;
      case 'Y': m << 0.0, -kI, kI, 0.0; break;
      case 'Z': m << 1.0, 0.0, 0.0, -1.0; break;
      default: m << 1.0, 0.0, 0.0, 1.0; break;
    }
    return m;
  }

  std::string letters_;
};

/// All 3^m measurement settings over "XYZ", lexicographic.
inline std::vector<std::string> measurement_settings(std::size_t num_qubits) {
  std::vector<std::string> out{""};
  for (std::size_t q = 0; q < num_qubits; ++q) {
    std::vector<std::string> next;
    for (const auto& prefix : out)
      for (char c : {'X', 'Y', 'Z'}) next.push_back(prefix + c);
    out = std::move(next);
  }
  return out;
}

/// Pauli expectation values of an m-qubit state. The all-identity string is
/// fixed at 1.
class ExpectationSet {
 public:
  explicit ExpectationSet(std::size_t num_qubits) : num_qubits_(num_qubits) {
    if (num_qubits == 0 || num_qubits > kMaxQubits) throw std::invalid_argument("ExpectationSet: bad qubit count");
    values_.emplace(std::string(num_qubits, 'I'), 1.0);
  }

  void set(const PauliString& p, double value) {
    if (p.size() != num_qubits_) {
      throw std::invalid_argument("ExpectationSet: string '" + p.letters() + "' has the wrong length");
    }
    if (!std::isfinite(value)) throw std::invalid_argument("ExpectationSet: non-finite value for " + p.letters());
    if (p.identity()) {
      if (std::abs(value - 1.0) > 1e-12) throw std::invalid_argument("ExpectationSet: identity expectation must be 1");
      return;
    }
    values_[p.letters()] = value;
  }

  [[nodiscard]] double get(const PauliString& p) const {
    auto it = values_.find(p.letters());
    if (it == values_.end()) throw std::out_of_range("ExpectationSet: missing expectation for " + p.letters());
    return it->second;
  }

  [[nodiscard]] bool contains(const PauliString& p) const { return values_.contains(p.letters()); }
  [[nodiscard]] bool complete() const { return values_.size() == (std::size_t{1} << (2 * num_qubits_)); }
  [[nodiscard]] std::size_t num_qubits() const { return num_qubits_; }
  [[nodiscard]] const std::map<std::string, double>& values() const { return values_; }

  friend bool operator==(const ExpectationSet&, const ExpectationSet&) = default;

 private:
  std::size_t num_qubits_;
  std::map<std::string, double> values_;
};

namespace detail {

inline int parity_sign(const std::string& bits, const PauliString& p) {
  int sign = 1;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (p[i] != 'I' && bits[i] == '1') sign = -sign;
  return sign;
}

inline double expectation_from_distribution(const ProbabilityDistribution& dist, const PauliString& p) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) acc += parity_sign(dist.outcomes()[i], p) * dist.probabilities()[i];
  return acc;
}

}  // namespace detail

/// Parity estimate of a Pauli string from counts taken in a compatible
/// setting; identity positions are marginalized.
inline double expectation_from_counts(const ShotTable& table, const PauliString& p) {
  if (!p.measurable_in(table.setting())) {
    throw std::invalid_argument("expectation_from_counts: string " + p.letters() + " is not measurable in setting '" +
                                table.setting() + "'");
  }
  if (table.shots() == 0) throw std::invalid_argument("expectation_from_counts: table has no shots");
  std::int64_t acc = 0;
  for (const auto& [bits, n] : table.counts()) acc += detail::parity_sign(bits, p) * static_cast<std::int64_t>(n);
  return static_cast<double>(acc) / static_cast<double>(table.shots());
}

namespace detail {

/// Every Pauli string is estimated as the mean over all settings that can
/// measure it, so identity-containing strings use the data of several
/// settings.
template <class Estimate>
ExpectationSet assemble_expectations(std::size_t num_qubits, const std::vector<std::string>& settings,
                                     Estimate&& estimate) {
  ExpectationSet out(num_qubits);
  for (const PauliString& p : PauliString::all(num_qubits)) {
    if (p.identity()) continue;
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t s = 0; s < settings.size(); ++s) {
      if (!p.measurable_in(settings[s])) continue;
      sum += estimate(s, p);
      ++used;
    }
    if (used > 0) out.set(p, sum / static_cast<double>(used));
  }
  return out;
}

}  // namespace detail

/// Assembles expectations from recorded shot tables (one per setting). Strings
/// with no compatible table are left missing.
inline ExpectationSet expectations_from_shot_tables(const std::vector<ShotTable>& tables, std::size_t num_qubits) {
  std::vector<std::string> settings;
  for (const ShotTable& t : tables) {
    if (t.setting().size() != num_qubits) {
      throw std::invalid_argument("expectations_from_shot_tables: setting '" + t.setting() + "' does not cover " +
                                  std::to_string(num_qubits) + " qubits");
    }
    settings.push_back(t.setting());
  }
  return detail::assemble_expectations(num_qubits, settings, [&](std::size_t s, const PauliString& p) {
    return expectation_from_counts(tables[s], p);
  });
}

/// a = 1/2 [[1+<Z>, <X>-i<Y>], [<X>+i<Y>, 1-<Z>]].
inline DensityMatrix reconstruct_single_qubit(const ExpectationSet& ex) {
  if (ex.num_qubits() != 1) throw std::invalid_argument("reconstruct_single_qubit: expectation set is not 1-qubit");
  const double x = ex.get(PauliString("X"));
  const double y = ex.get(PauliString("Y"));
  const double z = ex.get(PauliString("Z"));
  ComplexMatrix a(2, 2);
  a << 0.5 * (1.0 + z), 0.5 * Complex(x, -y), 0.5 * Complex(x, y), 0.5 * (1.0 - z);
  return DensityMatrix(std::move(a));
}

/// Linear inversion rho = 2^-m sum_P <P> P over all 4^m Pauli strings.
inline DensityMatrix reconstruct_multi_qubit(const ExpectationSet& ex) {
  const std::size_t m = ex.num_qubits();
  if (!ex.complete()) {
    throw std::invalid_argument("reconstruct_multi_qubit: expectation set has " + std::to_string(ex.values().size()) +
                                " of " + std::to_string(std::size_t{1} << (2 * m)) + " Pauli strings");
  }
  const auto d = static_cast<Eigen::Index>(dimension_for(m));
  ComplexMatrix rho = ComplexMatrix::Zero(d, d);
  for (const PauliString& p : PauliString::all(m)) rho += ex.get(p) * p.matrix();
  rho *= 1.0 / static_cast<double>(d);
  return DensityMatrix(std::move(rho));
}

enum class AncillaHandling { postselect, trace };

inline std::string to_string(AncillaHandling h) { return h == AncillaHandling::postselect ? "postselect" : "trace"; }

inline AncillaHandling parse_ancilla_handling(const std::string& s) {
  if (s == "postselect") return AncillaHandling::postselect;
  if (s == "trace") return AncillaHandling::trace;
  throw std::invalid_argument("ancilla handling must be 'postselect' or 'trace', got '" + s + "'");
}

/// Exact state of the measured qubits as the sweep sees it: the simulated
/// output, conditioned on the ancilla reading 1 (or with the ancilla traced
/// out), reduced to `measured`.
inline DensityMatrix measured_state(const Circuit& circuit, const std::vector<std::size_t>& measured,
                                    const NoiseModel& noise = {},
                                    AncillaHandling handling = AncillaHandling::postselect) {
  DensityMatrix rho = run_density_matrix(circuit, noise);
  std::vector<std::size_t> keep = measured;
  if (circuit.ancilla() && handling == AncillaHandling::postselect) {
    const std::size_t anc = *circuit.ancilla();
    rho = condition_on_ancilla(rho, anc, 1, true);
    for (std::size_t& q : keep) {
      if (q == anc) throw std::invalid_argument("tomography: the ancilla cannot be a measured qubit");
      if (q > anc) --q;
    }
  }
  if (keep.size() == rho.num_qubits()) {
    bool ordered = true;
    for (std::size_t i = 0; i < keep.size(); ++i) ordered = ordered && keep[i] == i;
    if (ordered) return rho;
  }
  return partial_trace(rho, keep);
}

namespace detail {

inline void check_sweep_qubits(const Circuit& circuit, const std::vector<std::size_t>& measured) {
  if (measured.empty()) throw std::invalid_argument("tomography_sweep: no measured qubits");
  if (measured.size() > 4) {
    throw std::invalid_argument("tomography_sweep: at most 4 measured qubits (81 settings), got " +
                                std::to_string(measured.size()));
  }
  validated_qubit_set(measured, circuit.num_qubits(), "tomography_sweep");
  if (!std::is_sorted(measured.begin(), measured.end())) {
    throw std::invalid_argument("tomography_sweep: measured qubits must be ascending");
  }
  if (circuit.ancilla() && std::find(measured.begin(), measured.end(), *circuit.ancilla()) != measured.end()) {
    throw std::invalid_argument("tomography_sweep: the ancilla cannot be a measured qubit");
  }
}

}  // namespace detail

/// Samples every 3^k setting on `measured`. With post-selection the ancilla is
/// read in Z alongside the measured qubits and only shots where it reads 1
/// are kept (its bit is dropped from the table).
inline std::vector<ShotTable> collect_shot_tables(const Circuit& circuit, const std::vector<std::size_t>& measured,
                                                  std::uint64_t shots, std::uint64_t seed, const NoiseModel& noise = {},
                                                  AncillaHandling handling = AncillaHandling::postselect) {
  detail::check_sweep_qubits(circuit, measured);
  const DensityMatrix rho = run_density_matrix(circuit, noise);
  const bool postselect = circuit.ancilla() && handling == AncillaHandling::postselect;
  std::vector<std::size_t> read = measured;
  if (postselect) read.push_back(*circuit.ancilla());

  const auto settings = measurement_settings(measured.size());
  std::vector<ShotTable> tables;
  tables.reserve(settings.size());
  for (std::size_t s = 0; s < settings.size(); ++s) {
    const std::string setting = postselect ? settings[s] + "Z" : settings[s];
    const auto dist = measure_in_basis(rho, setting, read);
    const ShotTable raw = sample_shots(dist, shots, derive_seed(seed, s), noise.readout_flip_prob, setting);
    if (!postselect) {
      tables.push_back(raw);
      continue;
    }
    std::map<std::string, std::uint64_t> kept;
    std::uint64_t total = 0;
    for (const auto& [bits, n] : raw.counts()) {
      if (bits.back() != '1') continue;
      kept[bits.substr(0, bits.size() - 1)] += n;
      total += n;
    }
    if (total == 0) {
      throw std::domain_error("tomography_sweep: no shots survived ancilla post-selection in setting " + settings[s]);
    }
    tables.emplace_back(settings[s], std::move(kept), total);
  }
  return tables;
}

/// Full Pauli expectation set of `measured`. `shots == nullopt` uses exact
/// probabilities.
inline ExpectationSet tomography_sweep(const Circuit& circuit, const std::vector<std::size_t>& measured,
                                       std::optional<std::uint64_t> shots, std::uint64_t seed,
                                       const NoiseModel& noise = {},
                                       AncillaHandling handling = AncillaHandling::postselect) {
  detail::check_sweep_qubits(circuit, measured);
  if (shots) return expectations_from_shot_tables(collect_shot_tables(circuit, measured, *shots, seed, noise, handling), measured.size());

  const DensityMatrix state = measured_state(circuit, measured, noise, handling);
  std::vector<std::size_t> all(state.num_qubits());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto settings = measurement_settings(measured.size());
  std::vector<ProbabilityDistribution> dists;
  for (const auto& s : settings) dists.push_back(measure_in_basis(state, s, all));
  return detail::assemble_expectations(measured.size(), settings, [&](std::size_t s, const PauliString& p) {
    return detail::expectation_from_distribution(dists[s], p);
  });
}

/// Fidelity of each single-qubit marginal of `rho` with its pure target.
inline std::vector<double> reduced_fidelities(const DensityMatrix& rho, const std::vector<StateVector>& targets) {
  if (targets.size() != rho.num_qubits()) {
    throw std::invalid_argument("reduced_fidelities: " + std::to_string(targets.size()) + " targets for " +
                                std::to_string(rho.num_qubits()) + " qubits");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i].num_qubits() != 1) throw std::invalid_argument("reduced_fidelities: targets must be single-qubit");
    const std::size_t keep[] = {i};
    out.push_back(fidelity(partial_trace(rho, keep), DensityMatrix::from_state(targets[i])));
  }
  return out;
}

// ---- JSON ----

inline nlohmann::json to_json(const ExpectationSet& ex) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [p, v] : ex.values()) j[p] = v;
  return j;
}

inline ExpectationSet expectation_set_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.empty()) throw std::invalid_argument("expectation JSON: expected a non-empty object");
  const std::size_t m = j.begin().key().size();
  ExpectationSet ex(m);
  for (auto it = j.begin(); it != j.end(); ++it) ex.set(PauliString(it.key()), it.value().get<double>());
  return ex;
}

/// Nested rows of [re, im] pairs.
inline nlohmann::json matrix_to_json(const ComplexMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ComplexMatrix matrix_from_json(const nlohmann::json& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  ComplexMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != n) throw std::invalid_argument("matrix JSON: matrix is not square");
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& e = row.at(static_cast<std::size_t>(j));
      m(i, j) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return m;
}

}  // namespace hetver
