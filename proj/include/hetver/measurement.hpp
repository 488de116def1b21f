#pragma once

#include "hetver/circuit.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace hetver {

/// splitmix64 finalizer; used to derive independent per-run seeds from the
/// single user seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31U);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(seed ^ mix_seed(stream + 0x632BE59BD9B4E019ULL));
}

/// Outcome counts for one measurement setting. `setting` holds one basis
/// letter (X, Y or Z) per measured qubit; bitstrings use the same order.
class ShotTable {
 public:
  ShotTable() = default;
  ShotTable(std::string setting, std::map<std::string, std::uint64_t> counts, std::uint64_t shots)
      : setting_(std::move(setting)), counts_(std::move(counts)), shots_(shots) {
    std::uint64_t total = 0;
    for (const auto& [bits, n] : counts_) {
      if (!setting_.empty() && bits.size() != setting_.size()) {
        throw std::invalid_argument("ShotTable: bitstring '" + bits + "' does not match setting '" + setting_ + "'");
      }
      for (char c : bits)
        if (c != '0' && c != '1') throw std::invalid_argument("ShotTable: '" + bits + "' is not a bitstring");
      total += n;
    }
    if (total != shots_) {
      throw std::invalid_argument("ShotTable: counts sum to " + std::to_string(total) + " but shots = " +
                                  std::to_string(shots_));
    }
  }

  [[nodiscard]] const std::string& setting() const { return setting_; }
  [[nodiscard]] const std::map<std::string, std::uint64_t>& counts() const { return counts_; }
  [[nodiscard]] std::uint64_t shots() const { return shots_; }
  [[nodiscard]] std::uint64_t count(const std::string& bits) const {
    auto it = counts_.find(bits);
    return it == counts_.end() ? 0 : it->second;
  }

  friend bool operator==(const ShotTable&, const ShotTable&) = default;

 private:
  std::string setting_;
  std::map<std::string, std::uint64_t> counts_;
  std::uint64_t shots_ = 0;
};

namespace detail {

inline void validate_setting(const std::string& setting) {
  for (char c : setting)
    if (c != 'X' && c != 'Y' && c != 'Z') {
      throw std::invalid_argument(std::string("measurement: invalid basis letter '") + c + "' (expected X, Y or Z)");
    }
}

/// Rotation taking the chosen basis to the computational one. X: H.
/// Y: H S^dagger, which maps (|0> + i|1>)/sqrt2 to |0>.
inline std::vector<Matrix2> basis_rotation(char letter) {
  switch (letter) {
    case 'X': return {Gate::h(0).matrix()};
    case 'Y': return {Gate::sdg(0).matrix(), Gate::h(0).matrix()};
    default: return {};
  }
}

inline ProbabilityDistribution marginal(const std::vector<double>& full, std::size_t num_qubits,
                                        const std::vector<std::size_t>& qubits) {
  const std::size_t k = qubits.size();
  std::vector<double> probs(dimension_for(k), 0.0);
  for (std::size_t i = 0; i < full.size(); ++i) {
    std::size_t sub = 0;
    for (std::size_t j = 0; j < k; ++j) sub = (sub << 1U) | ((i >> bit_of(qubits[j], num_qubits)) & 1U);
    probs[sub] += full[i];
  }
  double total = 0.0;
  for (double& p : probs) {
    p = std::max(p, 0.0);
    total += p;
  }
  std::vector<std::string> labels;
  for (std::size_t s = 0; s < probs.size(); ++s) {
    labels.push_back(basis_label(s, k));
    probs[s] /= total;
  }
  return {std::move(labels), std::move(probs)};
}

inline std::vector<std::size_t> check_measured(const std::string& setting, const std::vector<std::size_t>& qubits,
                                               std::size_t num_qubits) {
  validate_setting(setting);
  if (setting.size() != qubits.size()) {
    throw std::invalid_argument("measure_in_basis: setting length " + std::to_string(setting.size()) +
                                " does not match " + std::to_string(qubits.size()) + " qubits");
  }
  if (qubits.empty()) throw std::invalid_argument("measure_in_basis: no qubits to measure");
  detail::validated_qubit_set(qubits, num_qubits, "measure_in_basis");
  return qubits;
}

}  // namespace detail

/// Outcome distribution of measuring `qubits` (in the given order) in the
/// per-qubit bases of `setting`.
inline ProbabilityDistribution measure_in_basis(const DensityMatrix& rho, const std::string& setting,
                                                const std::vector<std::size_t>& qubits) {
  const std::size_t n = rho.num_qubits();
  detail::check_measured(setting, qubits, n);
  ComplexMatrix m = rho.matrix();
  for (std::size_t j = 0; j < qubits.size(); ++j)
    for (const Matrix2& r : detail::basis_rotation(setting[j])) detail::conjugate_block(m, n, qubits[j], r);
  std::vector<double> diag(rho.dimension());
  for (std::size_t i = 0; i < diag.size(); ++i) diag[i] = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
  return detail::marginal(diag, n, qubits);
}

inline ProbabilityDistribution measure_in_basis(const StateVector& psi, const std::string& setting,
                                                const std::vector<std::size_t>& qubits) {
  const std::size_t n = psi.num_qubits();
  detail::check_measured(setting, qubits, n);
  ComplexVector v = psi.amplitudes();
  for (std::size_t j = 0; j < qubits.size(); ++j)
    for (const Matrix2& r : detail::basis_rotation(setting[j])) detail::apply_block(v, n, qubits[j], r);
  std::vector<double> probs(psi.dimension());
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = std::norm(v(static_cast<Eigen::Index>(i)));
  return detail::marginal(probs, n, qubits);
}

/// Multinomial draw of `shots` outcomes with optional independent per-bit
/// readout flips. Uses mt19937_64 and explicit inverse-CDF lookup so that a
/// seed gives the same table on every platform.
inline ShotTable sample_shots(const ProbabilityDistribution& dist, std::uint64_t shots, std::uint64_t seed,
                              double readout_flip_prob = 0.0, std::string setting = {}) {
  if (shots < 1) throw std::invalid_argument("sample_shots: shots must be >= 1");
  if (!(readout_flip_prob >= 0.0 && readout_flip_prob <= 1.0)) {
    throw std::invalid_argument("sample_shots: readout flip probability must lie in [0, 1]");
  }
  std::mt19937_64 gen(seed);
  auto uniform = [&gen] { return static_cast<double>(gen() >> 11U) * 0x1.0p-53; };

  std::vector<double> cdf;
  double acc = 0.0;
  for (double p : dist.probabilities()) cdf.push_back(acc += p);

  const std::size_t width = dist.outcomes().front().size();
  std::vector<std::uint64_t> tally(cdf.size(), 0);
  std::map<std::string, std::uint64_t> flipped;
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = uniform() * acc;
    auto idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    idx = std::min(idx, cdf.size() - 1);
    while (dist.probabilities()[idx] == 0.0 && idx > 0) --idx;  // clamp may land on a trailing empty bin
    if (readout_flip_prob > 0.0) {
      std::string bits = dist.outcomes()[idx];
      for (std::size_t b = 0; b < width; ++b)
        if (uniform() < readout_flip_prob) bits[b] = bits[b] == '0' ? '1' : '0';
      ++flipped[bits];
    } else {
      ++tally[idx];
    }
  }
  std::map<std::string, std::uint64_t> counts = std::move(flipped);
  for (std::size_t i = 0; i < tally.size(); ++i)
    if (tally[i] > 0) counts[dist.outcomes()[i]] += tally[i];
  return {std::move(setting), std::move(counts), shots};
}

/// Empirical distribution over the same outcome space as `like`.
inline ProbabilityDistribution empirical_distribution(const ShotTable& table, const ProbabilityDistribution& like) {
  std::vector<double> probs;
  for (const auto& label : like.outcomes())
    probs.push_back(static_cast<double>(table.count(label)) / static_cast<double>(table.shots()));
  return {like.outcomes(), std::move(probs)};
}

// ---- export: CSV "setting,bitstring,count" and JSON ----

inline std::string shot_tables_to_csv(const std::vector<ShotTable>& tables) {
  std::ostringstream out;
  out << "setting,bitstring,count\n";
  for (const ShotTable& t : tables)
    for (const auto& [bits, n] : t.counts()) out << t.setting() << ',' << bits << ',' << n << '\n';
  return out.str();
}

inline std::vector<ShotTable> shot_tables_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> order;
  std::map<std::string, std::map<std::string, std::uint64_t>> grouped;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("setting", 0) == 0) continue;
    std::istringstream row(line);
    std::string setting, bits, count;
    if (!std::getline(row, setting, ',') || !std::getline(row, bits, ',') || !std::getline(row, count)) {
      throw std::invalid_argument("shot CSV line " + std::to_string(line_no) + ": expected setting,bitstring,count");
    }
    detail::validate_setting(setting);
    std::uint64_t n = 0;
    try {
      std::size_t used = 0;
      n = std::stoull(count, &used);
      if (used != count.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw std::invalid_argument("shot CSV line " + std::to_string(line_no) + ": bad count '" + count + "'");
    }
    if (!grouped.contains(setting)) order.push_back(setting);
    grouped[setting][bits] += n;
  }
  std::vector<ShotTable> tables;
  for (const auto& setting : order) {
    std::uint64_t total = 0;
    for (const auto& [bits, n] : grouped[setting]) total += n;
    tables.emplace_back(setting, grouped[setting], total);
  }
  return tables;
}

inline nlohmann::json to_json(const ShotTable& t) {
  return {{"setting", t.setting()}, {"shots", t.shots()}, {"counts", t.counts()}};
}

inline ShotTable shot_table_from_json(const nlohmann::json& j) {
  return {j.at("setting").get<std::string>(), j.at("counts").get<std::map<std::string, std::uint64_t>>(),
          j.at("shots").get<std::uint64_t>()};
}

}  // namespace hetver
