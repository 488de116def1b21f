#pragma once

#include "hetver/tomography.hpp"

#include <json.hpp>

#include <array>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hetver {

// ---------------------------------------------------------------------------
// Heterodyne measurement setting
// ---------------------------------------------------------------------------

enum class HeterodyneMode { balanced, unbalanced, custom };

inline std::string to_string(HeterodyneMode m) {
  switch (m) {
    case HeterodyneMode::balanced: return "balanced";
    case HeterodyneMode::unbalanced: return "unbalanced";
    case HeterodyneMode::custom: return "custom";
  }
  return "?";
}

/// The controlled rotation CU3(zeta, 0, 0) that stands in for heterodyne
/// detection. zeta = 0 is balanced, zeta = pi/2 unbalanced, anything else
/// custom.
class HeterodyneSetting {
 public:
  explicit HeterodyneSetting(Angle zeta) : zeta_(std::move(zeta)) {
    if (std::abs(zeta_.value()) <= 1e-12) {
      mode_ = HeterodyneMode::balanced;
    } else if (std::abs(zeta_.value() - kPi / 2) <= 1e-12) {
      mode_ = HeterodyneMode::unbalanced;
    } else {
      mode_ = HeterodyneMode::custom;
    }
  }

  static HeterodyneSetting balanced() { return HeterodyneSetting(Angle::pi_fraction(0, 1)); }
  static HeterodyneSetting unbalanced() { return HeterodyneSetting(Angle::pi_fraction(1, 2)); }

  [[nodiscard]] const Angle& zeta() const { return zeta_; }
  [[nodiscard]] HeterodyneMode mode() const { return mode_; }

  /// The setting used for the second group of copies.
  [[nodiscard]] HeterodyneSetting complement() const {
    switch (mode_) {
      case HeterodyneMode::balanced: return unbalanced();
      case HeterodyneMode::unbalanced: return balanced();
      case HeterodyneMode::custom: return *this;
    }
    return *this;
  }

 private:
  Angle zeta_;
  HeterodyneMode mode_ = HeterodyneMode::balanced;
};

/// N copies measured first, M afterwards; C is the core-state cutoff (Fock
/// levels below C). Qubits carry at most two levels.
struct CopyPlan {
  std::size_t n = 5;
  std::size_t m = 5;
  std::size_t cutoff = 2;

  void validate() const {
    if (n < 1) throw std::invalid_argument("CopyPlan: N >= 1 required");
    if (m < 1) throw std::invalid_argument("CopyPlan: M >= 1 required");
    if (cutoff < 1) throw std::invalid_argument("CopyPlan: C >= 1 required");
    if (cutoff > 2) throw std::invalid_argument("CopyPlan: qubit modes support a cutoff of at most 2");
  }
};

// ---------------------------------------------------------------------------
// Core states: per-mode input preparation
// ---------------------------------------------------------------------------

class CoreState {
 public:
  enum class Kind { vacuum, photon, rotated };

  static CoreState vacuum() { return CoreState(Kind::vacuum, {}); }
  static CoreState photon() { return CoreState(Kind::photon, {}); }
  /// U3(theta, phi, lambda) applied to |0>.
  static CoreState rotated(Angle theta, Angle phi, Angle lambda) {
    return CoreState(Kind::rotated, {std::move(theta), std::move(phi), std::move(lambda)});
  }
  /// The single-mode superposition prepared by U3(pi/2, pi/2, pi/2).
  static CoreState default_superposition() {
    return rotated(Angle::pi_fraction(1, 2), Angle::pi_fraction(1, 2), Angle::pi_fraction(1, 2));
  }
  /// alpha|0> + beta|1> up to normalization and global phase.
  static CoreState from_amplitudes(Complex alpha, Complex beta) {
    const double norm = std::sqrt(std::norm(alpha) + std::norm(beta));
    if (norm == 0.0) throw std::invalid_argument("CoreState: zero amplitudes");
    const double a = std::abs(alpha) / norm;
    const double theta = 2.0 * std::acos(std::min(a, 1.0));
    const double phi = std::abs(beta) == 0.0 ? 0.0 : std::arg(beta) - (std::abs(alpha) == 0.0 ? 0.0 : std::arg(alpha));
    return rotated(Angle::radians(theta), Angle::radians(phi), Angle::pi_fraction(0, 1));
  }

  [[nodiscard]] Kind kind() const { return kind_; }

  [[nodiscard]] std::vector<Gate> preparation(std::size_t qubit) const {
    switch (kind_) {
      case Kind::vacuum: return {};
      case Kind::photon: return {Gate::x(qubit)};
      case Kind::rotated:
        return {Gate::u3(qubit, angles_[0].value(), angles_[1].value(), angles_[2].value())};
    }
    return {};
  }

  [[nodiscard]] StateVector state() const {
    Circuit c(1);
    c.add(preparation(0));
    return run_statevector(c);
  }

  /// Highest occupied Fock level + 1.
  [[nodiscard]] std::size_t support() const { return std::norm(state().amplitude(1)) > 1e-24 ? 2 : 1; }

  [[nodiscard]] std::string label() const {
    switch (kind_) {
      case Kind::vacuum: return "0";
      case Kind::photon: return "1";
      case Kind::rotated:
        return "u3(" + angles_[0].text() + "," + angles_[1].text() + "," + angles_[2].text() + ")";
    }
    return "?";
  }

 private:
  CoreState(Kind k, std::array<Angle, 3> angles) : kind_(k), angles_(std::move(angles)) {}
  Kind kind_;
  std::array<Angle, 3> angles_;
};

/// Parses "1100", "super" (the default superposition on every mode) or a
/// ';'-separated list of per-mode tokens "0", "1", "u3(theta,phi,lambda)".
inline std::vector<CoreState> parse_core_states(const std::string& spec, std::size_t modes, bool allow_super = true) {
  std::vector<CoreState> out;
  if (spec == "super") {
    if (!allow_super) {
      throw std::invalid_argument("initial state 'super' is ambiguous here; give per-mode u3(theta,phi,lambda) tokens");
    }
    out.assign(modes, CoreState::default_superposition());
    return out;
  }
  if (spec.find_first_not_of("01") == std::string::npos && !spec.empty()) {
    for (char c : spec) out.push_back(c == '1' ? CoreState::photon() : CoreState::vacuum());
  } else {
    std::size_t start = 0;
    while (start <= spec.size()) {
      const std::size_t end = std::min(spec.find(';', start), spec.size());
      std::string tok = spec.substr(start, end - start);
      tok.erase(std::remove_if(tok.begin(), tok.end(), ::isspace), tok.end());
      if (tok == "0") {
        out.push_back(CoreState::vacuum());
      } else if (tok == "1") {
        out.push_back(CoreState::photon());
      } else if (tok == "super" && allow_super) {
        out.push_back(CoreState::default_superposition());
      } else if (tok.rfind("u3(", 0) == 0 && tok.back() == ')') {
        const std::string body = tok.substr(3, tok.size() - 4);
        std::vector<std::string> parts;
        std::size_t p = 0;
        while (p <= body.size()) {
          const std::size_t q = std::min(body.find(',', p), body.size());
          parts.push_back(body.substr(p, q - p));
          p = q + 1;
        }
        if (parts.size() != 3) throw std::invalid_argument("initial state: u3 needs three angles in '" + tok + "'");
        out.push_back(CoreState::rotated(parse_angle(parts[0]), parse_angle(parts[1]), parse_angle(parts[2])));
      } else {
        throw std::invalid_argument("initial state: cannot parse token '" + tok + "'");
      }
      start = end + 1;
    }
  }
  if (out.size() != modes) {
    throw std::invalid_argument("initial state '" + spec + "' describes " + std::to_string(out.size()) +
                                " modes, expected " + std::to_string(modes));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Circuits
// ---------------------------------------------------------------------------

/// Appends the heterodyne stage: X on the ancilla unless it is already
/// flipped, then CU3(zeta, 0, 0) from the ancilla onto each system qubit.
inline Circuit heterodyne_stage(const Circuit& circuit, const HeterodyneSetting& setting,
                                const std::vector<std::size_t>& system_qubits) {
  if (!circuit.ancilla()) throw std::invalid_argument("heterodyne_stage: circuit has no ancilla");
  const std::size_t anc = *circuit.ancilla();
  Circuit out = circuit;
  bool flipped = false;
  for (const Gate& g : circuit.gates()) {
    if (g.kind == GateKind::x && g.target == anc) {
      flipped = !flipped;
    } else if (g.target == anc || (g.two_qubit() && g.control == anc)) {
      throw std::invalid_argument("heterodyne_stage: ancilla is used by a gate other than its X preparation");
    }
  }
  if (!flipped) out.add(Gate::x(anc));
  for (std::size_t q : system_qubits) {
    if (q == anc) throw std::invalid_argument("heterodyne_stage: ancilla listed as a system qubit");
    out.add(Gate::cu3(anc, q, setting.zeta().value(), 0.0, 0.0));
  }
  return out;
}

/// Single-mode circuit: system qubit 0, ancilla 1. The ancilla is flipped
/// first, then the system is prepared, then the heterodyne stage.
inline Circuit protocol1_circuit(const CoreState& initial, const HeterodyneSetting& setting) {
  Circuit c(2, 1);
  c.add(Gate::x(1));
  c.add(initial.preparation(0));
  return heterodyne_stage(c, setting, {0});
}

/// Multi-mode circuit: modes 0..k-1, ancilla k.
inline Circuit protocol2_circuit(const std::vector<CoreState>& initial, const HeterodyneSetting& setting) {
  const std::size_t k = initial.size();
  if (k < 1 || k > 4) throw std::invalid_argument("protocol2: between 1 and 4 modes required");
  Circuit c(k + 1, k);
  c.add(Gate::x(k));
  std::vector<std::size_t> system;
  for (std::size_t q = 0; q < k; ++q) {
    c.add(initial[q].preparation(q));
    system.push_back(q);
  }
  return heterodyne_stage(c, setting, system);
}

struct InterferometerAngles {
  double theta = kPi / 2;
  double phi = kPi / 2;
  double lambda = kPi / 2;
};

/// Boson-sampling circuit: X on the first n modes, the interferometer U3 on
/// every mode, then the heterodyne stage from ancilla m.
inline Circuit protocol3_circuit(std::size_t n_photons, std::size_t m_modes,
                                 const std::vector<InterferometerAngles>& interferometer,
                                 const HeterodyneSetting& setting) {
  if (m_modes < 1 || m_modes > 4) throw std::invalid_argument("protocol3: between 1 and 4 modes required");
  if (n_photons > m_modes) {
    throw std::invalid_argument("protocol3: n_photons (" + std::to_string(n_photons) + ") exceeds m_modes (" +
                                std::to_string(m_modes) + ")");
  }
  if (interferometer.size() != m_modes && interferometer.size() != 1) {
    throw std::invalid_argument("protocol3: give one interferometer angle triple, or one per mode");
  }
  Circuit c(m_modes + 1, m_modes);
  for (std::size_t q = 0; q < n_photons; ++q) c.add(Gate::x(q));
  std::vector<std::size_t> system;
  for (std::size_t q = 0; q < m_modes; ++q) {
    const auto& a = interferometer.size() == 1 ? interferometer[0] : interferometer[q];
    c.add(Gate::u3(q, a.theta, a.phi, a.lambda));
    system.push_back(q);
  }
  c.add(Gate::x(m_modes));
  return heterodyne_stage(c, setting, system);
}

// ---------------------------------------------------------------------------
// Witness, bounds, report types
// ---------------------------------------------------------------------------

/// W = 1 - sum_i (1 - F_i). Lower bound on the global fidelity; may be
/// negative.
inline double fidelity_witness(std::span<const double> per_qubit_fidelities) {
  if (per_qubit_fidelities.empty()) throw std::invalid_argument("fidelity_witness: empty fidelity list");
  double deficit = 0.0;
  for (double f : per_qubit_fidelities) deficit += 1.0 - f;
  return 1.0 - deficit;
}

inline double fidelity_witness(const std::vector<double>& f) { return fidelity_witness(std::span<const double>(f)); }

struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double mid = 0.0;
  double rhs = 0.0;  // NaN when the radicand is negative (unphysical F > 1)
  bool holds = false;

  friend bool operator==(const BoundCheck& a, const BoundCheck& b) {
    auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return a.name == b.name && same(a.lhs, b.lhs) && same(a.mid, b.mid) && same(a.rhs, b.rhs) && a.holds == b.holds;
  }
};

/// Evaluates 1 - F <= D <= sqrt(1 - F^2) and TVD <= D <= sqrt(1 - F), with
/// 1e-9 slack. Failures are reported, never thrown.
inline std::vector<BoundCheck> bound_check(double f, double d, double tvd) {
  constexpr double slack = 1e-9;
  auto root = [](double x) {
    if (x < -slack) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(std::max(x, 0.0));
  };
  auto chain = [](std::string name, double lhs, double mid, double rhs) {
    const bool holds = !std::isnan(rhs) && lhs <= mid + slack && mid <= rhs + slack;
    return BoundCheck{std::move(name), lhs, mid, rhs, holds};
  };
  return {chain("fuchs_van_de_graaf", 1.0 - f, d, root(1.0 - f * f)),
          chain("tvd_trace_distance", tvd, d, root(1.0 - f))};
}

enum class Verdict { accept, reject };

inline std::string to_string(Verdict v) { return v == Verdict::accept ? "accept" : "reject"; }

inline Verdict parse_verdict(const std::string& s) {
  if (s == "accept") return Verdict::accept;
  if (s == "reject") return Verdict::reject;
  throw std::invalid_argument("unknown verdict '" + s + "'");
}

/// Accept iff F >= threshold.
inline Verdict threshold_decision(double f, double threshold) { return f >= threshold ? Verdict::accept : Verdict::reject; }

struct SamplingOptions {
  std::optional<std::uint64_t> shots = 8192;  // nullopt: exact probabilities
  std::uint64_t seed = 0;
  NoiseModel noise{};
  AncillaHandling ancilla = AncillaHandling::postselect;
  bool project = false;  // project reconstructions onto physical states first
};

/// Which pure states the per-mode fidelities are taken against.
enum class WitnessTargets { ideal, input };

inline std::string to_string(WitnessTargets t) { return t == WitnessTargets::ideal ? "ideal" : "input"; }

inline WitnessTargets parse_witness_targets(const std::string& s) {
  if (s == "ideal") return WitnessTargets::ideal;
  if (s == "input" || s == "fock") return WitnessTargets::input;
  throw std::invalid_argument("witness targets must be 'ideal' or 'input', got '" + s + "'");
}

struct CopyResult {
  std::size_t index = 0;  // 1-based copy number
  std::string group;      // "N" or "M"
  double fidelity = 0.0;
  std::vector<double> reduced_fidelities;
  double witness = 0.0;
  double trace_distance = 0.0;
  double tvd = 0.0;
  bool physical = false;

  friend bool operator==(const CopyResult&, const CopyResult&) = default;
};

struct GroupSummary {
  std::string name;
  Angle zeta;
  std::string mode;
  std::size_t copies = 0;
  double mean = 0.0;
  double std = 0.0;
  double global_fidelity = 0.0;
  std::vector<double> reduced_fidelities;
  double witness = 0.0;
  double trace_distance = 0.0;
  double tvd = 0.0;
  std::optional<Verdict> verdict;
  std::vector<BoundCheck> bound_checks;

  friend bool operator==(const GroupSummary&, const GroupSummary&) = default;
};

/// Top-level numbers describe the N group (the requested setting); `groups`
/// carries both groups and `copy_fidelities` the whole copy series.
struct ProtocolReport {
  std::string protocol;
  std::string ancilla_handling;
  std::string witness_targets;
  std::vector<double> copy_fidelities;
  double mean = 0.0;
  double std = 0.0;
  double witness = 0.0;
  double global_fidelity = 0.0;
  double trace_distance = 0.0;
  double tvd = 0.0;
  std::optional<double> threshold;
  std::optional<Verdict> verdict;
  std::vector<BoundCheck> bound_checks;
  std::vector<GroupSummary> groups;
  std::vector<CopyResult> copies;

  friend bool operator==(const ProtocolReport&, const ProtocolReport&) = default;
};

inline double sample_mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("sample_mean: empty input");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
inline double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = sample_mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

namespace detail {

/// Dominant eigenvector of a (numerically) pure state.
inline StateVector pure_state_of(const DensityMatrix& rho) {
  if (std::abs(rho.purity() - 1.0) > 1e-9) {
    throw std::domain_error("per-mode ideal target is not pure (purity " + std::to_string(rho.purity()) +
                            "); use input targets");
  }
  const HermitianEigen eig = hermitian_eigen(rho.matrix());
  return StateVector(eig.vectors.col(eig.values.size() - 1).normalized());
}

struct CopyJob {
  Circuit circuit;
  std::vector<std::size_t> system;
  DensityMatrix target;
  std::optional<std::vector<StateVector>> mode_targets;  // none: single-mode, witness = F
};

inline CopyResult evaluate_copy(const CopyJob& job, const SamplingOptions& opts, std::uint64_t seed) {
  const ExpectationSet ex = tomography_sweep(job.circuit, job.system, opts.shots, seed, opts.noise, opts.ancilla);
  DensityMatrix rho = job.system.size() == 1 ? reconstruct_single_qubit(ex) : reconstruct_multi_qubit(ex);
  if (opts.project) rho = project_to_physical(rho);

  CopyResult r;
  r.physical = rho.physical();
  r.fidelity = fidelity(rho, job.target);
  r.reduced_fidelities = job.mode_targets ? reduced_fidelities(rho, *job.mode_targets) : std::vector<double>{r.fidelity};
  r.witness = fidelity_witness(r.reduced_fidelities);
  r.trace_distance = trace_distance(rho, job.target);
  r.tvd = total_variation_distance(computational_distribution(rho), computational_distribution(job.target));
  return r;
}

inline GroupSummary summarize(std::string name, const HeterodyneSetting& setting, const std::vector<CopyResult>& copies,
                              std::optional<double> threshold) {
  GroupSummary g;
  g.name = std::move(name);
  g.zeta = setting.zeta();
  g.mode = to_string(setting.mode());
  g.copies = copies.size();
  std::vector<double> f, d, t;
  g.reduced_fidelities.assign(copies.front().reduced_fidelities.size(), 0.0);
  for (const CopyResult& c : copies) {
    f.push_back(c.fidelity);
    d.push_back(c.trace_distance);
    t.push_back(c.tvd);
    for (std::size_t i = 0; i < c.reduced_fidelities.size(); ++i) g.reduced_fidelities[i] += c.reduced_fidelities[i];
  }
  for (double& x : g.reduced_fidelities) x /= static_cast<double>(copies.size());
  g.mean = sample_mean(f);
  g.std = sample_std(f);
  g.global_fidelity = g.mean;
  g.witness = fidelity_witness(g.reduced_fidelities);
  g.trace_distance = sample_mean(d);
  g.tvd = sample_mean(t);
  if (threshold) g.verdict = threshold_decision(g.global_fidelity, *threshold);
  g.bound_checks = bound_check(g.global_fidelity, g.trace_distance, g.tvd);
  return g;
}

/// Runs the N group with `first` and the M group with `second`, each copy
/// on its own derived seed.
inline ProtocolReport run_groups(std::string protocol, const CopyPlan& plan, const HeterodyneSetting& first,
                                 const HeterodyneSetting& second, const std::function<CopyJob(const HeterodyneSetting&)>& make_job,
                                 const SamplingOptions& opts, std::optional<double> threshold,
                                 WitnessTargets witness_targets) {
  plan.validate();
  opts.noise.validate();
  if (threshold && !(*threshold >= 0.0 && *threshold <= 1.0)) {
    throw std::invalid_argument(protocol + ": threshold must lie in [0, 1]");
  }
  ProtocolReport report;
  report.protocol = std::move(protocol);
  report.ancilla_handling = to_string(opts.ancilla);
  report.witness_targets = to_string(witness_targets);
  report.threshold = threshold;

  std::size_t index = 0;
  for (int group = 0; group < 2; ++group) {
    const HeterodyneSetting& setting = group == 0 ? first : second;
    const std::size_t count = group == 0 ? plan.n : plan.m;
    const CopyJob job = make_job(setting);
    std::vector<CopyResult> results;
    for (std::size_t c = 0; c < count; ++c) {
      CopyResult r = evaluate_copy(job, opts, derive_seed(opts.seed, 1000 + index));
      r.index = ++index;
      r.group = group == 0 ? "N" : "M";
      report.copy_fidelities.push_back(r.fidelity);
      results.push_back(r);
      report.copies.push_back(std::move(r));
    }
    report.groups.push_back(summarize(group == 0 ? "N" : "M", setting, results, threshold));
  }
  const GroupSummary& head = report.groups.front();
  report.mean = head.mean;
  report.std = head.std;
  report.witness = head.witness;
  report.global_fidelity = head.global_fidelity;
  report.trace_distance = head.trace_distance;
  report.tvd = head.tvd;
  report.verdict = head.verdict;
  report.bound_checks = head.bound_checks;
  return report;
}

inline void check_cutoff(const std::vector<CoreState>& states, const CopyPlan& plan) {
  for (const CoreState& s : states)
    if (s.support() > plan.cutoff) {
      throw std::invalid_argument("core state '" + s.label() + "' needs cutoff " + std::to_string(s.support()) +
                                  " but C = " + std::to_string(plan.cutoff));
    }
}

inline std::vector<std::size_t> range(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Protocols
// ---------------------------------------------------------------------------

/// Single-mode fidelity estimation: N + M copies of the single-mode circuit,
/// all with the same heterodyne setting, each reconstructed from X/Y/Z
/// tomography and compared with the ideal output of the system qubit.
inline ProtocolReport protocol1_run(const CoreState& initial, const HeterodyneSetting& setting, const CopyPlan& plan,
                                    const SamplingOptions& opts = {}, std::optional<double> threshold = std::nullopt) {
  plan.validate();
  detail::check_cutoff({initial}, plan);
  auto make_job = [&](const HeterodyneSetting& s) {
    Circuit c = protocol1_circuit(initial, s);
    DensityMatrix target = measured_state(c, {0});
    return detail::CopyJob{std::move(c), {0}, std::move(target), std::nullopt};
  };
  return detail::run_groups("protocol1", plan, setting, setting, make_job, opts, threshold, WitnessTargets::ideal);
}

/// Multi-mode fidelity witness: full tomography of the modes (ancilla
/// conditioned), global fidelity against the ideal output and per-mode
/// fidelities folded into the witness. The M group uses the complementary
/// heterodyne setting.
inline ProtocolReport protocol2_run(const std::vector<CoreState>& initial, const HeterodyneSetting& setting,
                                    const CopyPlan& plan, const SamplingOptions& opts = {},
                                    WitnessTargets targets = WitnessTargets::ideal,
                                    std::optional<double> threshold = std::nullopt) {
  plan.validate();
  detail::check_cutoff(initial, plan);
  const auto system = detail::range(initial.size());
  auto make_job = [&](const HeterodyneSetting& s) {
    Circuit c = protocol2_circuit(initial, s);
    DensityMatrix target = measured_state(c, system);
    std::vector<StateVector> per_mode;
    for (std::size_t q = 0; q < system.size(); ++q) {
      if (targets == WitnessTargets::input) {
        per_mode.push_back(initial[q].state());
      } else {
        const std::size_t keep[] = {q};
        per_mode.push_back(detail::pure_state_of(partial_trace(target, keep)));
      }
    }
    return detail::CopyJob{std::move(c), system, std::move(target), std::move(per_mode)};
  };
  return detail::run_groups("protocol2", plan, setting, setting.complement(), make_job, opts, threshold, targets);
}

/// Boson-sampling verification. Per-mode witness targets default to the input
/// Fock labels (|1> for the first n modes, |0> otherwise); the verdict
/// accepts iff the global fidelity reaches the threshold.
inline ProtocolReport protocol3_verify(std::size_t n_photons, std::size_t m_modes,
                                       const std::vector<InterferometerAngles>& interferometer,
                                       const HeterodyneSetting& setting, double threshold = 0.6,
                                       const CopyPlan& plan = {1, 1, 2}, const SamplingOptions& opts = {},
                                       WitnessTargets targets = WitnessTargets::input) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw std::invalid_argument("protocol3: threshold must lie in [0, 1]");
  plan.validate();
  if (n_photons > m_modes) {
    throw std::invalid_argument("protocol3: n_photons (" + std::to_string(n_photons) + ") exceeds m_modes (" +
                                std::to_string(m_modes) + ")");
  }
  if (n_photons > 0 && plan.cutoff < 2) throw std::invalid_argument("protocol3: single photons need cutoff C = 2");
  const auto system = detail::range(m_modes);
  auto make_job = [&](const HeterodyneSetting& s) {
    Circuit c = protocol3_circuit(n_photons, m_modes, interferometer, s);
    DensityMatrix target = measured_state(c, system);
    std::vector<StateVector> per_mode;
    for (std::size_t q = 0; q < m_modes; ++q) {
      if (targets == WitnessTargets::input) {
        per_mode.push_back(StateVector::basis(1, q < n_photons ? 1 : 0));
      } else {
        const std::size_t keep[] = {q};
        per_mode.push_back(detail::pure_state_of(partial_trace(target, keep)));
      }
    }
    return detail::CopyJob{std::move(c), system, std::move(target), std::move(per_mode)};
  };
  return detail::run_groups("protocol3", plan, setting, setting.complement(), make_job, opts, threshold, targets);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json number_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

inline double number_from(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace detail

inline nlohmann::json to_json(const BoundCheck& b) {
  return {{"name", b.name},
          {"lhs", detail::number_or_null(b.lhs)},
          {"mid", detail::number_or_null(b.mid)},
          {"rhs", detail::number_or_null(b.rhs)},
          {"holds", b.holds}};
}

inline BoundCheck bound_check_from_json(const nlohmann::json& j) {
  return {j.at("name").get<std::string>(), detail::number_from(j.at("lhs")), detail::number_from(j.at("mid")),
          detail::number_from(j.at("rhs")), j.at("holds").get<bool>()};
}

inline nlohmann::json to_json(const std::vector<BoundCheck>& checks) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& b : checks) out.push_back(to_json(b));
  return out;
}

inline std::vector<BoundCheck> bound_checks_from_json(const nlohmann::json& j) {
  std::vector<BoundCheck> out;
  for (const auto& b : j) out.push_back(bound_check_from_json(b));
  return out;
}

inline nlohmann::json to_json(const ProtocolReport& r) {
  nlohmann::json j;
  j["protocol"] = r.protocol;
  j["ancilla_handling"] = r.ancilla_handling;
  j["witness_targets"] = r.witness_targets;
  j["copy_fidelities"] = r.copy_fidelities;
  j["mean"] = r.mean;
  j["std"] = r.std;
  j["witness"] = r.witness;
  j["global_fidelity"] = r.global_fidelity;
  j["trace_distance"] = r.trace_distance;
  j["tvd"] = r.tvd;
  j["threshold"] = r.threshold ? nlohmann::json(*r.threshold) : nlohmann::json(nullptr);
  j["verdict"] = r.verdict ? nlohmann::json(to_string(*r.verdict)) : nlohmann::json(nullptr);
  j["bound_checks"] = to_json(r.bound_checks);
  j["groups"] = nlohmann::json::array();
  for (const GroupSummary& g : r.groups) {
    j["groups"].push_back({{"name", g.name},
                           {"zeta", g.zeta.text()},
                           {"zeta_radians", g.zeta.value()},
                           {"mode", g.mode},
                           {"copies", g.copies},
                           {"mean", g.mean},
                           {"std", g.std},
                           {"global_fidelity", g.global_fidelity},
                           {"reduced_fidelities", g.reduced_fidelities},
                           {"witness", g.witness},
                           {"trace_distance", g.trace_distance},
                           {"tvd", g.tvd},
                           {"verdict", g.verdict ? nlohmann::json(to_string(*g.verdict)) : nlohmann::json(nullptr)},
                           {"bound_checks", to_json(g.bound_checks)}});
  }
  j["copies"] = nlohmann::json::array();
  for (const CopyResult& c : r.copies) {
    j["copies"].push_back({{"index", c.index},
                           {"group", c.group},
                           {"fidelity", c.fidelity},
                           {"reduced_fidelities", c.reduced_fidelities},
                           {"witness", c.witness},
                           {"trace_distance", c.trace_distance},
                           {"tvd", c.tvd},
                           {"physical", c.physical}});
  }
  return j;
}

inline ProtocolReport protocol_report_from_json(const nlohmann::json& j) {
  ProtocolReport r;
  r.protocol = j.at("protocol").get<std::string>();
  r.ancilla_handling = j.at("ancilla_handling").get<std::string>();
  r.witness_targets = j.at("witness_targets").get<std::string>();
  r.copy_fidelities = j.at("copy_fidelities").get<std::vector<double>>();
  r.mean = j.at("mean").get<double>();
  r.std = j.at("std").get<double>();
  r.witness = j.at("witness").get<double>();
  r.global_fidelity = j.at("global_fidelity").get<double>();
  r.trace_distance = j.at("trace_distance").get<double>();
  r.tvd = j.at("tvd").get<double>();
  if (!j.at("threshold").is_null()) r.threshold = j.at("threshold").get<double>();
  if (!j.at("verdict").is_null()) r.verdict = parse_verdict(j.at("verdict").get<std::string>());
  r.bound_checks = bound_checks_from_json(j.at("bound_checks"));
  for (const auto& g : j.at("groups")) {
    GroupSummary s;
    s.name = g.at("name").get<std::string>();
    const Angle parsed = parse_angle(g.at("zeta").get<std::string>());
    s.zeta = parsed.symbolic() ? parsed : Angle::radians(g.at("zeta_radians").get<double>());
    s.mode = g.at("mode").get<std::string>();
    s.copies = g.at("copies").get<std::size_t>();
    s.mean = g.at("mean").get<double>();
    s.std = g.at("std").get<double>();
    s.global_fidelity = g.at("global_fidelity").get<double>();
    s.reduced_fidelities = g.at("reduced_fidelities").get<std::vector<double>>();
    s.witness = g.at("witness").get<double>();
    s.trace_distance = g.at("trace_distance").get<double>();
    s.tvd = g.at("tvd").get<double>();
    if (!g.at("verdict").is_null()) s.verdict = parse_verdict(g.at("verdict").get<std::string>());
    s.bound_checks = bound_checks_from_json(g.at("bound_checks"));
    r.groups.push_back(std::move(s));
  }
  for (const auto& c : j.at("copies")) {
    CopyResult x;
    x.index = c.at("index").get<std::size_t>();
    x.group = c.at("group").get<std::string>();
    x.fidelity = c.at("fidelity").get<double>();
    x.reduced_fidelities = c.at("reduced_fidelities").get<std::vector<double>>();
    x.witness = c.at("witness").get<double>();
    x.trace_distance = c.at("trace_distance").get<double>();
    x.tvd = c.at("tvd").get<double>();
    x.physical = c.at("physical").get<bool>();
    r.copies.push_back(std::move(x));
  }
  return r;
}

}  // namespace hetver
