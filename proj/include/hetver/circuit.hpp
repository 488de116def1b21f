#pragma once

#include "hetver/angle.hpp"
#include "hetver/states.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace hetver {

using Matrix2 = Eigen::Matrix2cd;

/// U3(theta, phi, lambda) =
///   [[cos(theta/2),            -e^{i lambda} sin(theta/2)],
///    [e^{i phi} sin(theta/2),   e^{i(phi+lambda)} cos(theta/2)]]
inline Matrix2 u3_matrix(double theta, double phi, double lambda) {
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  Matrix2 m;
  m << c, -std::polar(1.0, lambda) * s, std::polar(1.0, phi) * s, std::polar(1.0, phi + lambda) * c;
  return m;
}

enum class GateKind { x, u3, cu3 };

inline std::string to_string(GateKind k) {
  switch (k) {
    case GateKind::x: return "x";
    case GateKind::u3: return "u3";
    case GateKind::cu3: return "cu3";
  }
  return "?";
}

struct Gate {
  GateKind kind = GateKind::x;
  std::size_t target = 0;
  std::size_t control = 0;  // meaningful for cu3 only
  double theta = 0.0;
  double phi = 0.0;
  double lambda = 0.0;

  static Gate x(std::size_t target) { return {GateKind::x, target, 0, 0.0, 0.0, 0.0}; }
  static Gate u3(std::size_t target, double theta, double phi, double lambda) {
    return {GateKind::u3, target, 0, theta, phi, lambda};
  }
  static Gate cu3(std::size_t control, std::size_t target, double theta, double phi, double lambda) {
    return {GateKind::cu3, target, control, theta, phi, lambda};
  }

  // Fixed gates written in the U3 family.
  static Gate h(std::size_t t) { return u3(t, kPi / 2, 0.0, kPi); }
  static Gate z(std::size_t t) { return u3(t, 0.0, 0.0, kPi); }
  static Gate s(std::size_t t) { return u3(t, 0.0, 0.0, kPi / 2); }
  static Gate sdg(std::size_t t) { return u3(t, 0.0, 0.0, -kPi / 2); }
  static Gate cx(std::size_t c, std::size_t t) { return cu3(c, t, kPi, 0.0, kPi); }

  [[nodiscard]] bool two_qubit() const { return kind == GateKind::cu3; }

  [[nodiscard]] std::vector<std::size_t> qubits() const {
    if (kind == GateKind::cu3) return {control, target};
    return {target};
  }

  /// The 2x2 block acting on the target.
  [[nodiscard]] Matrix2 matrix() const {
    if (kind == GateKind::x) {
      Matrix2 m;
      m << 0.0, 1.0, 1.0, 0.0;
      return m;
    }
    return u3_matrix(theta, phi, lambda);
  }

  void validate(std::size_t num_qubits) const {
    if (!std::isfinite(theta) || !std::isfinite(phi) || !std::isfinite(lambda)) {
      throw std::invalid_argument("Gate: angles must be finite");
    }
    if (target >= num_qubits) throw std::invalid_argument("Gate: target " + std::to_string(target) + " out of range");
    if (kind == GateKind::cu3) {
      if (control >= num_qubits) throw std::invalid_argument("Gate: control " + std::to_string(control) + " out of range");
      if (control == target) throw std::invalid_argument("Gate: control equals target");
    }
  }

  friend bool operator==(const Gate&, const Gate&) = default;
};

class Circuit {
 public:
  explicit Circuit(std::size_t num_qubits, std::optional<std::size_t> ancilla = std::nullopt)
      : num_qubits_(num_qubits), ancilla_(ancilla) {
    if (num_qubits == 0 || num_qubits > kMaxQubits) {
      throw std::invalid_argument("Circuit: qubit count must be in [1, 6]");
    }
    if (ancilla && *ancilla >= num_qubits) throw std::invalid_argument("Circuit: ancilla index out of range");
  }

  Circuit& add(const Gate& g) {
    g.validate(num_qubits_);
    gates_.push_back(g);
    return *this;
  }

  Circuit& add(const std::vector<Gate>& gates) {
    for (const Gate& g : gates) add(g);
    return *this;
  }

  void set_ancilla(std::size_t q) {
    if (q >= num_qubits_) throw std::invalid_argument("Circuit: ancilla index out of range");
    ancilla_ = q;
  }

  [[nodiscard]] std::size_t num_qubits() const { return num_qubits_; }
  [[nodiscard]] const std::vector<Gate>& gates() const { return gates_; }
  [[nodiscard]] const std::optional<std::size_t>& ancilla() const { return ancilla_; }

  /// Qubits other than the ancilla, ascending.
  [[nodiscard]] std::vector<std::size_t> system_qubits() const {
    std::vector<std::size_t> out;
    for (std::size_t q = 0; q < num_qubits_; ++q)
      if (!ancilla_ || q != *ancilla_) out.push_back(q);
    return out;
  }

  friend bool operator==(const Circuit&, const Circuit&) = default;

 private:
  std::size_t num_qubits_;
  std::optional<std::size_t> ancilla_;
  std::vector<Gate> gates_;
};

struct NoiseModel {
  double depolarizing_prob_1q = 0.0;
  double depolarizing_prob_2q = 0.0;
  double readout_flip_prob = 0.0;

  void validate() const {
    for (double p : {depolarizing_prob_1q, depolarizing_prob_2q, readout_flip_prob}) {
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("NoiseModel: probabilities must lie in [0, 1]");
    }
  }
  [[nodiscard]] bool noiseless() const {
    return depolarizing_prob_1q == 0.0 && depolarizing_prob_2q == 0.0 && readout_flip_prob == 0.0;
  }
};

namespace detail {

/// Applies the 2x2 block `m` on `target` of an amplitude vector, optionally
/// only where `control` is set.
template <class Vec>
void apply_block(Vec&& v, std::size_t num_qubits, std::size_t target, const Matrix2& m,
                 std::optional<std::size_t> control = std::nullopt) {
  const std::size_t stride = std::size_t{1} << bit_of(target, num_qubits);
  const std::size_t cmask = control ? std::size_t{1} << bit_of(*control, num_qubits) : 0;
  const std::size_t dim = dimension_for(num_qubits);
  for (std::size_t i = 0; i < dim; ++i) {
    if (i & stride) continue;
    if (cmask && !(i & cmask)) continue;
    const auto i0 = static_cast<Eigen::Index>(i);
    const auto i1 = static_cast<Eigen::Index>(i | stride);
    const Complex a0 = v(i0);
    const Complex a1 = v(i1);
    v(i0) = m(0, 0) * a0 + m(0, 1) * a1;
    v(i1) = m(1, 0) * a0 + m(1, 1) * a1;
  }
}

inline void apply_gate_to_vector(ComplexVector& v, std::size_t num_qubits, const Gate& g) {
  if (g.kind == GateKind::cu3) {
    apply_block(v, num_qubits, g.target, g.matrix(), g.control);
  } else {
    apply_block(v, num_qubits, g.target, g.matrix());
  }
}

/// rho <- U rho U^dagger for a (controlled) single-qubit block.
inline void conjugate_block(ComplexMatrix& rho, std::size_t num_qubits, std::size_t target, const Matrix2& m,
                            std::optional<std::size_t> control = std::nullopt) {
  for (Eigen::Index c = 0; c < rho.cols(); ++c) apply_block(rho.col(c), num_qubits, target, m, control);
  rho.adjointInPlace();
  for (Eigen::Index c = 0; c < rho.cols(); ++c) apply_block(rho.col(c), num_qubits, target, m, control);
}

inline const std::array<Matrix2, 4>& pauli_blocks() {
  static const std::array<Matrix2, 4> blocks = [] {
    std::array<Matrix2, 4> p;
    p[0] << 1.0, 0.0, 0.0, 1.0;
    p[1] << 0.0, 1.0, 1.0, 0.0;
    p[2] << 0.0, -kI, kI, 0.0;
    p[3] << 1.0, 0.0, 0.0, -1.0;
    return p;
  }();
  return blocks;
}

/// Depolarizing channel on one qubit: rho -> (1-p) rho + p (I/2 (x) Tr_q rho),
/// written as the Pauli twirl (1 - 3p/4) rho + p/4 sum_P P rho P.
inline void depolarize_1q(ComplexMatrix& rho, std::size_t num_qubits, std::size_t q, double p) {
  if (p == 0.0) return;
  ComplexMatrix acc = (1.0 - 0.75 * p) * rho;
  for (std::size_t k = 1; k < 4; ++k) {
    ComplexMatrix term = rho;
    conjugate_block(term, num_qubits, q, pauli_blocks()[k]);
    acc += (p / 4.0) * term;
  }
  rho = std::move(acc);
}

/// Two-qubit depolarizing channel: (1 - 15p/16) rho + p/16 sum_{P != II} P rho P.
inline void depolarize_2q(ComplexMatrix& rho, std::size_t num_qubits, std::size_t q0, std::size_t q1, double p) {
  if (p == 0.0) return;
  ComplexMatrix acc = (1.0 - 15.0 * p / 16.0) * rho;
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) {
      if (a == 0 && b == 0) continue;
      ComplexMatrix term = rho;
      if (a) conjugate_block(term, num_qubits, q0, pauli_blocks()[a]);
      if (b) conjugate_block(term, num_qubits, q1, pauli_blocks()[b]);
      acc += (p / 16.0) * term;
    }
  rho = std::move(acc);
}

inline ComplexMatrix ground_projector(std::size_t num_qubits) {
  const auto d = static_cast<Eigen::Index>(dimension_for(num_qubits));
  ComplexMatrix rho = ComplexMatrix::Zero(d, d);
  rho(0, 0) = 1.0;
  return rho;
}

inline void apply_gate_to_density(ComplexMatrix& rho, std::size_t num_qubits, const Gate& g) {
  if (g.kind == GateKind::cu3) {
    conjugate_block(rho, num_qubits, g.target, g.matrix(), g.control);
  } else {
    conjugate_block(rho, num_qubits, g.target, g.matrix());
  }
}

}  // namespace detail

inline StateVector apply_gate(const StateVector& state, const Gate& gate) {
  gate.validate(state.num_qubits());
  ComplexVector v = state.amplitudes();
  detail::apply_gate_to_vector(v, state.num_qubits(), gate);
  return StateVector(std::move(v));
}

inline StateVector run_statevector(const Circuit& circuit) {
  const std::size_t n = circuit.num_qubits();
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dimension_for(n)));
  v(0) = 1.0;
  for (const Gate& g : circuit.gates()) detail::apply_gate_to_vector(v, n, g);
  return StateVector(std::move(v));
}

/// Exact mixed-state evolution from |0...0>. Depolarizing noise follows each
/// gate on that gate's qubits; readout flips are applied at sampling time.
inline DensityMatrix run_density_matrix(const Circuit& circuit, const NoiseModel& noise = {}) {
  noise.validate();
  const std::size_t n = circuit.num_qubits();
  ComplexMatrix rho = detail::ground_projector(n);
  for (const Gate& g : circuit.gates()) {
    detail::apply_gate_to_density(rho, n, g);
    if (g.two_qubit()) {
      detail::depolarize_2q(rho, n, g.control, g.target, noise.depolarizing_prob_2q);
    } else {
      detail::depolarize_1q(rho, n, g.target, noise.depolarizing_prob_1q);
    }
  }
  return DensityMatrix(std::move(rho));
}

// ---- JSON: {num_qubits, gates: [{kind, qubits, angles}], ancilla} ----

inline nlohmann::json to_json(const Gate& g) {
  nlohmann::json j;
  j["kind"] = to_string(g.kind);
  j["qubits"] = g.qubits();
  if (g.kind != GateKind::x) j["angles"] = {g.theta, g.phi, g.lambda};
  return j;
}

inline nlohmann::json to_json(const Circuit& c) {
  nlohmann::json j;
  j["num_qubits"] = c.num_qubits();
  j["gates"] = nlohmann::json::array();
  for (const Gate& g : c.gates()) j["gates"].push_back(to_json(g));
  j["ancilla"] = c.ancilla() ? nlohmann::json(*c.ancilla()) : nlohmann::json(nullptr);
  return j;
}

namespace detail {

inline double json_angle(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_angle(v.get<std::string>()).value();
  throw std::invalid_argument("circuit JSON: angle must be a number or a string such as \"pi/2\"");
}

}  // namespace detail

inline Gate gate_from_json(const nlohmann::json& j) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "kind" && it.key() != "qubits" && it.key() != "angles") {
      throw std::invalid_argument("circuit JSON: unknown gate key '" + it.key() + "'");
    }
  }
  const std::string kind = j.at("kind").get<std::string>();
  const auto qubits = j.at("qubits").get<std::vector<std::size_t>>();
  std::array<double, 3> angles{0.0, 0.0, 0.0};
  if (j.contains("angles")) {
    const auto& a = j.at("angles");
    if (!a.is_array() || a.size() != 3) throw std::invalid_argument("circuit JSON: 'angles' needs three entries");
    for (std::size_t i = 0; i < 3; ++i) angles[i] = detail::json_angle(a[i]);
  }
  if (kind == "x") {
    if (qubits.size() != 1) throw std::invalid_argument("circuit JSON: x takes one qubit");
    return Gate::x(qubits[0]);
  }
  if (kind == "u3") {
    if (qubits.size() != 1) throw std::invalid_argument("circuit JSON: u3 takes one qubit");
    return Gate::u3(qubits[0], angles[0], angles[1], angles[2]);
  }
  if (kind == "cu3") {
    if (qubits.size() != 2) throw std::invalid_argument("circuit JSON: cu3 takes [control, target]");
    return Gate::cu3(qubits[0], qubits[1], angles[0], angles[1], angles[2]);
  }
  throw std::invalid_argument("circuit JSON: unknown gate kind '" + kind + "'");
}

inline Circuit circuit_from_json(const nlohmann::json& j) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "num_qubits" && it.key() != "gates" && it.key() != "ancilla") {
      throw std::invalid_argument("circuit JSON: unknown key '" + it.key() + "'");
    }
  }
  std::optional<std::size_t> ancilla;
  if (j.contains("ancilla") && !j.at("ancilla").is_null()) ancilla = j.at("ancilla").get<std::size_t>();
  Circuit c(j.at("num_qubits").get<std::size_t>(), ancilla);
  for (const auto& g : j.at("gates")) c.add(gate_from_json(g));
  return c;
}

}  // namespace hetver
