#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace hetver;
using namespace hetver::testing;

namespace {

const double kRootHalf = std::sqrt(0.5);

ComplexMatrix embed(std::size_t n, std::size_t q, const Matrix2& m) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (std::size_t k = 0; k < n; ++k) out = kron(out, k == q ? ComplexMatrix(m) : ComplexMatrix::Identity(2, 2));
  return out;
}

/// Full-size unitary of a gate, built from Kronecker products.
ComplexMatrix full_unitary(std::size_t n, const Gate& g) {
  if (g.kind != GateKind::cu3) return embed(n, g.target, g.matrix());
  Matrix2 p0 = Matrix2::Zero(), p1 = Matrix2::Zero();
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  const ComplexMatrix off = embed(n, g.control, p0);
  ComplexMatrix on = embed(n, g.control, p1) * embed(n, g.target, g.matrix());
  return off + on;
}

/// Depolarizing channels written as explicit Kraus sums over full matrices.
ComplexMatrix kraus_reference(const Circuit& c, const NoiseModel& noise) {
  const std::size_t n = c.num_qubits();
  const auto d = static_cast<Eigen::Index>(dimension_for(n));
  ComplexMatrix rho = ComplexMatrix::Zero(d, d);
  rho(0, 0) = 1.0;
  std::array<Matrix2, 4> paulis;
  paulis[0] = Matrix2::Identity();
  paulis[1] << 0, 1, 1, 0;
  paulis[2] << 0, Complex(0, -1), Complex(0, 1), 0;
  paulis[3] << 1, 0, 0, -1;
  for (const Gate& g : c.gates()) {
    const ComplexMatrix u = full_unitary(n, g);
    rho = (u * rho * u.adjoint()).eval();
    if (!g.two_qubit()) {
      const double p = noise.depolarizing_prob_1q;
      ComplexMatrix acc = ComplexMatrix::Zero(d, d);
      for (int k = 0; k < 4; ++k) {
        const ComplexMatrix K = std::sqrt(k == 0 ? 1.0 - 0.75 * p : p / 4.0) * embed(n, g.target, paulis[k]);
        acc += K * rho * K.adjoint();
      }
      rho = acc;
    } else {
      const double p = noise.depolarizing_prob_2q;
      ComplexMatrix acc = ComplexMatrix::Zero(d, d);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          const double w = (a == 0 && b == 0) ? 1.0 - 15.0 * p / 16.0 : p / 16.0;
          const ComplexMatrix K = std::sqrt(w) * embed(n, g.control, paulis[a]) * embed(n, g.target, paulis[b]);
          acc += K * rho * K.adjoint();
        }
      rho = acc;
    }
  }
  return rho;
}

}  // namespace

TEST(U3, Examples) {
  EXPECT_LE(max_abs(ComplexMatrix(u3_matrix(0, 0, 0)) - ComplexMatrix::Identity(2, 2)), 1e-15);
  Matrix2 x;
  x << 0, 1, 1, 0;
  EXPECT_LE(max_abs(ComplexMatrix(u3_matrix(kPi, 0, kPi) - x)), 1e-15);
  Matrix2 h;
  h << kRootHalf, kRootHalf, kRootHalf, -kRootHalf;
  EXPECT_LE(max_abs(ComplexMatrix(u3_matrix(kPi / 2, 0, kPi) - h)), 1e-15);
  Matrix2 y;
  y << kRootHalf, Complex(0, -kRootHalf), Complex(0, kRootHalf), -kRootHalf;
  EXPECT_LE(max_abs(ComplexMatrix(u3_matrix(kPi / 2, kPi / 2, kPi / 2) - y)), 1e-15);
}

TEST(U3, AlwaysUnitary) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> a(-10.0, 10.0);
  for (int k = 0; k < 500; ++k) EXPECT_TRUE(is_unitary(u3_matrix(a(rng), a(rng), a(rng)), 1e-12));
  for (const Gate& g : {Gate::h(0), Gate::s(0), Gate::sdg(0), Gate::z(0), Gate::x(0)}) EXPECT_TRUE(is_unitary(g.matrix()));
}

TEST(Gate, Validation) {
  Circuit c(2);
  EXPECT_THROW(c.add(Gate::x(2)), std::invalid_argument);
  EXPECT_THROW(c.add(Gate::cu3(1, 1, 0, 0, 0)), std::invalid_argument);
  EXPECT_THROW(c.add(Gate::cu3(2, 0, 0, 0, 0)), std::invalid_argument);
  EXPECT_THROW(c.add(Gate::u3(0, std::nan(""), 0, 0)), std::invalid_argument);
  EXPECT_THROW(Circuit(0), std::invalid_argument);
  EXPECT_THROW(Circuit(7), std::invalid_argument);
  EXPECT_THROW(Circuit(2, 2), std::invalid_argument);
}

TEST(ApplyGate, Examples) {
  EXPECT_EQ(apply_gate(StateVector::from_bits("0"), Gate::x(0)).amplitudes(), StateVector::from_bits("1").amplitudes());
  const Gate cx = Gate::cu3(0, 1, kPi, 0, kPi);
  EXPECT_LE((apply_gate(StateVector::from_bits("10"), cx).amplitudes() - StateVector::from_bits("11").amplitudes()).norm(), 1e-15);
  EXPECT_LE((apply_gate(StateVector::from_bits("00"), cx).amplitudes() - StateVector::from_bits("00").amplitudes()).norm(), 1e-15);
  EXPECT_THROW(apply_gate(StateVector::from_bits("00"), Gate::x(3)), std::invalid_argument);
}

TEST(ApplyGate, MatchesKroneckerUnitaryAndPreservesNorm) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> a(-4.0, 4.0);
  for (int k = 0; k < 200; ++k) {
    const StateVector s = random_state(3, rng);
    const std::size_t t = static_cast<std::size_t>(k) % 3;
    const Gate g = k % 2 ? Gate::u3(t, a(rng), a(rng), a(rng)) : Gate::cu3((t + 1) % 3, t, a(rng), a(rng), a(rng));
    const StateVector out = apply_gate(s, g);
    EXPECT_NEAR(out.amplitudes().norm(), 1.0, 1e-10);
    EXPECT_LE((out.amplitudes() - full_unitary(3, g) * s.amplitudes()).norm(), 1e-12);
  }
}

TEST(RunStatevector, Examples) {
  const Circuit p3 = protocol3_circuit(2, 4, {InterferometerAngles{}}, HeterodyneSetting::unbalanced());
  Circuit prefix(5, 4);
  prefix.add({p3.gates()[0], p3.gates()[1]});
  EXPECT_EQ(run_statevector(prefix).amplitudes(), StateVector::from_bits("11000").amplitudes());

  EXPECT_EQ(run_statevector(Circuit(2)).amplitudes(), StateVector::from_bits("00").amplitudes());

  // U3(pi/2,pi/2,pi/2)|0> = (|0> + i|1>)/sqrt2, then ancilla-controlled
  // U3(pi/2,0,0) = Ry(pi/2): amplitudes ((1-i)/2, (1+i)/2) on the system.
  Circuit c(2, 1);
  c.add(Gate::u3(0, kPi / 2, kPi / 2, kPi / 2));
  c.add(Gate::x(1));
  c.add(Gate::cu3(1, 0, kPi / 2, 0, 0));
  const StateVector out = run_statevector(c);
  EXPECT_NEAR(std::abs(out.amplitude(1) - Complex(0.5, -0.5)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(out.amplitude(3) - Complex(0.5, 0.5)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(out.amplitude(0)) + std::abs(out.amplitude(2)), 0.0, 1e-15);
}

TEST(HeterodyneStage, Examples) {
  Circuit c(2, 1);
  const Circuit balanced = heterodyne_stage(c, HeterodyneSetting::balanced(), {0});
  EXPECT_NEAR(fidelity(measured_state(balanced, {0}), DensityMatrix::from_state(StateVector::from_bits("0"))), 1.0, 1e-12);

  const StateVector plus = StateVector::qubit(1.0, 1.0);
  const Circuit unbalanced = heterodyne_stage(c, HeterodyneSetting::unbalanced(), {0});
  EXPECT_NEAR(fidelity(measured_state(unbalanced, {0}), DensityMatrix::from_state(plus)), 1.0, 1e-12);

  const StateVector third = StateVector::qubit(std::sqrt(3.0) / 2.0, 0.5);
  const Circuit pi3 = heterodyne_stage(c, HeterodyneSetting(Angle::pi_fraction(1, 3)), {0});
  EXPECT_NEAR(fidelity(measured_state(pi3, {0}), DensityMatrix::from_state(third)), 1.0, 1e-12);
}

TEST(HeterodyneStage, WiringAndErrors) {
  EXPECT_THROW(heterodyne_stage(Circuit(2), HeterodyneSetting::balanced(), {0}), std::invalid_argument);
  Circuit prepared(2, 1);
  prepared.add(Gate::x(1));
  const Circuit out = heterodyne_stage(prepared, HeterodyneSetting::unbalanced(), {0});
  ASSERT_EQ(out.gates().size(), 2U);  // no second X on the ancilla
  EXPECT_EQ(out.gates()[1], Gate::cu3(1, 0, kPi / 2, 0, 0));
  EXPECT_THROW(heterodyne_stage(prepared, HeterodyneSetting::balanced(), {1}), std::invalid_argument);
}

TEST(HeterodyneSetting, ModesAndComplement) {
  EXPECT_EQ(HeterodyneSetting::balanced().mode(), HeterodyneMode::balanced);
  EXPECT_EQ(HeterodyneSetting(parse_angle("pi/2")).mode(), HeterodyneMode::unbalanced);
  EXPECT_EQ(HeterodyneSetting(parse_angle("pi/3")).mode(), HeterodyneMode::custom);
  EXPECT_EQ(HeterodyneSetting::balanced().complement().mode(), HeterodyneMode::unbalanced);
  EXPECT_EQ(HeterodyneSetting::unbalanced().complement().mode(), HeterodyneMode::balanced);
  EXPECT_EQ(HeterodyneSetting(parse_angle("pi/3")).complement().zeta().text(), "pi/3");
}

TEST(RunDensityMatrix, NoiselessMatchesStatevectorOnAllProtocolCircuits) {
  for (const auto& [name, c] : protocol_circuits()) {
    const ComplexMatrix expected = run_statevector(c).projector();
    const DensityMatrix rho = run_density_matrix(c);
    EXPECT_LE(max_abs(rho.matrix() - expected), 1e-10) << name;
    EXPECT_NEAR(rho.purity(), 1.0, 1e-10) << name;
  }
}

TEST(RunDensityMatrix, FullDepolarizingGivesMaximallyMixed) {
  Circuit c(1);
  c.add(Gate::h(0));
  const DensityMatrix rho = run_density_matrix(c, {1.0, 0.0, 0.0});
  EXPECT_LE(max_abs(rho.matrix() - DensityMatrix::maximally_mixed(1).matrix()), 1e-15);
}

TEST(RunDensityMatrix, NoiseMatchesKrausSum) {
  const Circuit fig = protocol1_circuit(CoreState::default_superposition(), HeterodyneSetting::unbalanced());
  const NoiseModel light{0.05, 0.0, 0.0};
  const DensityMatrix rho = run_density_matrix(fig, light);
  EXPECT_LT(rho.purity(), 1.0 - 1e-3);
  EXPECT_LE(max_abs(rho.matrix() - kraus_reference(fig, light)), 1e-12);

  const NoiseModel both{0.07, 0.11, 0.0};
  for (const auto& [name, c] : protocol_circuits()) {
    if (c.num_qubits() > 3) continue;  // Kronecker reference gets slow
    EXPECT_LE(max_abs(run_density_matrix(c, both).matrix() - kraus_reference(c, both)), 1e-12) << name;
  }
}

TEST(RunDensityMatrix, ChannelIsTraceAndPositivityPreserving) {
  for (double p : {0.0, 0.1, 0.37, 0.5, 0.9, 1.0}) {
    for (const auto& [name, c] : protocol_circuits()) {
      if (name.rfind("protocol", 0) != 0) continue;
      const DensityMatrix rho = run_density_matrix(c, {p, p, 0.0});
      EXPECT_NEAR(rho.trace(), 1.0, 1e-12) << name << " p=" << p;
      EXPECT_GE(rho.min_eigenvalue(), -1e-12) << name << " p=" << p;
    }
  }
  EXPECT_THROW(run_density_matrix(Circuit(1), {1.5, 0, 0}), std::invalid_argument);
  EXPECT_THROW(run_density_matrix(Circuit(1), {0, -0.1, 0}), std::invalid_argument);
}

// ---- measurement ----

TEST(MeasureInBasis, Examples) {
  const StateVector zero = StateVector::from_bits("0");
  EXPECT_DOUBLE_EQ(measure_in_basis(zero, "Z", {0}).probability("0"), 1.0);
  const auto x = measure_in_basis(zero, "X", {0});
  EXPECT_NEAR(x.probability("0"), 0.5, 1e-15);
  EXPECT_NEAR(x.probability("1"), 0.5, 1e-15);
  const StateVector plus_i = StateVector::qubit(1.0, Complex(0, 1));
  EXPECT_NEAR(measure_in_basis(plus_i, "Y", {0}).probability("0"), 1.0, 1e-15);
  EXPECT_NEAR(measure_in_basis(DensityMatrix::from_state(plus_i), "Y", {0}).probability("0"), 1.0, 1e-15);
  EXPECT_NEAR(measure_in_basis(StateVector::qubit(1.0, 1.0), "X", {0}).probability("0"), 1.0, 1e-15);
}

TEST(MeasureInBasis, Errors) {
  const StateVector s = StateVector::from_bits("00");
  EXPECT_THROW(measure_in_basis(s, "Q", {0}), std::invalid_argument);
  EXPECT_THROW(measure_in_basis(s, "ZZ", {0}), std::invalid_argument);
  EXPECT_THROW(measure_in_basis(s, "Z", {2}), std::invalid_argument);
}

TEST(MeasureInBasis, RotationConsistencyAndBackendAgreement) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 50; ++k) {
    const StateVector s = random_state(3, rng);
    // Measuring in X equals Z measurement after an explicit Hadamard.
    const auto direct = measure_in_basis(s, "XZY", {0, 1, 2});
    StateVector rotated = apply_gate(s, Gate::h(0));
    rotated = apply_gate(apply_gate(rotated, Gate::sdg(2)), Gate::h(2));
    const auto viaz = measure_in_basis(rotated, "ZZZ", {0, 1, 2});
    EXPECT_LE(total_variation_distance(direct, viaz), 1e-12);
    const auto dm = measure_in_basis(DensityMatrix::from_state(s), "XZY", {0, 1, 2});
    EXPECT_LE(total_variation_distance(direct, dm), 1e-12);
    // Subset order follows the qubit list.
    const auto sub = measure_in_basis(s, "ZX", {2, 0});
    EXPECT_EQ(sub.outcomes().size(), 4U);
  }
}

TEST(SampleShots, Examples) {
  const ProbabilityDistribution certain({"0", "1"}, {1.0, 0.0});
  const ShotTable t = sample_shots(certain, 100, 1);
  EXPECT_EQ(t.count("0"), 100U);
  EXPECT_EQ(t.shots(), 100U);

  const ProbabilityDistribution fair({"0", "1"}, {0.5, 0.5});
  // 99% two-sided binomial interval at 1e6 shots is +/- 2.576 * 0.0005.
  for (std::uint64_t seed : {0ULL, 1ULL, 2ULL, 3ULL, 4ULL}) {
    const ShotTable big = sample_shots(fair, 1000000, seed);
    EXPECT_NEAR(static_cast<double>(big.count("0")) / 1e6, 0.5, 0.002);
  }

  EXPECT_EQ(sample_shots(fair, 1000, 42), sample_shots(fair, 1000, 42));
  EXPECT_NE(sample_shots(fair, 1000, 42), sample_shots(fair, 1000, 43));
  EXPECT_THROW(sample_shots(fair, 0, 1), std::invalid_argument);
  EXPECT_THROW(sample_shots(fair, 10, 1, 1.5), std::invalid_argument);
}

TEST(SampleShots, ReadoutFlips) {
  const ProbabilityDistribution zeros({"00", "01", "10", "11"}, {1.0, 0.0, 0.0, 0.0});
  const ShotTable all = sample_shots(zeros, 1000, 3, 1.0);
  EXPECT_EQ(all.count("11"), 1000U);
  const ShotTable some = sample_shots(zeros, 200000, 3, 0.1);
  EXPECT_NEAR(static_cast<double>(some.count("00")) / 200000.0, 0.81, 0.005);
  EXPECT_NEAR(static_cast<double>(some.count("11")) / 200000.0, 0.01, 0.002);
}

TEST(SampleShots, ConvergesOnProtocolCircuits) {
  std::uint64_t stream = 0;
  for (const auto& [name, c] : protocol_circuits()) {
    if (name.rfind("protocol", 0) != 0) continue;
    const DensityMatrix rho = run_density_matrix(c);
    std::vector<std::size_t> all(c.num_qubits());
    for (std::size_t q = 0; q < all.size(); ++q) all[q] = q;
    const auto exact = measure_in_basis(rho, std::string(all.size(), 'Z'), all);
    const auto table = sample_shots(exact, 1000000, derive_seed(99, stream++));
    EXPECT_LE(total_variation_distance(empirical_distribution(table, exact), exact), 0.005) << name;
  }
}

TEST(ShotTable, ValidatesAndRoundTrips) {
  EXPECT_THROW(ShotTable("Z", {{"0", 3}}, 4), std::invalid_argument);
  EXPECT_THROW(ShotTable("ZZ", {{"0", 4}}, 4), std::invalid_argument);
  EXPECT_THROW(ShotTable("Z", {{"2", 4}}, 4), std::invalid_argument);

  const Circuit c = protocol2_circuit(parse_core_states("1100", 4), HeterodyneSetting::unbalanced());
  const auto tables = collect_shot_tables(c, {0, 1, 2, 3}, 500, 5);
  EXPECT_EQ(tables.size(), 81U);
  EXPECT_EQ(shot_tables_from_csv(shot_tables_to_csv(tables)), tables);
  for (const ShotTable& t : tables) EXPECT_EQ(shot_table_from_json(to_json(t)), t);
  EXPECT_THROW(shot_tables_from_csv("setting,bitstring,count\nZ,0,abc\n"), std::invalid_argument);
  EXPECT_THROW(shot_tables_from_csv("setting,bitstring,count\nQ,0,1\n"), std::invalid_argument);
}

TEST(CircuitJson, RoundTripAndStrictness) {
  for (const auto& [name, c] : protocol_circuits()) EXPECT_EQ(circuit_from_json(to_json(c)), c) << name;

  const auto j = nlohmann::json::parse(
      R"({"num_qubits": 2, "ancilla": 1, "gates": [{"kind": "x", "qubits": [1]},
          {"kind": "cu3", "qubits": [1, 0], "angles": ["pi/2", 0, 0]}]})");
  const Circuit c = circuit_from_json(j);
  EXPECT_EQ(c.gates()[1], Gate::cu3(1, 0, kPi / 2, 0, 0));
  EXPECT_EQ(*c.ancilla(), 1U);

  auto bad = j;
  bad["colour"] = "red";
  EXPECT_THROW(circuit_from_json(bad), std::invalid_argument);
  auto bad_gate = j;
  bad_gate["gates"][0]["kind"] = "toffoli";
  EXPECT_THROW(circuit_from_json(bad_gate), std::invalid_argument);
}

TEST(Seeds, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(0, 0), derive_seed(0, 1));
  EXPECT_NE(derive_seed(0, 0), derive_seed(1, 0));
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}
