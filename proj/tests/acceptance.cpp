// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include "hetver/cli.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <sstream>

using namespace hetver;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void verdict(int id, bool ok, const std::string& what) {
  std::printf("%s [%d] %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

SamplingOptions exact() {
  SamplingOptions o;
  o.shots = std::nullopt;
  return o;
}

SamplingOptions sampled(std::uint64_t seed) {
  SamplingOptions o;
  o.seed = seed;
  return o;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<std::size_t> system_qubits(const Circuit& c) {
  std::vector<std::size_t> out;
  for (std::size_t q = 0; q < c.num_qubits(); ++q)
    if (!c.ancilla() || *c.ancilla() != q) out.push_back(q);
  return out;
}

void print_table(const char* title, const QkdTable& got, const QkdTable* ref) {
  std::printf("    %s\n", title);
  std::printf("    %-9s", "pair");
  for (const auto& c : got.columns) std::printf(" %22s", c.c_str());
  std::printf("\n");
  for (const QkdRow& r : got.rows) {
    std::printf("    %-9s", r.pair.c_str());
    for (const auto& c : got.columns) {
      if (ref) {
        std::printf("   %9.4f (ref %7.4f)", r.values.at(c), ref->at(r.pair, c));
      } else {
        std::printf(" %22.4f", r.values.at(c));
      }
    }
    std::printf("\n");
  }
}

/// Largest |sampled - reference| over comparable cells; suspect cells are
/// listed instead of compared.
double worst_gap(const QkdTable& got, const QkdTable& ref, int initial, std::vector<std::string>& skipped) {
  double worst = 0.0;
  for (const QkdRow& r : got.rows)
    for (const auto& c : got.columns) {
      if (got.kind == "single" && reference::simulator_cell_is_suspect(initial, r.pair, c)) {
        skipped.push_back(std::to_string(initial) + ":" + r.pair + "@" + c);
        continue;
      }
      worst = std::max(worst, std::abs(r.values.at(c) - ref.at(r.pair, c)));
    }
  return worst;
}

double worst_exact_gap(const QkdTable& got, const QkdTable& ref) {
  double worst = 0.0;
  for (const QkdRow& r : got.rows)
    for (const auto& c : got.columns) worst = std::max(worst, std::abs(r.values.at(c) - ref.at(r.pair, c)));
  return worst;
}

// ---------------------------------------------------------------------------

void criterion1() {
  const std::string pi3 = "zeta=pi/3";
  bool ok = true;
  std::ostringstream why;
  for (int init = 0; init < 2; ++init) {
    const QkdTable e = qkd_table(init, default_qkd_modes(), exact());
    for (const QkdRow& r : e.rows) {
      const bool matched = r.pair[0] == r.pair[2];
      const bool far = r.pair == "z-x" || r.pair == "z-y" || r.pair == "x-z";
      const double want3 = matched ? std::sqrt(0.75) : far ? (std::sqrt(3.0) - 1.0) / (2.0 * std::sqrt(2.0)) : std::sqrt(0.5);
      const double want_simple = matched ? 1.0 : std::sqrt(0.5);
      if (std::abs(r.values.at(pi3) - want3) > 1e-9 || std::abs(r.values.at("simple") - want_simple) > 1e-9) {
        ok = false;
        why << " exact " << init << ":" << r.pair;
      }
    }
  }
  const auto t0 = Clock::now();
  const QkdTable s0 = qkd_table(0, default_qkd_modes(), sampled(2024));
  const QkdTable s1 = qkd_table(1, default_qkd_modes(), sampled(2025));
  const double runtime = seconds_since(t0);
  std::vector<std::string> skipped;
  const double gap0 = worst_gap(s0, reference::simulator_single_table(0), 0, skipped);
  const double gap1 = worst_gap(s1, reference::simulator_single_table(1), 1, skipped);
  const double exact_gap = std::max(worst_exact_gap(s0, qkd_table(0, default_qkd_modes(), exact())),
                                    worst_exact_gap(s1, qkd_table(1, default_qkd_modes(), exact())));
  print_table("single-qubit table, initial |0>, 8192 shots, seed 2024", s0, nullptr);
  print_table("published simulator values, initial |0>", reference::simulator_single_table(0), nullptr);
  std::printf("    max |sampled - published|: |0> %.4f, |1> %.4f; max |sampled - exact| %.4f; runtime %.2f s\n", gap0,
              gap1, exact_gap, runtime);
  std::printf("    not compared (published 1, exact 0):");
  for (const auto& s : skipped) std::printf(" %s", s.c_str());
  std::printf("\n");
  ok = ok && gap0 <= 0.02 && gap1 <= 0.02 && runtime < 5.0;
  verdict(1, ok,
          "single-qubit QKD tables: exact 0.8660/0.2588/1/0.7071 classes" + why.str() + "; 8192-shot run within " +
              fmt("%.4f", std::max(gap0, gap1)) + " of published simulator columns (tol 0.02), " + fmt("%.2f s", runtime) +
              " (< 5 s)");
}

void criterion2() {
  const QkdTable e = qkd_bell_table(default_qkd_modes(), exact());
  const double pi3[] = {0.75, std::sqrt(3.0 / 16.0), std::sqrt(3.0 / 16.0), 0.25};
  const double simple[] = {1.0, 0.0, 0.0, 0.0};
  bool exact_ok = true;
  for (std::size_t i = 0; i < 4; ++i) {
    exact_ok = exact_ok && std::abs(e.rows[i].values.at("zeta=pi/3") - pi3[i]) <= 1e-9;
    exact_ok = exact_ok && std::abs(e.rows[i].values.at("simple") - simple[i]) <= 1e-9;
  }
  const auto t0 = Clock::now();
  const QkdTable s = qkd_bell_table(default_qkd_modes(), sampled(2026));
  const double runtime = seconds_since(t0);
  std::vector<std::string> skipped;
  const double gap = worst_gap(s, reference::simulator_bell_table(), 0, skipped);
  const QkdTable published = reference::simulator_bell_table();
  print_table("Bell table, 8192 shots, seed 2026, beside published simulator values", s, &published);
  verdict(2, exact_ok && gap <= 0.02 && runtime < 10.0,
          std::string("Bell QKD table: exact (0.75, 0.4330, 0.4330, 0.25) and (1, 0, 0, 0) ") + (exact_ok ? "match" : "MISMATCH") +
              "; 8192-shot run within " + fmt("%.4f", gap) + " of published values (tol 0.02), " + fmt("%.2f s", runtime) +
              " (< 10 s)");
}

void criterion3() {
  auto gap = [](const QkdTable& t, const std::string& col) {
    double lo = 2.0, hi = -1.0;
    for (const QkdRow& r : t.rows) {
      if (r.pair[0] == r.pair[2]) lo = std::min(lo, r.values.at(col));
      if (r.pair == "z-x" || r.pair == "z-y" || r.pair == "x-z") hi = std::max(hi, r.values.at(col));
    }
    return lo - hi;
  };
  const QkdTable e = qkd_table(0, default_qkd_modes(), exact());
  const QkdTable s = qkd_table(0, default_qkd_modes(), sampled(2024));
  const double g3 = gap(e, "zeta=pi/3"), gs = gap(e, "simple");
  const double s3 = gap(s, "zeta=pi/3"), ss = gap(s, "simple");
  const bool ok = g3 >= 1.9 * gs && std::abs(s3 - g3) <= 0.05 && std::abs(ss - gs) <= 0.05;
  verdict(3, ok,
          "separation: exact zeta=pi/3 gap " + fmt("%.4f", g3) + " vs simple gap " + fmt("%.4f", gs) + " (ratio " +
              fmt("%.3f", g3 / gs) + " >= 1.9); 8192-shot gaps " + fmt("%.4f", s3) + " / " + fmt("%.4f", ss) +
              " within 0.05");
}

void criterion4() {
  const auto c = bound_check(0.6918, 0.3722, 0.1514);
  auto four = [](double a, double b) { return std::abs(a - b) < 5e-5; };
  bool ok = c.size() == 2 && c[0].holds && c[1].holds;
  ok = ok && four(c[0].lhs, 0.3082) && four(c[0].mid, 0.3722) && four(c[0].rhs, 0.7221);
  ok = ok && four(c[1].lhs, 0.1514) && four(c[1].mid, 0.3722);
  // sqrt(0.3082) = 0.555158 is printed truncated as 0.5551.
  ok = ok && std::abs(c[1].rhs - 0.5551) <= 1e-4;
  char buf[200];
  std::snprintf(buf, sizeof buf, "inequality chains: %.4f < %.4f < %.4f and %.4f < %.4f < %.6f (published upper 0.5551, |delta| %.1e)",
                c[0].lhs, c[0].mid, c[0].rhs, c[1].lhs, c[1].mid, c[1].rhs, std::abs(c[1].rhs - 0.5551));
  verdict(4, ok, buf);
}

void criterion5() {
  double worst_f = 0.0, worst_w = 0.0;
  auto track = [&](const ProtocolReport& r) {
    for (const GroupSummary& g : r.groups) {
      worst_f = std::max(worst_f, std::abs(g.global_fidelity - 1.0));
      worst_w = std::max(worst_w, std::abs(g.witness - 1.0));
    }
    for (double f : r.copy_fidelities) worst_f = std::max(worst_f, std::abs(f - 1.0));
  };
  bool accepts = true;
  for (const auto& s : {HeterodyneSetting::balanced(), HeterodyneSetting::unbalanced()}) {
    track(protocol1_run(CoreState::photon(), s, {}, exact()));
    track(protocol1_run(CoreState::default_superposition(), s, {}, exact()));
    track(protocol2_run(parse_core_states("1100", 4), s, {1, 1, 2}, exact(), WitnessTargets::ideal));
    track(protocol2_run(parse_core_states("u3(pi/3,0,0);u3(pi/2,pi/2,pi/2);u3(pi/4,pi/4,0);u3(2*pi/3,0,pi/2)", 4, false), s,
                        {1, 1, 2}, exact(), WitnessTargets::ideal));
    const ProtocolReport p3 =
        protocol3_verify(2, 4, {InterferometerAngles{}}, s, 0.6, {1, 1, 2}, exact(), WitnessTargets::ideal);
    track(p3);
    accepts = accepts && p3.verdict == Verdict::accept;
  }
  const auto dir = std::filesystem::temp_directory_path() / "hetver_acceptance";
  std::ostringstream out, err;
  const int clean = run_cli({"protocol3", "--shots", "exact", "--output-dir", dir.string()}, out, err);
  const int noisy = run_cli({"protocol3", "--shots", "exact", "--depolarizing", "0.3", "--output-dir", dir.string()}, out, err);
  const auto doc = nlohmann::json::parse(read_file((dir / "protocol3.json").string()));
  const double noisy_f = doc["report"]["global_fidelity"].get<double>();
  std::filesystem::remove_all(dir);
  const bool ok = worst_f <= 1e-9 && worst_w <= 1e-9 && accepts && clean == 0 && noisy == 2 && noisy_f < 0.6;
  verdict(5, ok,
          "noiseless protocols: max |F-1| " + fmt("%.1e", worst_f) + ", max |W-1| " + fmt("%.1e", worst_w) +
              (accepts ? ", Protocol 3 accepts at 0.6" : ", Protocol 3 did NOT accept") + "; depolarizing 0.3 gives F " +
              fmt("%.4f", noisy_f) + ", exit codes " + std::to_string(clean) + "/" + std::to_string(noisy) + " (want 0/2)");
}

void criterion6() {
  const ProtocolReport r =
      protocol3_verify(2, 4, {InterferometerAngles{}}, HeterodyneSetting::unbalanced(), 0.6, {1, 1, 2}, exact());
  double worst = 0.0;
  for (double f : r.groups[0].reduced_fidelities) worst = std::max(worst, std::abs(f - std::sqrt(0.5)));
  const double want = 1.0 - 4.0 * (1.0 - std::sqrt(0.5));
  const bool ok = worst <= 1e-6 && std::abs(r.witness - want) <= 1e-6 && std::abs(r.witness + 0.1716) <= 1e-4;
  verdict(6, ok,
          "Protocol 3 against Fock targets: reduced fidelities within " + fmt("%.1e", worst) + " of 0.707107, witness " +
              fmt("%.6f", r.witness) + " (derived " + fmt("%.6f", want) + ")");
}

void criterion7() {
  double worst_exact = 0.0;
  std::string worst_name;
  const auto circuits = testing::protocol_circuits();
  for (const auto& [name, c] : circuits) {
    const auto q = system_qubits(c);
    const DensityMatrix rho = reconstruct_multi_qubit(tomography_sweep(c, q, std::nullopt, 0));
    const double d = trace_distance(rho, measured_state(c, q));
    if (d > worst_exact) {
      worst_exact = d;
      worst_name = name;
    }
  }
  double worst_raw = 0.0, worst_projected = 0.0;
  std::string raw_name, projected_name;
  for (const auto& [name, c] : circuits) {
    const auto q = system_qubits(c);
    const DensityMatrix target = measured_state(c, q);
    std::vector<double> raw, projected;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const DensityMatrix rho = reconstruct_multi_qubit(tomography_sweep(c, q, 8192, derive_seed(7000, seed)));
      raw.push_back(trace_distance(rho, target));
      projected.push_back(trace_distance(project_to_physical(rho), target));
    }
    const double mr = median(raw), mp = median(projected);
    if (mr > worst_raw) worst_raw = mr, raw_name = name;
    if (mp > worst_projected) worst_projected = mp, projected_name = name;
  }
  std::printf("    %zu circuits; worst exact-path trace distance %.2e (%s)\n", circuits.size(), worst_exact, worst_name.c_str());
  std::printf("    worst 20-seed median at 8192 shots: raw linear inversion %.4f (%s), projected %.4f (%s)\n", worst_raw,
              raw_name.c_str(), worst_projected, projected_name.c_str());
  verdict(7, worst_exact <= 1e-10 && worst_projected <= 0.05,
          "tomography: exact reconstruction within " + fmt("%.1e", worst_exact) + " (tol 1e-10); 8192-shot median trace distance " +
              fmt("%.4f", worst_projected) + " after physical projection (tol 0.05; raw inversion " + fmt("%.4f", worst_raw) + ")");
}

void criterion8() {
  std::mt19937_64 rng(8080);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0, cases = 0, positive = 0;
  double closest = -1e9;
  for (int k = 0; k < 600; ++k) {
    std::vector<StateVector> factors;
    ComplexVector v = ComplexVector::Ones(1);
    for (int q = 0; q < 4; ++q) {
      factors.push_back(testing::random_state(1, rng));
      v = kron(v, factors.back().amplitudes());
    }
    const DensityMatrix target = DensityMatrix::from_state(StateVector(v));
    DensityMatrix rho = testing::random_density(4, 1 + static_cast<std::size_t>(k) % 4, rng);
    if (k % 2 == 1) {
      // Half the cases sit close to the target so the witness is informative.
      const double keep = 0.7 + 0.3 * u(rng);
      rho = DensityMatrix(keep * target.matrix() + (1.0 - keep) * rho.matrix());
    }
    const double w = fidelity_witness(reduced_fidelities(rho, factors));
    const double f = fidelity(rho, target);
    ++cases;
    if (w > 0) ++positive;
    closest = std::max(closest, w - f);
    if (w > f + 1e-8) ++violations;
  }
  verdict(8, cases >= 500 && violations == 0,
          "witness lower bound: " + std::to_string(violations) + " violations of W <= F + 1e-8 over " + std::to_string(cases) +
              " random 4-qubit instances (" + std::to_string(positive) + " with W > 0; max W - F " + fmt("%.4f", closest) + ")");
}

void criterion9() {
  struct Row {
    const char* key;
    double simulated;
  };
  SamplingOptions o = sampled(9);
  const ProtocolReport p1 = protocol1_run(CoreState::photon(), HeterodyneSetting::balanced(), {}, o);
  const ProtocolReport p2 = protocol2_run(parse_core_states("1100", 4), HeterodyneSetting::unbalanced(), {1, 1, 2}, o, WitnessTargets::input);
  const ProtocolReport p3 = protocol3_verify(2, 4, {InterferometerAngles{}}, HeterodyneSetting::unbalanced(), 0.6, {1, 1, 2}, o);
  const Row rows[] = {{"protocol1.photon.zeta0.N.mean", p1.groups[0].mean},
                      {"protocol1.photon.zeta0.N.std", p1.groups[0].std},
                      {"protocol2.1100.zeta_pi/2.fidelity", p2.global_fidelity},
                      {"protocol2.1100.zeta_pi/2.witness", p2.witness},
                      {"protocol3.zeta_pi/2.fidelity", p3.global_fidelity},
                      {"protocol3.zeta_pi/2.witness", p3.witness},
                      {"protocol3.trace_distance", p3.trace_distance},
                      {"protocol3.tvd", p3.tvd}};
  std::printf("    %-36s %10s %10s\n", "device reference (not reproduced)", "device", "simulated");
  bool ok = true;
  for (const Row& r : rows) {
    const auto& ref = reference::scalar(r.key);
    ok = ok && ref.backend == "hardware";
    std::printf("    %-36s %10.4f %10.4f\n", r.key, ref.value, r.simulated);
  }
  const bool tables = reference::hardware_single_table(0).rows.size() == 9 && reference::hardware_single_table(1).rows.size() == 9 &&
                      reference::hardware_bell_table().rows.size() == 4;
  verdict(9, ok && tables && reference::scalars().size() >= 30,
          "device columns shipped as reference fixtures only (" + std::to_string(reference::scalars().size()) +
              " scalars, 3 tables), shown beside simulation; criteria 5-8 stand in for them");
}

void criterion10(Clock::time_point suite_start) {
  const Circuit c = protocol3_circuit(2, 4, {InterferometerAngles{}}, HeterodyneSetting::unbalanced());
  const auto q = system_qubits(c);
  double best = 1e9, worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    const auto t0 = Clock::now();
    (void)tomography_sweep(c, q, 8192, derive_seed(10, static_cast<std::uint64_t>(k)));
    const double t = seconds_since(t0);
    best = std::min(best, t);
    worst = std::max(worst, t);
  }
  const double total = seconds_since(suite_start);
  verdict(10, worst < 2.0 && total < 120.0,
          "performance: 81-setting 8192-shot sweep of a 5-qubit circuit in " + fmt("%.3f s", worst) + " (best " +
              fmt("%.3f s", best) + ", limit 2 s); whole suite " + fmt("%.1f s", total) + " (limit 120 s)");
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const std::pair<int, void (*)()> steps[] = {{1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
                                              {5, criterion5}, {6, criterion6}, {7, criterion7}, {8, criterion8},
                                              {9, criterion9}};
  for (const auto& [id, fn] : steps) {
    try {
      fn();
    } catch (const std::exception& e) {
      verdict(id, false, std::string("threw: ") + e.what());
    }
  }
  criterion10(start);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
