#pragma once

#include "hetver/report.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace hetver {

/// Thrown by parse_config when --help is given; carries the text to print.
class HelpRequested : public std::exception {
 public:
  explicit HelpRequested(std::string text) : text_(std::move(text)) {}
  [[nodiscard]] const char* what() const noexcept override { return text_.c_str(); }

 private:
  std::string text_;
};

namespace detail {

/// Raw option storage for one subcommand; only options actually given on the
/// command line override the defaults or the config file.
struct CliValues {
  std::string config;
  std::string shots;
  std::uint64_t seed = 0;
  double depolarizing = 0.0;
  double depolarizing_1q = 0.0;
  double depolarizing_2q = 0.0;
  double readout_flip = 0.0;
  bool project = false;
  std::string output_dir;
  std::string prefix;
  std::string zeta;
  std::vector<long long> copies;
  long long cutoff = 2;
  double threshold = 0.0;
  std::string ancilla;
  bool reference = false;
  std::string initial;
  std::string witness_targets;
  long long photons = 0;
  long long modes = 0;
  std::string interferometer;
  std::vector<std::string> qkd_modes;
  std::vector<std::string> zetas;
  bool simple = false;
  std::string circuit;
  std::string measured;
  std::string replay;
  std::string export_shots;
};

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t end = std::min(s.find(sep, start), s.size());
    out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

inline void add_common(CLI::App* sub, CliValues& v) {
  sub->add_option("--config", v.config, "JSON run configuration; flags given here override it");
  sub->add_option("--shots", v.shots, "shots per setting, or 'exact' for exact expectations (default 8192)");
  sub->add_option("--seed", v.seed, "random seed (default 0)");
  sub->add_option("--depolarizing", v.depolarizing, "depolarizing probability for every gate");
  sub->add_option("--depolarizing-1q", v.depolarizing_1q, "depolarizing probability after 1-qubit gates");
  sub->add_option("--depolarizing-2q", v.depolarizing_2q, "depolarizing probability after 2-qubit gates");
  sub->add_option("--readout-flip", v.readout_flip, "per-bit readout flip probability");
  sub->add_flag("--project", v.project, "project reconstructions onto physical states");
  sub->add_option("--output-dir", v.output_dir, "directory for report files (default .)");
  sub->add_option("--prefix", v.prefix, "file name stem for report files (default: command name)");
}

inline void add_protocol(CLI::App* sub, CliValues& v) {
  sub->add_option("--zeta", v.zeta, "heterodyne angle for the first N copies, e.g. pi/2 (default 0)");
  sub->add_option("--copies", v.copies, "copy counts N M")->expected(2);
  sub->add_option("--cutoff", v.cutoff, "core-state cutoff C (1 or 2)");
  sub->add_option("--threshold", v.threshold, "acceptance threshold on the global fidelity");
  sub->add_option("--ancilla", v.ancilla, "ancilla handling: postselect or trace");
  sub->add_flag("--reference", v.reference, "include device reference values in the report");
}

inline void add_qkd(CLI::App* sub, CliValues& v) {
  sub->add_option("--mode", v.qkd_modes, "table column: 'simple' or a heterodyne angle (repeatable)");
  sub->add_option("--zeta", v.zetas, "heterodyne column angle (repeatable)");
  sub->add_flag("--simple", v.simple, "add the simple-fidelity column");
  sub->add_option("--threshold", v.threshold, "verdict threshold for every column");
  sub->add_option("--ancilla", v.ancilla, "ancilla handling: postselect or trace");
  sub->add_flag("--reference", v.reference, "include published tables in the report");
}

inline bool given(CLI::App* sub, const char* name) { return sub->get_option(name)->count() > 0; }

inline bool has_option(CLI::App* sub, const char* name) {
  try {
    sub->get_option(name);
    return true;
  } catch (const CLI::OptionNotFound&) {
    return false;
  }
}

inline void apply_overrides(CLI::App* sub, const CliValues& v, ExperimentConfig& c) {
  auto on = [sub](const char* name) { return has_option(sub, name) && given(sub, name); };
  if (on("--shots")) {
    if (v.shots == "exact") {
      c.shots.reset();
    } else {
      std::size_t used = 0;
      long long s = 0;
      try {
        s = std::stoll(v.shots, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != v.shots.size() || used == 0) throw ConfigError("--shots: expected a count or 'exact', got '" + v.shots + "'");
      if (s < 1) throw ConfigError("--shots: shots must be >= 1");
      c.shots = static_cast<std::uint64_t>(s);
    }
  }
  if (on("--seed")) c.seed = v.seed;
  if (on("--depolarizing")) c.noise.depolarizing_prob_1q = c.noise.depolarizing_prob_2q = v.depolarizing;
  if (on("--depolarizing-1q")) c.noise.depolarizing_prob_1q = v.depolarizing_1q;
  if (on("--depolarizing-2q")) c.noise.depolarizing_prob_2q = v.depolarizing_2q;
  if (on("--readout-flip")) c.noise.readout_flip_prob = v.readout_flip;
  if (on("--project")) c.project = v.project;
  if (on("--output-dir")) c.output_dir = v.output_dir;
  if (on("--prefix")) c.prefix = v.prefix;
  if (on("--copies")) {
    if (v.copies[0] < 1) throw ConfigError("--copies: N >= 1 required");
    if (v.copies[1] < 1) throw ConfigError("--copies: M >= 1 required");
    c.plan.n = static_cast<std::size_t>(v.copies[0]);
    c.plan.m = static_cast<std::size_t>(v.copies[1]);
  }
  if (on("--cutoff")) {
    if (v.cutoff < 1) throw ConfigError("--cutoff: C >= 1 required");
    c.plan.cutoff = static_cast<std::size_t>(v.cutoff);
  }
  if (on("--threshold")) c.threshold = v.threshold;
  if (on("--reference")) c.reference = v.reference;
  if (on("--initial")) c.initial = v.initial;
  if (on("--photons")) {
    if (v.photons < 0) throw ConfigError("--photons must be >= 0");
    c.photons = static_cast<std::size_t>(v.photons);
  }
  if (on("--modes")) {
    if (v.modes < 1) throw ConfigError("--modes must be >= 1");
    c.modes = static_cast<std::size_t>(v.modes);
  }
  if (on("--circuit")) c.circuit_path = v.circuit;
  if (on("--replay")) c.replay_path = v.replay;
  if (on("--export-shots")) c.export_shots_path = v.export_shots;
  try {
    if (on("--zeta") && c.command.rfind("protocol", 0) == 0) c.zeta = parse_angle(v.zeta);
    if (on("--ancilla")) c.ancilla = parse_ancilla_handling(v.ancilla);
    if (on("--witness-targets")) c.witness_targets = parse_witness_targets(v.witness_targets);
    if (on("--interferometer")) {
      const auto parts = split(v.interferometer, ',');
      if (parts.size() != 3) throw ConfigError("--interferometer: expected theta,phi,lambda");
      for (std::size_t i = 0; i < 3; ++i) c.interferometer[i] = parse_angle(parts[i]);
    }
    if (on("--measured")) {
      c.measured.clear();
      for (const auto& p : split(v.measured, ',')) {
        std::size_t used = 0;
        unsigned long q = 0;
        try {
          q = std::stoul(p, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used == 0 || used != p.size()) throw ConfigError("--measured: bad qubit index '" + p + "'");
        c.measured.push_back(q);
      }
    }
    if (c.command == "qkd-single" || c.command == "qkd-bell") {
      std::vector<std::string> modes;
      if (on("--mode"))
        for (const auto& m : v.qkd_modes) modes.push_back(parse_qkd_mode(m).label());
      if (on("--zeta"))
        for (const auto& z : v.zetas) modes.push_back(QkdMode::heterodyne(parse_angle(z)).label());
      if (on("--simple")) modes.push_back(QkdMode::simple().label());
      if (!modes.empty()) c.qkd_modes = modes;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace detail

/// Parses CLI tokens (without the program name) into a validated config.
/// Throws ConfigError on any usage problem and HelpRequested for --help.
inline ExperimentConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"Heterodyne-style fidelity estimation and verification on a qubit simulator", "hetver"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::map<std::string, std::unique_ptr<detail::CliValues>> values;
  std::map<std::string, CLI::App*> subs;
  auto make = [&](const std::string& name, const std::string& about) {
    values[name] = std::make_unique<detail::CliValues>();
    CLI::App* sub = app.add_subcommand(name, about);
    detail::add_common(sub, *values[name]);
    subs[name] = sub;
    return std::pair<CLI::App*, detail::CliValues*>{sub, values[name].get()};
  };

  {
    auto [s, v] = make("protocol1", "single-mode fidelity estimation over N + M copies");
    detail::add_protocol(s, *v);
    s->add_option("--initial", v->initial, "core state: 0, 1, super or u3(theta,phi,lambda)");
  }
  {
    auto [s, v] = make("protocol2", "multi-mode fidelity witness estimation");
    detail::add_protocol(s, *v);
    s->add_option("--initial", v->initial, "bitstring like 1100, or per-mode tokens separated by ';'");
    s->add_option("--witness-targets", v->witness_targets, "per-mode targets: ideal or input");
  }
  {
    auto [s, v] = make("protocol3", "boson-sampling verification against a fidelity threshold");
    detail::add_protocol(s, *v);
    s->add_option("--photons", v->photons, "number of single photons n (default 2)");
    s->add_option("--modes", v->modes, "number of modes m (default 4, at most 4)");
    s->add_option("--interferometer", v->interferometer, "U3 angles theta,phi,lambda applied to every mode");
    s->add_option("--witness-targets", v->witness_targets, "per-mode targets: input (Fock) or ideal");
  }
  {
    auto [s, v] = make("qkd-single", "single-qubit encode/decode basis table");
    detail::add_qkd(s, *v);
    s->add_option("--initial", v->initial, "initial state 0 or 1");
  }
  {
    auto [s, v] = make("qkd-bell", "Bell-basis encode/decode table");
    detail::add_qkd(s, *v);
  }
  {
    auto [s, v] = make("tomography", "Pauli tomography of a circuit or of recorded shots");
    s->add_option("--circuit", v->circuit, "circuit JSON file");
    s->add_option("--measured", v->measured, "comma-separated measured qubits (default: all but the ancilla)");
    s->add_option("--replay", v->replay, "reconstruct from a shot CSV instead of sampling");
    s->add_option("--export-shots", v->export_shots, "write sampled shots to this CSV");
    s->add_option("--ancilla", v->ancilla, "ancilla handling: postselect or trace");
  }

  std::vector<std::string> argv_store = {"hetver"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    std::ostringstream out, err;
    app.exit(e, out, err);
    throw HelpRequested(out.str());
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();
  const detail::CliValues& v = *values[command];
  ExperimentConfig c = v.config.empty() ? default_config(command) : load_config_file(v.config, command);
  detail::apply_overrides(chosen, v, c);
  validate_config(c);
  return c;
}

namespace detail {

inline void print_summary(const ReportBundle& b, std::ostream& out) {
  char buf[256];
  if (b.protocol) {
    const ProtocolReport& r = *b.protocol;
    for (const GroupSummary& g : r.groups) {
      std::snprintf(buf, sizeof buf, "%s group %s (zeta=%s, %zu copies): F mean %.6f std %.6f, witness %.6f, D %.6f, TVD %.6f",
                    r.protocol.c_str(), g.name.c_str(), g.zeta.text().c_str(), g.copies, g.mean, g.std, g.witness,
                    g.trace_distance, g.tvd);
      out << buf;
      if (g.verdict) out << ", verdict " << to_string(*g.verdict);
      out << '\n';
    }
    for (const BoundCheck& bc : r.bound_checks) {
      std::snprintf(buf, sizeof buf, "  %s: %.4f <= %.4f <= %.4f %s\n", bc.name.c_str(), bc.lhs, bc.mid, bc.rhs,
                    bc.holds ? "holds" : "FAILS");
      out << buf;
    }
  } else if (b.table) {
    out << qkd_table_to_csv(*b.table);
  } else if (b.document.contains("tomography")) {
    const auto& t = b.document["tomography"];
    out << "tomography: physical " << (t["physical"].get<bool>() ? "yes" : "no");
    if (t.contains("trace_distance_to_exact")) {
      std::snprintf(buf, sizeof buf, ", trace distance to exact %.6g, fidelity %.6f",
                    t["trace_distance_to_exact"].get<double>(), t["fidelity_to_exact"].get<double>());
      out << buf;
    }
    out << '\n';
  }
  for (const auto& f : b.files) out << "wrote " << f << '\n';
}

}  // namespace detail

/// Exit codes: 0 success or accept, 1 usage error, 2 reject, 3 runtime failure.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  ExperimentConfig config;
  try {
    config = parse_config(args);
  } catch (const HelpRequested& h) {
    out << h.what();
    return 0;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  }
  try {
    const ReportBundle b = run_and_report(config);
    detail::print_summary(b, out);
    return b.exit_code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace hetver
