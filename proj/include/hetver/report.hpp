#pragma once

#include "hetver/qkd.hpp"
#include "hetver/reference.hpp"

#include <json.hpp>

#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace hetver {

inline constexpr const char* kVersion = "1.0.0";

/// Usage errors: bad flags, bad values, malformed config files.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = {"protocol1", "protocol2", "protocol3", "qkd-single", "qkd-bell",
                                                 "tomography"};
  return names;
}

struct ExperimentConfig {
  std::string command;
  std::string initial;
  Angle zeta;
  CopyPlan plan;
  std::optional<std::uint64_t> shots = 8192;  // nullopt: exact expectations
  std::uint64_t seed = 0;
  NoiseModel noise;
  std::optional<double> threshold;
  bool project = false;
  AncillaHandling ancilla = AncillaHandling::postselect;
  WitnessTargets witness_targets = WitnessTargets::ideal;
  std::size_t photons = 2;
  std::size_t modes = 4;
  std::array<Angle, 3> interferometer = {Angle::pi_fraction(1, 2), Angle::pi_fraction(1, 2), Angle::pi_fraction(1, 2)};
  std::vector<std::string> qkd_modes;
  std::string circuit_path;
  std::vector<std::size_t> measured;  // empty: every non-ancilla qubit
  std::string replay_path;
  std::string export_shots_path;
  std::string output_dir = ".";
  std::string prefix;
  bool reference = false;
};

/// Command defaults; unknown commands are a ConfigError.
inline ExperimentConfig default_config(const std::string& command) {
  ExperimentConfig c;
  c.command = command;
  c.prefix = command;
  if (command == "protocol1") {
    c.initial = "1";
  } else if (command == "protocol2") {
    c.initial = "1100";
  } else if (command == "protocol3") {
    c.plan = {1, 1, 2};
    c.threshold = 0.6;
    c.witness_targets = WitnessTargets::input;
  } else if (command == "qkd-single") {
    c.initial = "0";
    for (const QkdMode& m : default_qkd_modes()) c.qkd_modes.push_back(m.label());
  } else if (command == "qkd-bell") {
    for (const QkdMode& m : default_qkd_modes()) c.qkd_modes.push_back(m.label());
  } else if (command != "tomography") {
    throw ConfigError("unknown command '" + command + "' (expected protocol1, protocol2, protocol3, qkd-single, qkd-bell or tomography)");
  }
  return c;
}

namespace detail {

/// Config keys each command understands.
inline std::set<std::string> allowed_keys(const std::string& command) {
  std::set<std::string> keys = {"command", "shots", "seed", "noise", "project", "output_dir", "prefix"};
  auto add = [&keys](std::initializer_list<const char*> more) {
    for (const char* k : more) keys.insert(k);
  };
  if (command == "protocol1" || command == "protocol2" || command == "protocol3") {
    add({"zeta", "copies", "cutoff", "threshold", "ancilla", "reference"});
  }
  if (command == "protocol1") add({"initial"});
  if (command == "protocol2") add({"initial", "witness_targets"});
  if (command == "protocol3") add({"photons", "modes", "interferometer", "witness_targets"});
  if (command == "qkd-single") add({"initial", "qkd_modes", "threshold", "reference", "ancilla"});
  if (command == "qkd-bell") add({"qkd_modes", "threshold", "reference", "ancilla"});
  if (command == "tomography") add({"circuit", "measured", "replay", "export_shots", "ancilla"});
  return keys;
}

inline Angle angle_from_json(const nlohmann::json& j, const std::string& key) {
  if (j.is_string()) return parse_angle(j.get<std::string>());
  if (j.is_number()) {
    const double v = j.get<double>();
    return v == 0.0 ? Angle::pi_fraction(0, 1) : Angle::radians(v);
  }
  throw ConfigError("config: '" + key + "' must be an angle string or number");
}

}  // namespace detail

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["command"] = c.command;
  j["shots"] = c.shots ? nlohmann::json(*c.shots) : nlohmann::json("exact");
  j["seed"] = c.seed;
  j["noise"] = {{"depolarizing_1q", c.noise.depolarizing_prob_1q},
                {"depolarizing_2q", c.noise.depolarizing_prob_2q},
                {"readout_flip", c.noise.readout_flip_prob}};
  j["project"] = c.project;
  j["output_dir"] = c.output_dir;
  j["prefix"] = c.prefix;
  const auto keys = detail::allowed_keys(c.command);
  auto put = [&](const char* key, nlohmann::json v) {
    if (keys.contains(key)) j[key] = std::move(v);
  };
  put("initial", c.initial);
  put("zeta", c.zeta.text());
  put("copies", {c.plan.n, c.plan.m});
  put("cutoff", c.plan.cutoff);
  put("threshold", c.threshold ? nlohmann::json(*c.threshold) : nlohmann::json(nullptr));
  put("ancilla", to_string(c.ancilla));
  put("witness_targets", to_string(c.witness_targets));
  put("photons", c.photons);
  put("modes", c.modes);
  put("interferometer", {c.interferometer[0].text(), c.interferometer[1].text(), c.interferometer[2].text()});
  put("qkd_modes", c.qkd_modes);
  put("circuit", c.circuit_path);
  put("measured", c.measured);
  put("replay", c.replay_path);
  put("export_shots", c.export_shots_path);
  put("reference", c.reference);
  return j;
}

/// Reads a config document; unknown keys and wrong types are ConfigErrors.
inline ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& command_hint = {}) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  std::string command = command_hint;
  if (j.contains("command")) {
    const std::string named = j.at("command").get<std::string>();
    if (!command.empty() && named != command) {
      throw ConfigError("config: file is for '" + named + "' but command '" + command + "' was requested");
    }
    command = named;
  }
  if (command.empty()) throw ConfigError("config: no command given");
  ExperimentConfig c = default_config(command);
  const auto keys = detail::allowed_keys(command);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!keys.contains(it.key())) throw ConfigError("config: unknown key '" + it.key() + "' for " + command);
  }
  try {
    if (j.contains("initial")) c.initial = j["initial"].get<std::string>();
    if (j.contains("zeta")) c.zeta = detail::angle_from_json(j["zeta"], "zeta");
    if (j.contains("copies")) {
      const auto v = j["copies"].get<std::vector<long long>>();
      if (v.size() != 2) throw ConfigError("config: 'copies' must be [N, M]");
      if (v[0] < 1) throw ConfigError("config: N >= 1 required");
      if (v[1] < 1) throw ConfigError("config: M >= 1 required");
      c.plan.n = static_cast<std::size_t>(v[0]);
      c.plan.m = static_cast<std::size_t>(v[1]);
    }
    if (j.contains("cutoff")) c.plan.cutoff = j["cutoff"].get<std::size_t>();
    if (j.contains("shots")) {
      if (j["shots"].is_string()) {
        if (j["shots"].get<std::string>() != "exact") throw ConfigError("config: 'shots' must be a count or \"exact\"");
        c.shots.reset();
      } else {
        const auto s = j["shots"].get<long long>();
        if (s < 1) throw ConfigError("config: shots must be >= 1");
        c.shots = static_cast<std::uint64_t>(s);
      }
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("noise")) {
      const auto& n = j["noise"];
      for (auto it = n.begin(); it != n.end(); ++it) {
        if (it.key() != "depolarizing_1q" && it.key() != "depolarizing_2q" && it.key() != "readout_flip") {
          throw ConfigError("config: unknown noise key '" + it.key() + "'");
        }
      }
      c.noise.depolarizing_prob_1q = n.value("depolarizing_1q", 0.0);
      c.noise.depolarizing_prob_2q = n.value("depolarizing_2q", 0.0);
      c.noise.readout_flip_prob = n.value("readout_flip", 0.0);
    }
    if (j.contains("threshold")) {
      if (j["threshold"].is_null()) {
        c.threshold.reset();
      } else {
        c.threshold = j["threshold"].get<double>();
      }
    }
    if (j.contains("project")) c.project = j["project"].get<bool>();
    if (j.contains("ancilla")) c.ancilla = parse_ancilla_handling(j["ancilla"].get<std::string>());
    if (j.contains("witness_targets")) c.witness_targets = parse_witness_targets(j["witness_targets"].get<std::string>());
    if (j.contains("photons")) c.photons = j["photons"].get<std::size_t>();
    if (j.contains("modes")) c.modes = j["modes"].get<std::size_t>();
    if (j.contains("interferometer")) {
      const auto& a = j["interferometer"];
      if (!a.is_array() || a.size() != 3) throw ConfigError("config: 'interferometer' must be [theta, phi, lambda]");
      for (std::size_t i = 0; i < 3; ++i) c.interferometer[i] = detail::angle_from_json(a[i], "interferometer");
    }
    if (j.contains("qkd_modes")) c.qkd_modes = j["qkd_modes"].get<std::vector<std::string>>();
    if (j.contains("circuit")) c.circuit_path = j["circuit"].get<std::string>();
    if (j.contains("measured")) c.measured = j["measured"].get<std::vector<std::size_t>>();
    if (j.contains("replay")) c.replay_path = j["replay"].get<std::string>();
    if (j.contains("export_shots")) c.export_shots_path = j["export_shots"].get<std::string>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("prefix")) c.prefix = j["prefix"].get<std::string>();
    if (j.contains("reference")) c.reference = j["reference"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

inline ExperimentConfig load_config_file(const std::string& path, const std::string& command_hint = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j, command_hint);
}

/// Every check that can fail before a simulation starts.
inline void validate_config(const ExperimentConfig& c) {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  try {
    default_config(c.command);
    c.noise.validate();
    c.plan.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (c.shots && *c.shots < 1) fail("shots must be >= 1");
  if (c.threshold && !(*c.threshold >= 0.0 && *c.threshold <= 1.0)) fail("threshold must lie in [0, 1]");
  if (c.prefix.empty() || c.prefix.find('/') != std::string::npos) fail("prefix must be a plain file name stem");
  try {
    if (c.command == "protocol1") {
      parse_core_states(c.initial, 1);
    } else if (c.command == "protocol2") {
      const std::size_t k = c.initial.find_first_not_of("01") == std::string::npos
                                ? c.initial.size()
                                : static_cast<std::size_t>(std::count(c.initial.begin(), c.initial.end(), ';')) + 1;
      if (k < 1 || k > 4) fail("protocol2: between 1 and 4 modes required");
      parse_core_states(c.initial, k, false);
    } else if (c.command == "protocol3") {
      if (c.modes < 1 || c.modes > 4) fail("protocol3: modes must be in [1, 4]");
      if (c.photons > c.modes) {
        fail("protocol3: photons (" + std::to_string(c.photons) + ") exceeds modes (" + std::to_string(c.modes) + ")");
      }
    } else if (c.command == "qkd-single" || c.command == "qkd-bell") {
      if (c.command == "qkd-single" && c.initial != "0" && c.initial != "1") fail("qkd-single: initial must be 0 or 1");
      if (c.qkd_modes.empty()) fail("qkd: no modes requested");
      std::vector<QkdMode> modes;
      for (const auto& m : c.qkd_modes) modes.push_back(parse_qkd_mode(m));
      detail::check_modes(modes);
    } else if (c.command == "tomography") {
      if (c.circuit_path.empty() && c.replay_path.empty()) fail("tomography: give --circuit or --replay");
      if (!c.replay_path.empty() && !c.export_shots_path.empty()) fail("tomography: --replay and --export-shots conflict");
      if (!c.export_shots_path.empty() && !c.shots) fail("tomography: exporting shots needs a shot count");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

/// Writes to a sibling temporary and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot move output into '" + path.string() + "'");
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// "index fidelity" rows, fixed 6 decimals, no header.
inline std::string plot_data(const std::vector<double>& series) {
  if (series.empty()) throw std::invalid_argument("emit_plot_data: empty series");
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < series.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu %.6f\n", i + 1, series[i]);
    out += buf;
  }
  return out;
}

inline void emit_plot_data(const std::vector<double>& series, const std::filesystem::path& path) {
  write_file_atomic(path, plot_data(series));
}

inline std::string protocol_report_to_csv(const ProtocolReport& r) {
  std::ostringstream out;
  out << "copy,group,zeta,fidelity,witness,trace_distance,tvd,physical\n";
  char buf[160];
  for (const CopyResult& c : r.copies) {
    const GroupSummary& g = c.group == "N" ? r.groups.at(0) : r.groups.at(1);
    std::snprintf(buf, sizeof buf, "%zu,%s,%s,%.10f,%.10f,%.10f,%.10f,%d\n", c.index, c.group.c_str(),
                  g.zeta.text().c_str(), c.fidelity, c.witness, c.trace_distance, c.tvd, c.physical ? 1 : 0);
    out << buf;
  }
  return out.str();
}

struct ReportBundle {
  nlohmann::json document;
  std::vector<std::string> files;
  std::optional<ProtocolReport> protocol;
  std::optional<QkdTable> table;
  int exit_code = 0;  // 0 success/accept, 2 reject
};

namespace detail {

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline SamplingOptions sampling(const ExperimentConfig& c) {
  SamplingOptions o;
  o.shots = c.shots;
  o.seed = c.seed;
  o.noise = c.noise;
  o.ancilla = c.ancilla;
  o.project = c.project;
  return o;
}

inline nlohmann::json scalar_references(const std::string& prefix) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : reference::scalars())
    if (s.key.rfind(prefix, 0) == 0) {
      out.push_back({{"key", s.key}, {"backend", s.backend}, {"description", s.description}, {"value", s.value}});
    }
  return out;
}

inline ProtocolReport run_protocol(const ExperimentConfig& c) {
  const HeterodyneSetting setting(c.zeta);
  const SamplingOptions opts = sampling(c);
  if (c.command == "protocol1") return protocol1_run(parse_core_states(c.initial, 1).front(), setting, c.plan, opts, c.threshold);
  if (c.command == "protocol2") {
    const std::size_t k = c.initial.find_first_not_of("01") == std::string::npos
                              ? c.initial.size()
                              : static_cast<std::size_t>(std::count(c.initial.begin(), c.initial.end(), ';')) + 1;
    return protocol2_run(parse_core_states(c.initial, k, false), setting, c.plan, opts, c.witness_targets, c.threshold);
  }
  const InterferometerAngles a{c.interferometer[0].value(), c.interferometer[1].value(), c.interferometer[2].value()};
  return protocol3_verify(c.photons, c.modes, {a}, setting, c.threshold.value_or(0.6), c.plan, opts, c.witness_targets);
}

}  // namespace detail

/// Runs a validated config and writes its outputs under output_dir.
inline ReportBundle run_and_report(const ExperimentConfig& c) {
  validate_config(c);
  ReportBundle b;
  const std::filesystem::path dir(c.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "'");
  const std::filesystem::path stem = dir / c.prefix;
  auto path_with = [&stem](const char* suffix) {
    std::filesystem::path p = stem;
    p += suffix;
    return p;
  };

  nlohmann::json doc;
  doc["config"] = to_json(c);
  doc["provenance"] = {{"version", kVersion}, {"seed", c.seed}, {"timestamp", detail::utc_timestamp()}};

  std::vector<std::pair<std::filesystem::path, std::string>> outputs;

  if (c.command.rfind("protocol", 0) == 0) {
    ProtocolReport r = detail::run_protocol(c);
    doc["report"] = to_json(r);
    if (c.reference) doc["reference"] = detail::scalar_references(c.command + ".");
    outputs.emplace_back(path_with(".csv"), protocol_report_to_csv(r));
    outputs.emplace_back(path_with(".plot.dat"), plot_data(r.copy_fidelities));
    if (r.verdict == Verdict::reject) b.exit_code = 2;
    b.protocol = std::move(r);
  } else if (c.command == "qkd-single" || c.command == "qkd-bell") {
    std::vector<QkdMode> modes;
    for (const auto& m : c.qkd_modes) modes.push_back(parse_qkd_mode(m));
    QkdTable t = c.command == "qkd-single" ? qkd_table(c.initial == "1" ? 1 : 0, modes, detail::sampling(c))
                                           : qkd_bell_table(modes, detail::sampling(c));
    doc["table"] = to_json(t);
    nlohmann::json verdicts = nlohmann::json::object();
    for (const auto& col : t.columns) {
      const std::optional<double> th = c.threshold ? c.threshold : default_qkd_threshold(t.kind, col);
      if (!th) continue;
      verdicts[col] = {{"threshold", *th}, {"verdicts", to_json(threshold_verdict(t, col, th))}};
    }
    doc["verdicts"] = verdicts;
    if (c.reference) {
      const bool single = t.kind == "single";
      const int init = single ? t.initial : 0;
      doc["reference"] = {
          {"hardware", to_json(single ? reference::hardware_single_table(init) : reference::hardware_bell_table())},
          {"simulator", to_json(single ? reference::simulator_single_table(init) : reference::simulator_bell_table())}};
    }
    outputs.emplace_back(path_with(".csv"), qkd_table_to_csv(t));
    b.table = std::move(t);
  } else {
    std::optional<Circuit> circuit;
    if (!c.circuit_path.empty()) {
      try {
        circuit = circuit_from_json(nlohmann::json::parse(read_file(c.circuit_path)));
      } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("circuit file '" + c.circuit_path + "': " + e.what());
      }
    }
    const std::vector<std::size_t> measured = !c.measured.empty() ? c.measured
                                              : circuit          ? circuit->system_qubits()
                                                                 : std::vector<std::size_t>{};
    ExpectationSet ex(1);
    if (!c.replay_path.empty()) {
      const auto tables = shot_tables_from_csv(read_file(c.replay_path));
      if (tables.empty()) throw std::runtime_error("replay file '" + c.replay_path + "' holds no shots");
      ex = expectations_from_shot_tables(tables, tables.front().setting().size());
    } else if (c.shots) {
      const auto tables = collect_shot_tables(*circuit, measured, *c.shots, c.seed, c.noise, c.ancilla);
      ex = expectations_from_shot_tables(tables, measured.size());
      if (!c.export_shots_path.empty()) outputs.emplace_back(c.export_shots_path, shot_tables_to_csv(tables));
    } else {
      ex = tomography_sweep(*circuit, measured, std::nullopt, c.seed, c.noise, c.ancilla);
    }
    DensityMatrix rho = ex.num_qubits() == 1 ? reconstruct_single_qubit(ex) : reconstruct_multi_qubit(ex);
    nlohmann::json t;
    t["measured"] = measured;
    t["expectations"] = to_json(ex);
    t["density_matrix"] = matrix_to_json(rho.matrix());
    t["physical"] = rho.physical();
    t["min_eigenvalue"] = rho.min_eigenvalue();
    if (c.project) t["projected"] = matrix_to_json(project_to_physical(rho).matrix());
    if (circuit && ex.num_qubits() == measured.size()) {
      const DensityMatrix exact = measured_state(*circuit, measured, c.noise, c.ancilla);
      t["exact_density_matrix"] = matrix_to_json(exact.matrix());
      t["trace_distance_to_exact"] = trace_distance(rho, exact);
      t["fidelity_to_exact"] = fidelity(rho, exact);
    }
    doc["tomography"] = t;
  }

  for (const auto& [path, content] : outputs) {
    write_file_atomic(path, content);
    b.files.push_back(path.string());
  }
  const std::filesystem::path json_path = path_with(".json");
  b.files.push_back(json_path.string());
  doc["files"] = b.files;
  write_file_atomic(json_path, doc.dump(2) + "\n");
  b.document = std::move(doc);
  return b;
}

}  // namespace hetver
