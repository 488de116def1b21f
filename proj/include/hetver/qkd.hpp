#pragma once

#include "hetver/protocols.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hetver {

// Encoding/decoding basis experiments. A state is encoded in one basis,
// decoded in another and compared with the initial state, either directly
// ("simple") or after a CU3(zeta) heterodyne stage.

enum class SingleBasis { z, x, y };

inline std::string to_string(SingleBasis b) {
  switch (b) {
    case SingleBasis::z: return "z";
    case SingleBasis::x: return "x";
    case SingleBasis::y: return "y";
  }
  return "?";
}

inline SingleBasis parse_single_basis(const std::string& s) {
  if (s == "z") return SingleBasis::z;
  if (s == "x") return SingleBasis::x;
  if (s == "y") return SingleBasis::y;
  throw std::invalid_argument("unknown basis '" + s + "' (expected x, y or z)");
}

/// Table row order.
inline const std::vector<SingleBasis>& single_bases() {
  static const std::vector<SingleBasis> order = {SingleBasis::z, SingleBasis::x, SingleBasis::y};
  return order;
}

/// z: identity, x: H, y: S*H (H first), which takes |0> to (|0> + i|1>)/sqrt2.
inline std::vector<Gate> single_encoder(SingleBasis b, std::size_t q) {
  switch (b) {
    case SingleBasis::z: return {};
    case SingleBasis::x: return {Gate::h(q)};
    case SingleBasis::y: return {Gate::h(q), Gate::s(q)};
  }
  return {};
}

/// Inverse of the encoder.
inline std::vector<Gate> single_decoder(SingleBasis b, std::size_t q) {
  switch (b) {
    case SingleBasis::z: return {};
    case SingleBasis::x: return {Gate::h(q)};
    case SingleBasis::y: return {Gate::sdg(q), Gate::h(q)};
  }
  return {};
}

enum class BellBasis { b00, b01, b10, b11 };

inline std::string to_string(BellBasis b) {
  switch (b) {
    case BellBasis::b00: return "b00";
    case BellBasis::b01: return "b01";
    case BellBasis::b10: return "b10";
    case BellBasis::b11: return "b11";
  }
  return "?";
}

inline BellBasis parse_bell_basis(const std::string& s) {
  std::string t = s;
  if (t.rfind("beta", 0) == 0) t = "b" + t.substr(4);
  if (t == "b00") return BellBasis::b00;
  if (t == "b01") return BellBasis::b01;
  if (t == "b10") return BellBasis::b10;
  if (t == "b11") return BellBasis::b11;
  throw std::invalid_argument("unknown Bell basis '" + s + "' (expected b00, b01, b10 or b11)");
}

inline const std::vector<BellBasis>& bell_bases() {
  static const std::vector<BellBasis> order = {BellBasis::b00, BellBasis::b01, BellBasis::b10, BellBasis::b11};
  return order;
}

namespace detail {

/// Z^a on qubit 0, X^b on qubit 1 for beta_ab.
inline std::vector<Gate> bell_frame(BellBasis b) {
  const auto v = static_cast<int>(b);
  std::vector<Gate> out;
  if ((v & 2) != 0) out.push_back(Gate::z(0));
  if ((v & 1) != 0) out.push_back(Gate::x(1));
  return out;
}

}  // namespace detail

/// H on qubit 0, CX, then the Pauli frame.
inline std::vector<Gate> bell_encoder(BellBasis b) {
  std::vector<Gate> out = {Gate::h(0), Gate::cx(0, 1)};
  for (const Gate& g : detail::bell_frame(b)) out.push_back(g);
  return out;
}

/// Pauli frame, CX, H: the inverse of bell_encoder (the frame gates act on
/// different qubits, so their order is immaterial).
inline std::vector<Gate> bell_decoder(BellBasis b) {
  std::vector<Gate> out = detail::bell_frame(b);
  out.push_back(Gate::cx(0, 1));
  out.push_back(Gate::h(0));
  return out;
}

/// Either simple fidelity (no heterodyne stage) or CU3(zeta) heterodyne.
class QkdMode {
 public:
  static QkdMode simple() { return QkdMode(std::nullopt); }
  static QkdMode heterodyne(Angle zeta) { return QkdMode(std::move(zeta)); }

  [[nodiscard]] bool is_simple() const { return !zeta_; }
  [[nodiscard]] const std::optional<Angle>& zeta() const { return zeta_; }

  /// Column label: "simple" or "zeta=pi/3".
  [[nodiscard]] std::string label() const { return zeta_ ? "zeta=" + zeta_->text() : "simple"; }

  friend bool operator==(const QkdMode& a, const QkdMode& b) {
    return a.zeta_.has_value() == b.zeta_.has_value() && (!a.zeta_ || a.zeta_->value() == b.zeta_->value());
  }

 private:
  explicit QkdMode(std::optional<Angle> zeta) : zeta_(std::move(zeta)) {}
  std::optional<Angle> zeta_;
};

inline QkdMode parse_qkd_mode(const std::string& s) {
  if (s == "simple") return QkdMode::simple();
  return QkdMode::heterodyne(parse_angle(s.rfind("zeta=", 0) == 0 ? s.substr(5) : s));
}

/// zeta = pi/3, zeta = pi/2, simple: the usual column order.
inline std::vector<QkdMode> default_qkd_modes() {
  return {QkdMode::heterodyne(Angle::pi_fraction(1, 3)), QkdMode::heterodyne(Angle::pi_fraction(1, 2)),
          QkdMode::simple()};
}

namespace detail {

inline Circuit finish_qkd_circuit(std::size_t system, std::vector<Gate> body, const QkdMode& mode) {
  if (mode.is_simple()) {
    Circuit c(system);
    c.add(body);
    return c;
  }
  Circuit c(system + 1, system);
  c.add(body);
  c.add(Gate::x(system));
  return heterodyne_stage(c, HeterodyneSetting(*mode.zeta()), range(system));
}

}  // namespace detail

inline Circuit qkd_single_circuit(int initial, SingleBasis encode, SingleBasis decode, const QkdMode& mode) {
  if (initial != 0 && initial != 1) throw std::invalid_argument("qkd: initial state must be |0> or |1>");
  std::vector<Gate> body;
  if (initial == 1) body.push_back(Gate::x(0));
  for (const Gate& g : single_encoder(encode, 0)) body.push_back(g);
  for (const Gate& g : single_decoder(decode, 0)) body.push_back(g);
  return detail::finish_qkd_circuit(1, std::move(body), mode);
}

/// Initial state |00>.
inline Circuit qkd_bell_circuit(BellBasis encode, BellBasis decode, const QkdMode& mode) {
  std::vector<Gate> body = bell_encoder(encode);
  for (const Gate& g : bell_decoder(decode)) body.push_back(g);
  return detail::finish_qkd_circuit(2, std::move(body), mode);
}

namespace detail {

inline double qkd_fidelity(const Circuit& c, const StateVector& initial, const SamplingOptions& opts, std::uint64_t seed) {
  opts.noise.validate();
  const auto system = range(initial.num_qubits());
  const ExpectationSet ex = tomography_sweep(c, system, opts.shots, seed, opts.noise, opts.ancilla);
  DensityMatrix rho = system.size() == 1 ? reconstruct_single_qubit(ex) : reconstruct_multi_qubit(ex);
  if (opts.project) rho = project_to_physical(rho);
  return fidelity(rho, DensityMatrix::from_state(initial));
}

}  // namespace detail

/// Fidelity of the reconstructed output against the initial state.
inline double qkd_single_run(int initial, SingleBasis encode, SingleBasis decode, const QkdMode& mode,
                             const SamplingOptions& opts = {}) {
  return detail::qkd_fidelity(qkd_single_circuit(initial, encode, decode, mode),
                              StateVector::basis(1, static_cast<std::size_t>(initial)), opts, opts.seed);
}

inline double qkd_bell_run(BellBasis encode, BellBasis decode, const QkdMode& mode, const SamplingOptions& opts = {}) {
  return detail::qkd_fidelity(qkd_bell_circuit(encode, decode, mode), StateVector::basis(2, 0), opts, opts.seed);
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

struct QkdRow {
  std::string pair;                      // "z-x" or "b00-b11"
  std::map<std::string, double> values;  // column label -> fidelity

  friend bool operator==(const QkdRow&, const QkdRow&) = default;
};

struct QkdTable {
  std::string kind;  // "single" or "bell"
  int initial = 0;
  std::vector<std::string> columns;
  std::vector<QkdRow> rows;

  [[nodiscard]] double at(const std::string& pair, const std::string& column) const {
    for (const QkdRow& r : rows)
      if (r.pair == pair) {
        auto it = r.values.find(column);
        if (it == r.values.end()) throw std::invalid_argument("qkd table: no column '" + column + "'");
        return it->second;
      }
    throw std::invalid_argument("qkd table: no row '" + pair + "'");
  }

  friend bool operator==(const QkdTable&, const QkdTable&) = default;
};

namespace detail {

inline void check_modes(const std::vector<QkdMode>& modes) {
  if (modes.empty()) throw std::invalid_argument("qkd table: no modes requested");
  for (std::size_t i = 0; i < modes.size(); ++i)
    for (std::size_t j = i + 1; j < modes.size(); ++j)
      if (modes[i] == modes[j]) throw std::invalid_argument("qkd table: duplicate mode " + modes[i].label());
}

}  // namespace detail

/// All nine encode-decode pairs for one initial state. Cell k uses the seed
/// derive_seed(seed, k), k counting rows then columns.
inline QkdTable qkd_table(int initial, const std::vector<QkdMode>& modes = default_qkd_modes(),
                          const SamplingOptions& opts = {}) {
  detail::check_modes(modes);
  QkdTable t;
  t.kind = "single";
  t.initial = initial;
  for (const QkdMode& m : modes) t.columns.push_back(m.label());
  std::uint64_t cell = 0;
  for (SingleBasis e : single_bases())
    for (SingleBasis d : single_bases()) {
      QkdRow row{to_string(e) + "-" + to_string(d), {}};
      for (const QkdMode& m : modes) {
        row.values[m.label()] =
            detail::qkd_fidelity(qkd_single_circuit(initial, e, d, m), StateVector::basis(1, static_cast<std::size_t>(initial)),
                                 opts, derive_seed(opts.seed, cell++));
      }
      t.rows.push_back(std::move(row));
    }
  return t;
}

/// beta00 encoding against each of the four Bell decoders.
inline QkdTable qkd_bell_table(const std::vector<QkdMode>& modes = default_qkd_modes(), const SamplingOptions& opts = {}) {
  detail::check_modes(modes);
  QkdTable t;
  t.kind = "bell";
  t.columns.clear();
  for (const QkdMode& m : modes) t.columns.push_back(m.label());
  std::uint64_t cell = 0;
  for (BellBasis d : bell_bases()) {
    QkdRow row{to_string(BellBasis::b00) + "-" + to_string(d), {}};
    for (const QkdMode& m : modes) {
      row.values[m.label()] = detail::qkd_fidelity(qkd_bell_circuit(BellBasis::b00, d, m), StateVector::basis(2, 0), opts,
                                                   derive_seed(opts.seed, cell++));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Default thresholds: single 0.8 (zeta = pi/3) and 0.9 (simple); Bell 0.7
/// (zeta = pi/3) and 0.25 (simple). Other columns have none.
inline std::optional<double> default_qkd_threshold(const std::string& kind, const std::string& column) {
  const bool bell = kind == "bell";
  if (column == "simple") return bell ? 0.25 : 0.9;
  if (column == "zeta=pi/3") return bell ? 0.7 : 0.8;
  return std::nullopt;
}

/// Accept iff fidelity >= threshold, per row of one column.
inline std::map<std::string, Verdict> threshold_verdict(const QkdTable& table, const std::string& column,
                                                        std::optional<double> threshold = std::nullopt) {
  if (std::find(table.columns.begin(), table.columns.end(), column) == table.columns.end()) {
    throw std::invalid_argument("threshold_verdict: table has no column '" + column + "'");
  }
  if (!threshold) threshold = default_qkd_threshold(table.kind, column);
  if (!threshold) {
    throw std::invalid_argument("threshold_verdict: column '" + column + "' has no default threshold; pass one");
  }
  if (!(*threshold >= 0.0 && *threshold <= 1.0)) throw std::invalid_argument("threshold_verdict: threshold must lie in [0, 1]");
  std::map<std::string, Verdict> out;
  for (const QkdRow& r : table.rows) out[r.pair] = threshold_decision(r.values.at(column), *threshold);
  return out;
}

// ---- export ----

inline std::string qkd_table_to_csv(const QkdTable& t) {
  std::ostringstream out;
  out << "pair";
  for (const auto& c : t.columns) out << ',' << c;
  out << '\n';
  char buf[40];
  for (const QkdRow& r : t.rows) {
    out << r.pair;
    for (const auto& c : t.columns) {
      std::snprintf(buf, sizeof buf, "%.10f", r.values.at(c));
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

inline nlohmann::json to_json(const QkdTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const QkdRow& r : t.rows) rows.push_back({{"pair", r.pair}, {"values", r.values}});
  return {{"kind", t.kind}, {"initial", t.initial}, {"columns", t.columns}, {"rows", rows}};
}

inline QkdTable qkd_table_from_json(const nlohmann::json& j) {
  QkdTable t;
  t.kind = j.at("kind").get<std::string>();
  t.initial = j.at("initial").get<int>();
  t.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& r : j.at("rows")) t.rows.push_back({r.at("pair").get<std::string>(), r.at("values").get<std::map<std::string, double>>()});
  return t;
}

inline nlohmann::json to_json(const std::map<std::string, Verdict>& verdicts) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [pair, v] : verdicts) j[pair] = to_string(v);
  return j;
}

}  // namespace hetver
