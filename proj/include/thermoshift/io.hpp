#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermoshift/cocycle.hpp"
#include "thermoshift/conditions.hpp"
#include "thermoshift/errors.hpp"
#include "thermoshift/factor.hpp"
#include "thermoshift/gibbs.hpp"
#include "thermoshift/language.hpp"
#include "thermoshift/pressure.hpp"
#include "thermoshift/shift_space.hpp"
#include "thermoshift/weight_system.hpp"

namespace thermoshift::io {

using json = nlohmann::json;

/// Parses JSON text, turning syntax errors into SpecError with line:column.
inline json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SpecError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON");
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str(), path);
}

namespace detail {

struct Ctx {
  std::string source;
  std::string path;
  Ctx at(const std::string& key) const { return {source, path.empty() ? key : path + "." + key}; }
  Ctx at(std::size_t i) const { return {source, path + "[" + std::to_string(i) + "]"}; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw SpecError(source + ": field '" + (path.empty() ? std::string("<root>") : path) + "': " + msg);
  }
};

inline std::size_t get_uint(const json& j, const Ctx& c) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) c.fail("expected a nonnegative integer");
  if (j.is_number_integer() && j.get<long long>() < 0) c.fail("expected a nonnegative integer");
  return j.get<std::size_t>();
}

inline double get_real(const json& j, const Ctx& c) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "-inf") return kNegInf;
    if (s == "inf") return kPosInf;
  }
  c.fail("expected a number (or \"-inf\")");
}

inline std::string get_string(const json& j, const Ctx& c) {
  if (!j.is_string()) c.fail("expected a string");
  return j.get<std::string>();
}

inline const json& require(const json& obj, const std::string& key, const Ctx& c) {
  if (!obj.is_object()) c.fail("expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) c.fail("missing required field '" + key + "'");
  return *it;
}

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed, const Ctx& c) {
  if (!obj.is_object()) c.fail("expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) c.at(it.key()).fail("unknown field");
  }
}

}  // namespace detail

inline ShiftSpace parse_shift(const json& j, const std::string& source = "shift") {
  using detail::Ctx;
  Ctx root{source, ""};
  detail::check_keys(j, {"alphabet_size", "edges", "full", "ladder", "factor_map", "builtin"}, root);
  std::vector<std::size_t> ladder;
  if (j.contains("ladder")) {
    const json& l = j["ladder"];
    if (!l.is_array()) root.at("ladder").fail("expected an array");
    for (std::size_t i = 0; i < l.size(); ++i) ladder.push_back(detail::get_uint(l[i], root.at("ladder").at(i)));
  }
  std::optional<std::size_t> k;
  if (j.contains("alphabet_size")) {
    k = detail::get_uint(j["alphabet_size"], root.at("alphabet_size"));
    if (*k == 0) root.at("alphabet_size").fail("must be positive");
  }
  bool block_map = false;
  std::optional<std::vector<Symbol>> fmap;
  if (j.contains("factor_map")) {
    const json& f = j["factor_map"];
    Ctx c = root.at("factor_map");
    if (f.is_string()) {
      if (f.get<std::string>() != "builtin") c.fail("expected an array or \"builtin\"");
      block_map = true;
    } else if (f.is_array()) {
      std::vector<Symbol> m;
      for (std::size_t i = 0; i < f.size(); ++i) {
        std::size_t v = detail::get_uint(f[i], c.at(i));
        if (v == 0) c.at(i).fail("image symbols start at 1");
        m.push_back(static_cast<Symbol>(v));
      }
      fmap = std::move(m);
    } else {
      c.fail("expected an array or \"builtin\"");
    }
  }
  try {
    if (j.contains("builtin")) {
      const std::string name = detail::get_string(j["builtin"], root.at("builtin"));
      std::size_t size = k.value_or(name == "golden-mean" ? 2 : 0);
      if (size == 0) root.fail("builtin '" + name + "' needs alphabet_size");
      ShiftSpace s = builtin::by_name(name, size, ladder, block_map);
      if (fmap) return ShiftSpace::create(size, s.all_edges(), ladder, fmap);
      return s;
    }
    if (block_map) root.at("factor_map").fail("\"builtin\" factor map needs a builtin shift");
    if (!k) root.fail("missing required field 'alphabet_size'");
    ShiftSpace::EdgeList edges;
    const bool full = j.contains("full") && j["full"].is_boolean() && j["full"].get<bool>();
    if (j.contains("full") && !j["full"].is_boolean()) root.at("full").fail("expected a boolean");
    if (full) {
      if (j.contains("edges")) root.fail("give either 'edges' or 'full', not both");
      edges = builtin::full_edges(*k);
    } else {
      Ctx c = root.at("edges");
      const json& e = detail::require(j, "edges", root);
      if (!e.is_array()) c.fail("expected an array of [i, j] pairs");
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (!e[i].is_array() || e[i].size() != 2) c.at(i).fail("expected a pair [i, j]");
        edges.emplace_back(static_cast<Symbol>(detail::get_uint(e[i][0], c.at(i).at(0))),
                           static_cast<Symbol>(detail::get_uint(e[i][1], c.at(i).at(1))));
      }
    }
    return ShiftSpace::create(*k, edges, ladder, fmap);
  } catch (const SpecError& e) {
    const std::string msg = e.what();
    if (msg.rfind(source, 0) == 0) throw;
    throw SpecError(source + ": " + msg);
  }
}

inline MatrixNorm parse_norm(const json& j, const detail::Ctx& c) {
  const std::string s = detail::get_string(j, c);
  if (s == "max-row-sum") return MatrixNorm::max_row_sum;
  if (s == "spectral") return MatrixNorm::spectral;
  c.fail("expected \"max-row-sum\" or \"spectral\"");
}

/// A list of row-major d x d arrays, or {"matrices": [...], "norm": ...}.
inline MatrixFamily parse_matrices(const json& j, const std::string& source = "matrices") {
  detail::Ctx root{source, ""};
  const json* list = &j;
  MatrixNorm norm = MatrixNorm::max_row_sum;
  detail::Ctx c = root;
  if (j.is_object()) {
    detail::check_keys(j, {"type", "matrices", "norm"}, root);
    list = &detail::require(j, "matrices", root);
    c = root.at("matrices");
    if (j.contains("norm")) norm = parse_norm(j["norm"], root.at("norm"));
  }
  if (!list->is_array() || list->empty()) c.fail("expected a nonempty array of matrices");
  std::vector<Eigen::MatrixXd> mats;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const json& m = (*list)[i];
    detail::Ctx mc = c.at(i);
    if (!m.is_array() || m.empty()) mc.fail("expected a nonempty array of rows");
    const std::size_t d = m.size();
    Eigen::MatrixXd A(d, d);
    for (std::size_t r = 0; r < d; ++r) {
      if (!m[r].is_array() || m[r].size() != d) mc.at(r).fail("expected a row of length " + std::to_string(d));
      for (std::size_t q = 0; q < d; ++q) A(r, q) = detail::get_real(m[r][q], mc.at(r).at(q));
    }
    mats.push_back(std::move(A));
  }
  try {
    return MatrixFamily::create(std::move(mats), norm);
  } catch (const SpecError& e) {
    throw SpecError(source + ": " + e.what());
  }
}

namespace detail {

inline WeightSystem parse_potential_at(const json& j, const ShiftSpace& s, const Ctx& c) {
  const std::string type = get_string(require(j, "type", c), c.at("type"));
  if (type == "zero") {
    check_keys(j, {"type"}, c);
    return zero_potential(s);
  }
  if (type == "additive-cylinder") {
    check_keys(j, {"type", "depth", "values", "default"}, c);
    const std::size_t depth = get_uint(require(j, "depth", c), c.at("depth"));
    if (depth == 0) c.at("depth").fail("must be >= 1");
    const json& vals = require(j, "values", c);
    if (!vals.is_object()) c.at("values").fail("expected an object mapping words to log-weights");
    std::map<Word, double> table;
    for (auto it = vals.begin(); it != vals.end(); ++it) {
      Word w;
      try {
        w = parse_word(it.key());
      } catch (const std::invalid_argument&) {
        c.at("values").at(it.key()).fail("malformed word key");
      }
      table[w] = get_real(it.value(), c.at("values").at(it.key()));
    }
    std::optional<double> fallback;
    if (j.contains("default")) fallback = get_real(j["default"], c.at("default"));
    return additive_cylinder(s, depth, std::move(table), fallback);
  }
  if (type == "tabulated-aa") {
    check_keys(j, {"type", "lambda", "c"}, c);
    const json& l = require(j, "lambda", c);
    if (!l.is_array()) c.at("lambda").fail("expected an array");
    std::vector<double> lambda;
    for (std::size_t i = 0; i < l.size(); ++i) lambda.push_back(get_real(l[i], c.at("lambda").at(i)));
    std::string id = j.contains("c") ? get_string(j["c"], c.at("c")) : "one";
    return tabulated_aa(s, std::move(lambda), id);
  }
  if (type == "matrix-cocycle") {
    return matrix_cocycle(s, parse_matrices(j, c.source));
  }
  if (type == "preimage-count") {
    check_keys(j, {"type", "exponent"}, c);
    std::optional<double> k;
    if (j.contains("exponent")) k = get_real(j["exponent"], c.at("exponent"));
    return preimage_count_weight(s, k);
  }
  if (type == "pushforward") {
    check_keys(j, {"type", "inner"}, c);
    WeightSystem inner = parse_potential_at(require(j, "inner", c), s.cover(), c.at("inner"));
    return pushforward_weight(s, inner);
  }
  if (type == "scaled") {
    check_keys(j, {"type", "inner", "per-step"}, c);
    WeightSystem inner = parse_potential_at(require(j, "inner", c), s, c.at("inner"));
    return scaled(inner, get_real(require(j, "per-step", c), c.at("per-step")));
  }
  c.at("type").fail("unknown potential type '" + type + "'");
}

}  // namespace detail

inline WeightSystem parse_potential(const json& j, const ShiftSpace& s, const std::string& source = "potential") {
  try {
    return detail::parse_potential_at(j, s, {source, ""});
  } catch (const SpecError& e) {
    const std::string msg = e.what();
    if (msg.rfind(source, 0) == 0) throw;
    throw SpecError(source + ": " + msg);
  }
}

// ---- report serialization -------------------------------------------------

/// Finite numbers as numbers, infinities and NaN as strings.
inline json num(double x) {
  if (std::isnan(x)) return "nan";
  if (x == kPosInf) return "inf";
  if (x == kNegInf) return "-inf";
  return x;
}

inline json num(const std::optional<double>& x) { return x ? num(*x) : json(nullptr); }

inline json word(WordView w) { return to_string(w); }

inline json words(const std::vector<Word>& ws) {
  json a = json::array();
  for (const auto& w : ws) a.push_back(to_string(w));
  return a;
}

inline json to_json(const SpecificationCertificate& c) {
  json table = json::array();
  for (const auto& e : c.connector_table) table.push_back({{"u", word(e.u)}, {"v", word(e.v)}, {"w", word(e.w)}});
  json j = {{"p", c.p},
            {"W", words(c.W)},
            {"connector_table", table},
            {"strong", c.strong},
            {"n_max", c.n_max},
            {"left_classes", c.left_classes},
            {"right_classes", c.right_classes},
            {"scale", c.scale}};
  if (c.strong) {
    j["strong_p"] = c.strong_p;
    j["strong_W"] = words(c.strong_W);
  }
  return j;
}

inline json to_json(const IrreducibilityReport& r) {
  json j = {{"ok", r.ok()}};
  if (r.certificate) j["certificate"] = to_json(*r.certificate);
  if (r.uncovered) j["uncovered_pair"] = {{"u", word(r.uncovered->first)}, {"v", word(r.uncovered->second)}};
  return j;
}

inline json to_json(const BipReport& r) {
  json j = {{"holds", r.holds}, {"witnesses", r.witnesses}};
  if (r.blocking_symbol) j["blocking_symbol"] = *r.blocking_symbol;
  return j;
}

inline json to_json(const DefectEstimate& d) {
  json j = {{"C_hat", num(d.C_hat)},
            {"C_lower_hat", num(d.C_lower_hat)},
            {"n_max", d.n_max},
            {"subadditive", d.subadditive()},
            {"almost_additive", d.almost_additive()}};
  return j;
}

inline json to_json(const C2Estimate& e) {
  json cells = json::array();
  for (const auto& c : e.D_table)
    cells.push_back({{"n", c.n}, {"m", c.m}, {"log_D", num(c.log_D)}, {"log_D_over_n", num(c.log_D / double(c.n))}});
  json j = {{"ok", e.ok},          {"n_max", e.n_max}, {"p_max", e.p_max}, {"pairs", e.pairs},
            {"p_hat", e.p_hat},    {"W_hat", words(e.W_hat)}, {"D_table", cells}};
  j["log_D_hat"] = e.ok || e.pairs > 0 ? num(e.log_D_hat) : json(nullptr);
  j["D_hat"] = e.ok ? num(e.D_hat()) : json(nullptr);
  if (e.failure) j["failure_pair"] = {{"u", word(e.failure->first)}, {"v", word(e.failure->second)}};
  if (e.worst) j["worst_pair"] = {{"u", word(e.worst->first)}, {"v", word(e.worst->second)}};
  return j;
}

inline json to_json(const Z1Report& z) {
  json partial = json::array();
  for (double v : z.partial) partial.push_back(num(v));
  return {{"value", num(z.value)}, {"partial_sums", partial}, {"verdict", z.verdict}, {"note", z.note}};
}

inline json to_json(const C3Scan& s) {
  json levels = json::array();
  for (const auto& l : s.levels) levels.push_back({{"level", l.level}, {"estimate", to_json(l.estimate)}, {"symbols", l.symbols}});
  return {{"finite", s.finite}, {"reason", s.reason}, {"levels", levels}};
}

inline json to_json(const BracketConstants& k) {
  return {{"C", num(k.C)},     {"C_source", k.C_source}, {"log_D", num(k.log_D)}, {"D_source", k.D_source},
          {"p", k.p},          {"Z1", num(k.Z1)},        {"log_K", num(k.log_K())}, {"log_C1", num(k.log_C1())}};
}

inline json to_json(const Bracket& b) {
  return {{"n", b.n}, {"log_Z", num(b.log_Z)}, {"lower", num(b.lower)}, {"upper", num(b.upper)}};
}

inline json to_json(const LadderEntry& e) {
  json j = {{"level", e.level}, {"irreducible", e.irreducible}};
  if (!e.note.empty()) j["note"] = e.note;
  if (e.bracket) j["bracket"] = to_json(*e.bracket);
  if (e.constants) j["constants"] = to_json(*e.constants);
  return j;
}

inline json to_json(const PressureReport& r) {
  json per_n = json::array(), gur = json::array(), ladder = json::array();
  for (const auto& b : r.per_n) per_n.push_back(to_json(b));
  for (const auto& g : r.gurevich_per_n) gur.push_back({{"n", g.n}, {"a", g.a}, {"log_Z", num(g.log_Z)}});
  for (const auto& e : r.ladder) ladder.push_back(to_json(e));
  return {{"constants", to_json(r.constants)},
          {"per_n", per_n},
          {"gurevich_per_n", gur},
          {"ladder", ladder},
          {"P_best", {{"lower", num(r.best_lower)}, {"upper", num(r.best_upper)}}},
          {"bracket_consistent", r.bracket_consistent},
          {"z1", to_json(r.z1)},
          {"status", r.status}};
}

inline json to_json(const PressureComparison& c) {
  json rows = json::array();
  for (const auto& r : c.rows) {
    json g = json::array();
    for (double v : r.gurevich_rate) g.push_back(num(v));
    rows.push_back({{"n", r.n}, {"rate", num(r.rate)}, {"gurevich_rate", g}, {"discrepancy", num(r.discrepancy)}});
  }
  return {{"anchors", c.anchors},
          {"rows", rows},
          {"nonincreasing", c.nonincreasing},
          {"final_discrepancy", num(c.final_discrepancy)},
          {"pass", c.pass}};
}

inline json to_json(const CylinderMeasure& m) {
  json w = json::object();
  for (const auto& [k, v] : m.weights()) w[to_string(k)] = num(v);
  return {{"depth", m.depth()}, {"weights", w}};
}

inline json to_json(const GibbsRatioReport& g) {
  json rows = json::array();
  for (const auto& r : g.rows)
    rows.push_back({{"n", r.n},
                    {"min_ratio", num(r.min_ratio)},
                    {"max_ratio", num(r.max_ratio)},
                    {"C0", num(r.C0)},
                    {"cylinders", r.cylinders}});
  return {{"P", num(g.P)},
          {"P_halfwidth", num(g.P_halfwidth)},
          {"rows", rows},
          {"C0", num(g.C0)},
          {"log_C0_uncertainty", num(g.log_C0_uncertainty)}};
}

inline json to_json(const MixingReport& m) {
  json rows = json::array();
  for (const auto& r : m.rows)
    rows.push_back({{"u", word(r.sample.u)},
                    {"v", word(r.sample.v)},
                    {"t", r.sample.t},
                    {"best_ratio", num(r.best_ratio)},
                    {"best_i", r.best_i},
                    {"gaps_checked", r.gaps_checked}});
  return {{"p", m.p}, {"c_min", num(m.c_min)}, {"rows", rows}, {"min_best_ratio", num(m.min_best_ratio)}, {"pass", m.pass}};
}

inline json to_json(const EntropyEnergy& e) {
  return {{"n", e.n}, {"entropy", num(e.entropy)}, {"energy", num(e.energy)}, {"balance", num(e.balance)}};
}

inline json to_json(const PressureInterval& p) {
  return {{"lower", num(p.lower)}, {"upper", num(p.upper)}, {"constants", to_json(p.constants)}};
}

inline json to_json(const HiddenGibbsReport& h) {
  return {{"certificate", to_json(h.certificate)},
          {"P_F", to_json(h.P_F)},
          {"P_G", to_json(h.P_G)},
          {"overlap", h.overlap},
          {"domain_ratios", to_json(h.domain_ratios)},
          {"image_ratios", to_json(h.image_ratios)},
          {"C0_finite", h.C0_finite},
          {"C0_stable", h.C0_stable},
          {"regime", h.regime},
          {"pass", h.pass}};
}

inline json to_json(const std::vector<LyapunovRow>& rows) {
  json a = json::array();
  for (const auto& r : rows)
    a.push_back({{"n", r.n},
                 {"a_n", num(r.a_n)},
                 {"estimate", num(r.estimate)},
                 {"envelope", num(r.envelope)},
                 {"increment", num(r.increment)}});
  return a;
}

inline std::vector<MixingSample> parse_samples(const json& j, const std::string& source = "samples") {
  detail::Ctx root{source, ""};
  if (!j.is_array()) root.fail("expected an array of {u, v, t} objects");
  std::vector<MixingSample> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    detail::Ctx c = root.at(i);
    detail::check_keys(j[i], {"u", "v", "t"}, c);
    MixingSample s;
    try {
      s.u = parse_word(detail::get_string(detail::require(j[i], "u", c), c.at("u")));
      s.v = parse_word(detail::get_string(detail::require(j[i], "v", c), c.at("v")));
    } catch (const std::invalid_argument& e) {
      if (dynamic_cast<const SpecError*>(&e)) throw;
      c.fail("malformed word");
    }
    s.t = j[i].contains("t") ? detail::get_uint(j[i]["t"], c.at("t")) : 0;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace thermoshift::io
