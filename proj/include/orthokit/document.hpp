#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "orthokit/corpus.hpp"
#include "orthokit/quantum.hpp"

namespace orthokit {

using Json = nlohmann::json;

inline constexpr const char* kFormatVersion = "1";

/// A model plus the optional structure maps a file can carry.
struct ModelDocument {
  Model model;
  std::optional<std::vector<std::pair<Event, Oid>>> coherence;  // σ on events with ≥ 2 outcomes
  std::optional<SequentialProduct> product;
  Json metadata = Json::object();
};

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

inline std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) parse_fail("bad decimal '" + s + "'");
  return v;
}

inline Rational parse_rational(const std::string& s) {
  if (s.empty() || s.find_first_not_of("+-0123456789/") != std::string::npos) parse_fail("bad rational '" + s + "'");
  Rational q;
  if (q.set_str(s, 10) != 0) parse_fail("bad rational '" + s + "'");
  if (q.get_den() == 0) parse_fail("zero denominator in '" + s + "'");
  q.canonicalize();
  return q;
}

inline std::string format_value(const Rational& v, ScalarKind kind) {
  return kind == ScalarKind::Exact ? v.get_str() : format_double(v.get_d());
}

inline Rational parse_value(const std::string& s, ScalarKind kind) {
  return kind == ScalarKind::Exact ? parse_rational(s) : Rational(parse_double(s));
}

/// Outcome ids in label order.
inline std::vector<Oid> label_order(const TestSpace& ts) {
  std::vector<Oid> ord(ts.size());
  std::iota(ord.begin(), ord.end(), 0);
  std::sort(ord.begin(), ord.end(), [&](Oid a, Oid b) { return ts.label(a) < ts.label(b); });
  return ord;
}

inline std::vector<std::string> sorted_labels(const TestSpace& ts, const OutcomeSet& s) {
  std::vector<std::string> out;
  for (Oid x : s) out.push_back(ts.label(x));
  std::sort(out.begin(), out.end());
  return out;
}

template <class T>
const Json& field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) parse_fail(std::string("missing field '") + key + "'");
  if constexpr (std::is_same_v<T, std::string>) {
    if (!it->is_string()) parse_fail(std::string("field '") + key + "' must be a string");
  } else {
    if (!it->is_array()) parse_fail(std::string("field '") + key + "' must be an array");
  }
  return *it;
}

inline std::string as_string(const Json& j, const char* what) {
  if (!j.is_string()) parse_fail(std::string(what) + " must be a string");
  return j.get<std::string>();
}

inline Oid outcome_of(const TestSpace& ts, const Json& j) {
  auto l = as_string(j, "outcome label");
  auto id = ts.find(l);
  if (!id) throw Error(ErrorCode::UnknownLabel, "unknown outcome '" + l + "'");
  return *id;
}

inline Event event_of(const TestSpace& ts, const Json& j) {
  if (!j.is_array()) parse_fail("event must be an array of labels");
  Event e;
  for (const auto& l : j) e.push_back(outcome_of(ts, l));
  return normalized(std::move(e));
}

}  // namespace detail

/// Canonical JSON text: sorted outcomes, sorted tests, sorted keys, two-space indent, trailing newline.
inline std::string save_document(const ModelDocument& doc) {
  const Model& m = doc.model;
  const TestSpace& ts = m.ts();
  const ScalarKind kind = m.scalar().kind;
  const auto ord = detail::label_order(ts);

  Json j;
  j["format_version"] = kFormatVersion;
  Json outcomes = Json::array();
  for (Oid x : ord) outcomes.push_back(ts.label(x));
  j["outcomes"] = outcomes;

  std::vector<std::vector<std::string>> tests;
  for (const auto& t : ts.tests()) tests.push_back(detail::sorted_labels(ts, t));
  std::sort(tests.begin(), tests.end());
  j["tests"] = tests;

  Json states;
  states["kind"] = m.omega().is_full() ? "full" : "generators";
  states["scalar"] = kind == ScalarKind::Exact ? "exact" : "float";
  if (kind == ScalarKind::Float) states["tau"] = detail::format_double(m.scalar().tau);
  if (!m.omega().is_full()) {
    Json gens = Json::array();
    for (const auto& g : m.omega().generators) {
      Json row = Json::array();
      for (Oid x : ord) row.push_back(detail::format_value(g.at(x), kind));
      gens.push_back(row);
    }
    states["generators"] = gens;
  }
  j["states"] = states;

  if (doc.coherence) {
    std::vector<std::pair<std::vector<std::string>, std::string>> rows;
    for (const auto& [a, q] : *doc.coherence) rows.emplace_back(detail::sorted_labels(ts, a), ts.label(q));
    std::sort(rows.begin(), rows.end());
    Json c = Json::array();
    for (const auto& [a, q] : rows) c.push_back(Json{{"event", a}, {"image", q}});
    j["coherence"] = c;
  }

  if (doc.product) {
    const auto& p = *doc.product;
    Json pj;
    pj["unit"] = ts.label(p.unit);
    pj["nulls"] = p.nulls == SequentialProduct::Nulls::Absorbing ? "absorbing" : "outside-window";
    Json table = Json::array();
    for (Oid x : ord)
      for (Oid y : ord)
        if (auto z = p(x, y)) table.push_back(Json::array({ts.label(x), ts.label(y), ts.label(*z)}));
    pj["table"] = table;
    j["product"] = pj;
  }

  if (!doc.metadata.empty()) j["metadata"] = doc.metadata;
  return j.dump(2) + "\n";
}

/**
 * @brief Parses and validates a document. Outcomes are numbered in file order.
 * @throws ParseError on malformed JSON or fields; model validation errors pass through.
 */
inline ModelDocument load_document(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    detail::parse_fail(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) detail::parse_fail("document must be an object");
  if (detail::as_string(detail::field<std::string>(j, "format_version"), "format_version") != kFormatVersion)
    detail::parse_fail("unsupported format_version");

  std::vector<std::string> labels;
  for (const auto& l : detail::field<Json>(j, "outcomes")) labels.push_back(detail::as_string(l, "outcome label"));
  std::vector<std::vector<std::string>> tests;
  for (const auto& t : detail::field<Json>(j, "tests")) {
    if (!t.is_array()) detail::parse_fail("each test must be an array of labels");
    std::vector<std::string> row;
    for (const auto& l : t) row.push_back(detail::as_string(l, "outcome label"));
    tests.push_back(std::move(row));
  }
  TestSpace ts = build_test_space(labels, tests);

  auto sit = j.find("states");
  if (sit == j.end() || !sit->is_object()) detail::parse_fail("missing object 'states'");
  const Json& sj = *sit;
  ScalarConfig sc;
  const std::string scalar = sj.contains("scalar") ? detail::as_string(sj["scalar"], "scalar") : "exact";
  if (scalar == "float") {
    sc.kind = ScalarKind::Float;
    if (sj.contains("tau")) sc.tau = detail::parse_double(detail::as_string(sj["tau"], "tau"));
  } else if (scalar != "exact") {
    detail::parse_fail("scalar must be 'exact' or 'float'");
  }
  const std::string kind = detail::as_string(detail::field<std::string>(sj, "kind"), "kind");
  StateSpace omega;
  if (kind == "generators") {
    std::vector<Weight> gens;
    for (const auto& row : detail::field<Json>(sj, "generators")) {
      if (!row.is_array() || row.size() != ts.size()) detail::parse_fail("generator rows need one entry per outcome");
      Weight w;
      for (const auto& v : row) w.push_back(detail::parse_value(detail::as_string(v, "state entry"), sc.kind));
      gens.push_back(std::move(w));
    }
    omega = StateSpace::of(std::move(gens));
  } else if (kind != "full") {
    detail::parse_fail("states.kind must be 'full' or 'generators'");
  }

  ModelDocument doc;
  doc.model = Model(std::move(ts), std::move(omega), sc);
  const TestSpace& t = doc.model.ts();

  if (auto c = j.find("coherence"); c != j.end()) {
    if (!c->is_array()) detail::parse_fail("coherence must be an array");
    std::vector<std::pair<Event, Oid>> rows;
    for (const auto& r : *c) {
      if (!r.is_object()) detail::parse_fail("coherence rows are objects");
      Event a = detail::event_of(t, detail::field<Json>(r, "event"));
      if (!t.is_event(a) || a.size() < 2) throw Error(ErrorCode::NotAnEvent, t.format(a) + " is not an event with ≥ 2 outcomes");
      rows.emplace_back(std::move(a), detail::outcome_of(t, detail::field<std::string>(r, "image")));
    }
    doc.coherence = std::move(rows);
  }

  if (auto p = j.find("product"); p != j.end()) {
    if (!p->is_object()) detail::parse_fail("product must be an object");
    SequentialProduct pi;
    pi.unit = detail::outcome_of(t, detail::field<std::string>(*p, "unit"));
    const std::string nulls = detail::as_string(detail::field<std::string>(*p, "nulls"), "nulls");
    if (nulls == "absorbing")
      pi.nulls = SequentialProduct::Nulls::Absorbing;
    else if (nulls == "outside-window")
      pi.nulls = SequentialProduct::Nulls::OutsideWindow;
    else
      detail::parse_fail("nulls must be 'absorbing' or 'outside-window'");
    pi.table.assign(t.size(), std::vector<std::optional<Oid>>(t.size()));
    for (const auto& row : detail::field<Json>(*p, "table")) {
      if (!row.is_array() || row.size() != 3) detail::parse_fail("product rows are [x, y, xy]");
      auto& cell = pi.table[detail::outcome_of(t, row[0])][detail::outcome_of(t, row[1])];
      if (cell) detail::parse_fail("duplicate product row");
      cell = detail::outcome_of(t, row[2]);
    }
    doc.product = std::move(pi);
  }

  if (auto md = j.find("metadata"); md != j.end()) {
    if (!md->is_object()) detail::parse_fail("metadata must be an object");
    doc.metadata = *md;
  }
  return doc;
}

inline ModelDocument load_document_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) detail::parse_fail("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_document(ss.str());
}

inline void save_document_file(const ModelDocument& doc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path);
  out << save_document(doc);
}

/// σ as a map on A^#, with σ({x}) = x filled in.
inline CoherenceMap coherence_map(const ModelDocument& doc, const SharpSpace& s) {
  if (!doc.coherence) throw Error(ErrorCode::MissingStructure, "document has no coherence");
  const TestSpace& ts = doc.model.ts();
  std::vector<std::optional<Oid>> map(s.underlying.size());
  for (Oid a = 0; a < s.underlying.size(); ++a)
    if (s.underlying[a].size() == 1) map[a] = s.underlying[a].front();
  for (const auto& [a, q] : *doc.coherence) {
    auto& cell = map.at(s.id_of(a));
    if (cell) detail::parse_fail("coherence given twice on " + ts.format(a));
    cell = q;
  }
  CoherenceMap out;
  for (Oid a = 0; a < map.size(); ++a) {
    if (!map[a]) throw Error(ErrorCode::MissingStructure, "coherence undefined on " + ts.format(s.underlying[a]));
    out.map.push_back(*map[a]);
  }
  return out;
}

inline std::vector<std::pair<Event, Oid>> coherence_rows(const SharpSpace& s, const CoherenceMap& sigma) {
  std::vector<std::pair<Event, Oid>> rows;
  for (Oid a = 0; a < s.underlying.size(); ++a)
    if (s.underlying[a].size() >= 2) rows.emplace_back(s.underlying[a], sigma.map.at(a));
  return rows;
}

/// Named fixtures as documents; Kolmogorov models carry σ = ⋃ and π = ∩.
inline ModelDocument named_document(const std::string& name) {
  ModelDocument doc;
  if (name.rfind("kolmogorov", 0) == 0 && name.size() == 11 && name[10] >= '1' && name[10] <= '4') {
    auto k = kolmogorov_model(static_cast<std::size_t>(name[10] - '0'));
    doc.model = k.model;
    doc.coherence = coherence_rows(k.sharp.space, k.sigma);
    doc.product = k.pi;
  } else {
    doc.model = named(name);
  }
  doc.metadata = Json{{"name", name}};
  return doc;
}

}  // namespace orthokit
