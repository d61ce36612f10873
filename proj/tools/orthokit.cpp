// orthokit: check, transform and law-test models stored as JSON documents.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "orthokit/orthokit.hpp"

using namespace orthokit;

namespace {

constexpr int kOk = 0;
constexpr int kFalse = 1;
constexpr int kError = 2;

Json labels_json(const TestSpace& ts, const OutcomeSet& s) { return detail::sorted_labels(ts, s); }

Json law_json(const LawReport& r) {
  return Json{{"law", r.law}, {"holds", r.holds}, {"points", r.points}, {"witness", r.witness}};
}

Json laws_json(const std::vector<LawReport>& laws) {
  Json out = Json::array();
  for (const auto& l : laws) out.push_back(law_json(l));
  return out;
}

void emit(const Json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw Error(ErrorCode::ParseError, "cannot write " + out_path);
  f << text;
}

void emit_document(const ModelDocument& doc, const std::string& out_path) {
  if (out_path.empty())
    std::cout << save_document(doc);
  else
    save_document_file(doc, out_path);
}

/// Runs independent jobs on up to `jobs` threads; results keep their slots.
std::vector<Json> run_parallel(const std::vector<std::function<Json()>>& work, std::size_t jobs) {
  std::vector<Json> out(work.size());
  std::vector<std::exception_ptr> errs(work.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < work.size();) {
      try {
        out[i] = work[i]();
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(jobs, work.size()); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

// ---------------------------------------------------------------------------
// check

struct CheckFlags {
  bool algebraic = false, coherent = false, regular = false, projective = false, unital = false,
       strongly_unital = false;
  std::vector<std::string> support;
  bool support_given = false;
};

int cmd_check(const std::string& path, CheckFlags f, std::size_t jobs) {
  ModelDocument doc = load_document_file(path);
  const Model& m = doc.model;
  const TestSpace& ts = m.ts();
  if (!(f.algebraic || f.coherent || f.regular || f.projective || f.unital || f.strongly_unital ||
        f.support_given))
    f.algebraic = f.coherent = f.regular = f.projective = f.unital = f.strongly_unital = true;

  std::vector<std::string> names;
  std::vector<std::function<Json()>> work;
  auto pair_pred = [&](const char* name, auto witness_fn) {
    names.push_back(name);
    work.push_back([&ts, witness_fn] {
      auto w = witness_fn(ts);
      Json r{{"holds", !w.has_value()}, {"witness", nullptr}};
      if (w) r["witness"] = Json{{"a", labels_json(ts, w->a)}, {"b", labels_json(ts, w->b)}};
      return r;
    });
  };
  if (f.algebraic) {
    names.push_back("algebraic");
    work.push_back([&ts] {
      auto w = algebraic_witness(ts);
      Json r{{"holds", !w.has_value()}, {"witness", nullptr}};
      if (w)
        r["witness"] = Json{{"a", labels_json(ts, w->a)}, {"b", labels_json(ts, w->b)}, {"c", labels_json(ts, w->c)}};
      return r;
    });
  }
  if (f.coherent) pair_pred("coherent", [](const TestSpace& t) { return coherent_witness(t); });
  if (f.regular) pair_pred("regular", [](const TestSpace& t) { return regular_witness(t); });
  if (f.projective) pair_pred("projective", [](const TestSpace& t) { return projective_witness(t); });
  if (f.unital) {
    names.push_back("unital");
    work.push_back([&m, &ts] {
      auto r = check_unital(m);
      Json failing = Json::array();
      for (Oid x : r.failing) failing.push_back(ts.label(x));
      return Json{{"holds", r.holds}, {"witness", r.holds ? Json(nullptr) : Json{{"outcomes", failing}}}};
    });
  }
  if (f.strongly_unital) {
    names.push_back("strongly_unital");
    work.push_back([&m, &ts] {
      auto r = check_strongly_unital(m);
      Json failing = Json::array();
      for (auto [x, y] : r.failing) failing.push_back(Json::array({ts.label(x), ts.label(y)}));
      return Json{{"holds", r.holds}, {"witness", r.holds ? Json(nullptr) : Json{{"pairs", failing}}}};
    });
  }
  if (f.support_given) {
    OutcomeSet s;
    for (const auto& l : f.support) s.push_back(ts.id(l));
    s = normalized(std::move(s));
    names.push_back("support");
    work.push_back([&ts, s] {
      return Json{{"holds", is_support(ts, s)}, {"set", labels_json(ts, s)}, {"witness", nullptr}};
    });
  }

  auto results = run_parallel(work, jobs);
  Json report{{"file", path}, {"predicates", Json::object()}};
  bool all = true;
  for (std::size_t i = 0; i < names.size(); ++i) {
    all = all && results[i]["holds"].get<bool>();
    report["predicates"][names[i]] = results[i];
    std::cerr << names[i] << ": " << (results[i]["holds"].get<bool>() ? "true" : "false") << "\n";
  }
  emit(report, "");
  return all ? kOk : kFalse;
}

// ---------------------------------------------------------------------------
// transform

Json logic_json(const Logic& L) {
  Json elements = Json::array();
  for (std::size_t p = 0; p < L.size(); ++p) elements.push_back(L.name(p));
  Json oplus = Json::array();
  for (std::size_t p = 0; p < L.size(); ++p) {
    Json row = Json::array();
    for (std::size_t q = 0; q < L.size(); ++q)
      row.push_back(L.orthogonal(p, q) ? Json(L.name(L.oplus(p, q))) : Json(nullptr));
    oplus.push_back(row);
  }
  Json order = Json::array();
  for (std::size_t p = 0; p < L.size(); ++p)
    for (std::size_t q = 0; q < L.size(); ++q)
      if (p != q && L.leq(p, q)) order.push_back(Json::array({L.name(p), L.name(q)}));
  Json atoms = Json::array();
  for (auto a : L.atoms()) atoms.push_back(L.name(a));
  return Json{{"elements", elements},
              {"size", L.size()},
              {"oplus", oplus},
              {"order", order},
              {"atoms", atoms},
              {"classification", L.classification()},
              {"omp", L.is_omp()},
              {"boolean", L.is_boolean()}};
}

Json closure_lattice_json(const TestSpace& ts) {
  OrthoLattice lat(ts);
  Json elements = Json::array();
  for (const auto& e : lat.elements()) elements.push_back(labels_json(ts, e));
  Json complement = Json::array(), meet = Json::array(), join = Json::array();
  for (std::size_t i = 0; i < lat.size(); ++i) {
    complement.push_back(lat.complement(i));
    Json mr = Json::array(), jr = Json::array();
    for (std::size_t k = 0; k < lat.size(); ++k) {
      mr.push_back(lat.meet(i, k));
      jr.push_back(lat.join(i, k));
    }
    meet.push_back(mr);
    join.push_back(jr);
  }
  return Json{{"elements", elements}, {"size", lat.size()}, {"complement", complement}, {"meet", meet}, {"join", join}};
}

// ---------------------------------------------------------------------------
// laws

SequentialProduct require_product(const ModelDocument& doc) {
  if (!doc.product) throw Error(ErrorCode::MissingStructure, "document has no product table");
  return *doc.product;
}

int report_laws(const std::string& suite, const std::vector<LawReport>& laws, Json extra = Json::object()) {
  bool ok = all_hold(laws);
  Json r{{"suite", suite}, {"holds", ok}, {"laws", laws_json(laws)}};
  for (auto& [k, v] : extra.items()) r[k] = v;
  for (const auto& l : laws) std::cerr << (l.holds ? "pass " : "FAIL ") << l.law << "\n";
  emit(r, "");
  return ok ? kOk : kFalse;
}

int cmd_laws(const std::string& path, const std::string& suite, std::size_t depth) {
  ModelDocument doc = load_document_file(path);
  const Model& m = doc.model;
  if (suite == "sharp-monad") return report_laws(suite, check_monad_laws_sharp(m.ts()));
  if (suite == "distributive") return report_laws(suite, check_distributive_diagrams(m.ts(), depth), {{"depth", depth}});
  if (suite == "sequential") {
    auto rep = check_sequential(m, require_product(doc));
    return report_laws(suite, rep.laws, {{"partially_verified", rep.partially_verified}});
  }
  if (suite == "g-algebra") {
    SequentialProduct pi = require_product(doc);
    if (!doc.coherence) throw Error(ErrorCode::MissingStructure, "document has no coherence");
    CoarseModel sharp = coarsen(m);
    CoherenceMap sigma = coherence_map(doc, sharp.space);
    try {
      GAlgebra g = validate_g_algebra(m, sharp, sigma, pi);
      return report_laws(suite, g.laws);
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::NotGAlgebra:
        case ErrorCode::NotCoherence:
        case ErrorCode::NotSequential:
        case ErrorCode::NotAMorphism:
          return report_laws(suite, {LawReport{to_string(e.code()), false, 0, e.what()}});
        default:
          throw;
      }
    }
  }
  throw Error(ErrorCode::UnknownName, "unknown law suite " + suite);
}

// ---------------------------------------------------------------------------
// interference

Json value_json(const Rational& v, ScalarKind kind) {
  return kind == ScalarKind::Exact ? Json{{"value", v.get_d()}, {"exact", v.get_str()}} : Json{{"value", v.get_d()}};
}

int cmd_interference(const std::string& target, std::optional<double> tolerance) {
  const auto& presets = sg_preset_names();
  std::vector<InterferenceWitness> ws;
  ScalarKind kind;
  std::optional<SGModel> sg;
  std::optional<ModelDocument> doc;
  std::optional<CoarseModel> sharp;
  std::optional<Coherence> coh;
  InterferenceData d;
  if (std::find(presets.begin(), presets.end(), target) != presets.end()) {
    auto p = sg_preset(target);
    sg = sg_compound_model(p.plan, p.initial);
    d = sg_interference(*sg);
    kind = sg->model.scalar().kind;
  } else {
    doc = load_document_file(target);
    SequentialProduct pi = require_product(*doc);
    if (!doc->coherence) throw Error(ErrorCode::MissingStructure, "document has no coherence");
    sharp = coarsen(doc->model);
    coh = validate_coherence(doc->model, *sharp, coherence_map(*doc, sharp->space));
    d = interference_data(*coh, pi, scan_states(doc->model));
    kind = doc->model.scalar().kind;
  }
  ws = find_interference(d, tolerance);
  std::sort(ws.begin(), ws.end(), [](const InterferenceWitness& a, const InterferenceWitness& b) {
    return std::tie(a.event_label, a.witness_label, a.state) < std::tie(b.event_label, b.witness_label, b.state);
  });
  Json list = Json::array();
  for (const auto& w : ws) {
    list.push_back(Json{{"state", w.state},
                        {"event", w.event_label},
                        {"continuation", w.witness_label},
                        {"coherent", value_json(w.coherent, kind)},
                        {"incoherent", value_json(w.incoherent, kind)},
                        {"gap", value_json(w.gap, kind)}});
    std::cerr << w.event_label << " then " << w.witness_label << ": gap " << w.gap.get_d() << "\n";
  }
  emit(Json{{"target", target}, {"states", d.states.size()}, {"witnesses", list}}, "");
  return kOk;
}

void print_error(const std::string& code, const std::string& msg) {
  std::cout << Json{{"error", code}, {"message", msg}}.dump(2) << "\n";
  std::cerr << "error: " << code << ": " << msg << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Check and transform test-space models stored as JSON documents."};
  app.require_subcommand(1);
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--jobs,-j", jobs, "Worker threads for independent checks")->check(CLI::PositiveNumber);

  std::string path, out, other, suite;
  std::size_t depth = 2;
  std::optional<double> tolerance;
  CheckFlags flags;

  auto* check = app.add_subcommand("check", "Decide structural predicates");
  check->add_option("file", path, "Model document")->required();
  check->add_flag("--algebraic", flags.algebraic);
  check->add_flag("--coherent", flags.coherent);
  check->add_flag("--regular", flags.regular);
  check->add_flag("--projective", flags.projective);
  check->add_flag("--unital", flags.unital);
  check->add_flag("--strongly-unital", flags.strongly_unital);
  check->add_option("--support", flags.support, "Outcome labels of a candidate support")->delimiter(',');

  auto* transform = app.add_subcommand("transform", "Build a derived model or report");
  transform->require_subcommand(1);
  transform->fallthrough();
  transform->add_option("file", path, "Model document")->required();
  transform->add_option("--out,-o", out, "Write here instead of stdout");
  auto* t_coarsen = transform->add_subcommand("coarsen", "A^#");
  auto* t_product = transform->add_subcommand("product", "Forward product with another document");
  t_product->add_option("other", other)->required();
  auto* t_compound = transform->add_subcommand("compound", "Depth-truncated compound");
  t_compound->add_option("--depth", depth)->required();
  auto* t_logic = transform->add_subcommand("logic", "Logic as an orthoalgebra");
  auto* t_lattice = transform->add_subcommand("closure-lattice", "Ortho-closed subsets");

  auto* laws = app.add_subcommand("laws", "Run a law suite");
  laws->add_option("file", path, "Model document")->required();
  laws->add_option("suite", suite, "sharp-monad | distributive | g-algebra | sequential")
      ->required()
      ->check(CLI::IsMember({"sharp-monad", "distributive", "g-algebra", "sequential"}));
  laws->add_option("--depth", depth, "Window depth for distributive");

  std::string fixture_name;
  auto* fixture = app.add_subcommand("fixture", "Print a named fixture document");
  fixture->add_option("name", fixture_name)->required();

  auto* interference = app.add_subcommand("interference", "Search for interference witnesses");
  interference->add_option("target", path, "Model document or preset: qubit-mz | spin1 | spin32")->required();
  interference->add_option("--tolerance", tolerance);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kError;
  }

  try {
    if (check->parsed()) {
      flags.support_given = check->count("--support") > 0;
      return cmd_check(path, flags, jobs);
    }
    if (transform->parsed()) {
      ModelDocument doc = load_document_file(path);
      if (t_coarsen->parsed()) {
        ModelDocument r;
        r.model = coarsen(doc.model).model;
        r.metadata = Json{{"transform", "coarsen"}};
        emit_document(r, out);
      } else if (t_product->parsed()) {
        ModelDocument b = load_document_file(other);
        ModelDocument r;
        r.model = forward_product(doc.model, b.model).model;
        r.metadata = Json{{"transform", "product"}};
        emit_document(r, out);
      } else if (t_compound->parsed()) {
        auto c = truncated_compound(doc.model, depth);
        ModelDocument r;
        r.product = concatenation_product(c.space);
        r.model = std::move(c.model);
        r.metadata = Json{{"transform", "compound"}, {"depth", depth}};
        emit_document(r, out);
      } else if (t_logic->parsed()) {
        Logic L = build_logic(doc.model.ts());
        std::cerr << L.classification() << ", " << L.size() << " elements\n";
        emit(logic_json(L), out);
      } else if (t_lattice->parsed()) {
        emit(closure_lattice_json(doc.model.ts()), out);
      }
      return kOk;
    }
    if (fixture->parsed()) {
      std::cout << save_document(named_document(fixture_name));
      return kOk;
    }
    if (laws->parsed()) return cmd_laws(path, suite, depth);
    if (interference->parsed()) return cmd_interference(path, tolerance);
  } catch (const Error& e) {
    print_error(to_string(e.code()), e.what());
    return kError;
  } catch (const std::exception& e) {
    print_error("Internal", e.what());
    return kError;
  }
  return kError;
}
