#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"

using namespace okt;

namespace {

struct Run {
  int code = -1;
  std::string out;
  Json json() const { return Json::parse(out); }
};

Run run(const std::string& args) {
  const std::string cmd = std::string(ORTHOKIT_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string fixture(const std::string& name) { return std::string(ORTHOKIT_FIXTURES) + "/" + name + ".json"; }

class Scratch {
 public:
  Scratch() {
    dir_ = std::filesystem::temp_directory_path() / ("orthokit-cli-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
  }
  ~Scratch() { std::filesystem::remove_all(dir_); }
  std::string file(const std::string& name, const std::string& text) const {
    auto p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  std::filesystem::path dir_;
};

TEST(Cli, ProjectiveWright) {
  auto r = run("check " + fixture("wright") + " --projective");
  EXPECT_EQ(r.code, 0);
  auto j = r.json();
  EXPECT_TRUE(j["predicates"]["projective"]["holds"].get<bool>());
  EXPECT_EQ(j["predicates"].size(), 1u);
}

TEST(Cli, TriangleIsNotCoherent) {
  auto r = run("check " + fixture("triangle") + " --coherent");
  EXPECT_EQ(r.code, 1);
  auto p = r.json()["predicates"]["coherent"];
  EXPECT_FALSE(p["holds"].get<bool>());
  EXPECT_TRUE(p["witness"].contains("a"));
  EXPECT_TRUE(p["witness"].contains("b"));
}

TEST(Cli, VerdictsMatchTheLibrary) {
  for (const auto& name : fixture_names()) {
    auto m = named(name);
    const auto& ts = m.ts();
    auto r = run("--jobs 3 check " + fixture(name));
    auto p = r.json()["predicates"];
    const bool alg = is_algebraic(ts), coh = is_coherent(ts), reg = is_regular(ts), proj = is_projective(ts);
    const bool un = check_unital(m).holds, su = check_strongly_unital(m).holds;
    EXPECT_EQ(p["algebraic"]["holds"].get<bool>(), alg) << name;
    EXPECT_EQ(p["coherent"]["holds"].get<bool>(), coh) << name;
    EXPECT_EQ(p["regular"]["holds"].get<bool>(), reg) << name;
    EXPECT_EQ(p["projective"]["holds"].get<bool>(), proj) << name;
    EXPECT_EQ(p["unital"]["holds"].get<bool>(), un) << name;
    EXPECT_EQ(p["strongly_unital"]["holds"].get<bool>(), su) << name;
    EXPECT_EQ(r.code, alg && coh && reg && proj && un && su ? 0 : 1) << name;
  }
}

TEST(Cli, Support) {
  auto w = wright();
  auto yes = run("check " + fixture("wright") + " --support x,y,q");
  auto no = run("check " + fixture("wright") + " --support x");
  EXPECT_EQ(yes.json()["predicates"]["support"]["holds"].get<bool>(), is_support(w, ids(w, {"x", "y", "q"})));
  EXPECT_EQ(no.json()["predicates"]["support"]["holds"].get<bool>(), is_support(w, ids(w, {"x"})));
  EXPECT_EQ(yes.code, is_support(w, ids(w, {"x", "y", "q"})) ? 0 : 1);
  EXPECT_EQ(run("check " + fixture("wright") + " --support nope").code, 2);
}

TEST(Cli, ErrorsExitTwo) {
  Scratch s;
  auto bad = s.file("bad.json", "{ not json");
  auto r = run("check " + bad);
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.json()["error"], "ParseError");
  EXPECT_EQ(run("check /nonexistent.json").code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("laws " + fixture("wright") + " nonsense").code, 2);
  EXPECT_EQ(run("--jobs 0 check " + fixture("wright")).code, 2);
  EXPECT_EQ(run("fixture nope").json()["error"], "UnknownName");
}

TEST(Cli, CoarsenSingleTest) {
  Scratch s;
  auto out = s.path("sharp.json");
  auto r = run("transform " + fixture("single-abc") + " coarsen --out " + out);
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  auto doc = load_document_file(out);
  EXPECT_EQ(doc.model.ts().test_count(), 5u);
  EXPECT_EQ(doc.model.ts().size(), 7u);
}

TEST(Cli, KolmogorovLogic) {
  auto r = run("transform " + fixture("kolmogorov3") + " logic");
  ASSERT_EQ(r.code, 0);
  auto j = r.json();
  EXPECT_EQ(j["classification"], "Boolean");
  EXPECT_EQ(j["size"], 8);
  EXPECT_TRUE(j["omp"].get<bool>());
  EXPECT_EQ(j["atoms"].size(), 3u);
}

TEST(Cli, LogicNeedsAnAlgebraicSpace) {
  Scratch s;
  for (const auto& ts : corpus())
    if (!is_algebraic(ts)) {
      ModelDocument doc;
      doc.model = Model::trusted(ts, StateSpace::full());
      auto r = run("transform " + s.file("na.json", save_document(doc)) + " logic");
      EXPECT_EQ(r.code, 2);
      EXPECT_EQ(r.json()["error"], "NotAlgebraic");
      return;
    }
  FAIL() << "no non-algebraic space in the corpus";
}

TEST(Cli, CompoundDepths) {
  auto zero = load_document(run("transform " + fixture("single-ab") + " compound --depth 0").out);
  EXPECT_EQ(zero.model.ts().size(), 1u);
  EXPECT_EQ(zero.model.ts().label(0), "ε");
  ASSERT_TRUE(zero.product);
  auto two = load_document(run("transform " + fixture("single-ab") + " compound --depth 2").out);
  EXPECT_EQ(two.model.ts().size(), 7u);
  EXPECT_EQ(two.model.ts().test_count(), 5u);
}

TEST(Cli, ProductAndClosureLattice) {
  auto r = run("transform " + fixture("single-ab") + " product " + fixture("single-ab"));
  ASSERT_EQ(r.code, 0);
  auto fp = load_document(r.out);
  auto lib = forward_product(named("single-ab"), named("single-ab"));
  EXPECT_EQ(fp.model.ts().size(), lib.model.ts().size());
  EXPECT_EQ(fp.model.ts().test_count(), lib.model.ts().test_count());
  auto lat = run("transform " + fixture("wright") + " closure-lattice");
  ASSERT_EQ(lat.code, 0);
  EXPECT_EQ(lat.json()["size"].get<std::size_t>(), OrthoLattice(wright()).size());
}

TEST(Cli, LawSuites) {
  auto monad = run("laws " + fixture("wright") + " sharp-monad");
  EXPECT_EQ(monad.code, 0);
  EXPECT_TRUE(monad.json()["holds"].get<bool>());
  auto g = run("laws " + fixture("kolmogorov3") + " g-algebra");
  EXPECT_EQ(g.code, 0);
  auto seq = run("laws " + fixture("kolmogorov2") + " sequential");
  EXPECT_EQ(seq.code, 0);
  auto dist = run("laws " + fixture("single-ab") + " distributive --depth 2");
  EXPECT_EQ(dist.code, 0);
  EXPECT_EQ(dist.json()["laws"].size(), 4u);
  auto missing = run("laws " + fixture("wright") + " sequential");
  EXPECT_EQ(missing.code, 2);
  EXPECT_EQ(missing.json()["error"], "MissingStructure");
  EXPECT_EQ(run("laws " + fixture("wright") + " g-algebra").json()["error"], "MissingStructure");
}

TEST(Cli, BrokenProductFailsTheSuite) {
  Scratch s;
  auto doc = named_document("kolmogorov2");
  const auto& ts = doc.model.ts();
  doc.product->table[ts.id("1")][ts.id("2")] = ts.id("1");
  auto path = s.file("broken.json", save_document(doc));
  auto r = run("laws " + path + " g-algebra");
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.json()["holds"].get<bool>());
  EXPECT_EQ(run("laws " + path + " sequential").code, 1);
}

TEST(Cli, Interference) {
  auto mz = run("interference qubit-mz");
  ASSERT_EQ(mz.code, 0);
  auto ws = mz.json()["witnesses"];
  ASSERT_FALSE(ws.empty());
  bool half = false;
  for (const auto& w : ws) half = half || std::abs(w["gap"]["value"].get<double>() - 0.5) < 1e-12;
  EXPECT_TRUE(half);
  EXPECT_TRUE(run("interference qubit-mz --tolerance 1.0").json()["witnesses"].empty());
  auto k3 = run("interference " + fixture("kolmogorov3"));
  ASSERT_EQ(k3.code, 0);
  EXPECT_TRUE(k3.json()["witnesses"].empty());
  EXPECT_EQ(run("interference " + fixture("wright")).code, 2);
}

TEST(Cli, FixtureMatchesFile) {
  for (const auto& name : fixture_names()) {
    std::ifstream in(fixture(name));
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_EQ(run("fixture " + name).out, text) << name;
  }
}

}  // namespace
