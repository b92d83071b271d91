#include <doctest.h>

#include "harness.hpp"
#include "mofh6/error.hpp"

using namespace mofh6;

TEST_SUITE("pipeline") {
  TEST_CASE("doc ids and targets") {
    CHECK(pipeline::doc_id_for("10.1021/ja00001") == "10.1021_ja00001");
    auto store = testing::fixture_store();
    auto by_doi = pipeline::resolve_targets(*store, {}, std::string(testing::kGoldenDoi));
    CHECK(by_doi.size() == 3);
    auto by_code = pipeline::resolve_targets(*store, {"abayei"}, std::string(testing::kGoldenDoi));
    REQUIRE(by_code.size() == 1);
    CHECK(by_code[0].ccdc_code == "ABAYEI");
  }

  TEST_CASE("graph shape") {
    auto g = pipeline::build_pipeline(service::make_gateway(testing::replay_setup()), {});
    std::vector<std::string> names;
    for (const auto& n : g.nodes()) names.push_back(n.name);
    CHECK(names == std::vector<std::string>{"synthesis-parse", "table-parse", "crystal-compare", "abbrev-resolve",
                                            "result-generate", "post-process", "structured-convert"});
  }

  TEST_CASE("golden replay is byte-identical") {
    testing::TempDir dir;
    auto r = testing::run_docs(testing::load_docs({testing::kGoldenDoi}), dir.path(), 1);
    CHECK(r.report.succeeded == 1);
    CHECK(testing::golden_mismatches(dir.path() / testing::kGoldenDocId).empty());
    auto files = pipeline::artifacts(dir.path(), testing::kGoldenDocId);
    CHECK(files.size() >= 7);
  }

  TEST_CASE("failing documents record typed node errors") {
    testing::TempDir dir;
    auto r = testing::run_docs(testing::load_docs(), dir.path(), 2);
    CHECK(r.report.doc_count == 3);
    CHECK(r.report.succeeded == 1);
    std::map<std::string, std::pair<std::string, std::string>> first_error;
    for (const auto& s : r.states)
      if (!s.errors.empty()) first_error[s.doc_id] = {s.errors[0].node, s.errors[0].kind};
    CHECK(first_error["10.1039_c9ce00002a"] == std::make_pair(std::string("table-parse"), std::string("SchemaViolation")));
    CHECK(first_error["10.1016_j.ica.2019.00003"] ==
          std::make_pair(std::string("crystal-compare"), std::string("UnparseableFormula")));
  }

  TEST_CASE("replay without a fixture is FixtureMissing") {
    testing::TempDir fixtures, out;
    service::GatewaySetup g;
    g.mode = llm::Mode::Replay;
    g.fixture_dir = fixtures.path();
    auto r = testing::run_docs(testing::load_docs({testing::kGoldenDoi}), out.path(), 1, service::make_gateway(g));
    REQUIRE(r.states.size() == 1);
    REQUIRE_FALSE(r.states[0].errors.empty());
    CHECK(r.states[0].errors[0].kind == "FixtureMissing");
  }
}
