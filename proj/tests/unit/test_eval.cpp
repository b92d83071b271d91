#include <doctest.h>

#include <cmath>
#include <random>

#include "mofh6/error.hpp"
#include "mofh6/eval.hpp"
#include "support.hpp"

using namespace mofh6;

TEST_SUITE("eval") {
  TEST_CASE("preprocessing") {
    auto p = eval::preprocess_synthesis_text("Synthesis of 1: heated at 120 oC for 72 hours. IR (KBr): 3421 (s).");
    CHECK(p.find("Synthesis of 1") == std::string::npos);
    CHECK(p.find("120 C") != std::string::npos);
    CHECK(p.find("72h") != std::string::npos);
    CHECK(p.find("IR") == std::string::npos);
    CHECK(eval::preprocess_synthesis_text(p) == p);
  }

  TEST_CASE("cosine and pooling") {
    CHECK(eval::cosine({1, 2, 3}, {4, 5, 6}) == doctest::Approx(0.9746).epsilon(1e-4));
    CHECK(eval::cosine({0, 0}, {1, 1}) == 0);
    CHECK_THROWS_AS(eval::cosine({1}, {1, 2}), Error);
    auto v = eval::mean_pool({{3, 4}, {100, 100}}, {1, 0});
    CHECK(v[0] == doctest::Approx(0.6));
    CHECK(v[1] == doctest::Approx(0.8));
    try {
      eval::mean_pool({{1, 1}}, {0});
      FAIL("expected ZeroMask");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ZeroMask);
    }
  }

  TEST_CASE("hashing embedder") {
    eval::HashingEmbedder h;
    auto a = h.embed("Zn nitrate in DMF");
    CHECK(a.size() == 512);
    CHECK(eval::cosine(a, h.embed("zn NITRATE in dmf")) == doctest::Approx(1));
    CHECK(eval::sentence_similarity("x y", "x y", h) == 1.0);
  }

  TEST_CASE("rule cascade") {
    auto v = eval::apply_rules("0.65", "65%", "yield");
    CHECK(v.equivalent == true);
    v = eval::apply_rules("N,N-dimethylformamide (DMF)", "DMF", "solvent_source");
    CHECK(v.equivalent == true);
    CHECK(v.rule_id == "parenthetical-abbreviation");
    CHECK(eval::apply_rules("Teflon-lined autoclave", "stainless steel reactor", "equipment").equivalent == true);
    CHECK(eval::apply_rules("glass vial", "autoclave", "equipment").equivalent == false);
    CHECK(eval::apply_rules("0.5 mmol", "500 umol", "quantity_of_metal").equivalent == true);
    CHECK(eval::apply_rules("5 mL + 5 mL", "10 mL", "quantity_of_solvent").equivalent == true);
    CHECK_FALSE(eval::apply_rules("white blocks", "colourless prisms", "crystal_morphology").equivalent.has_value());
  }

  TEST_CASE("rules are symmetric") {
    std::vector<std::string> pool = {"0.65", "65%", "65 %", "DMF", "N,N-dimethylformamide (DMF)", "5 mL + 5 mL",
                                     "10 mL", "0.5 mmol", "500 umol", "Teflon-lined autoclave", "vial", "C8H4O4",
                                     "H2BDC", "72 h", "3 days"};
    for (const auto& f : {"yield", "solvent_source", "equipment", "quantity_of_solvent"})
      for (const auto& a : pool)
        for (const auto& b : pool) CHECK(eval::apply_rules(a, b, f).equivalent == eval::apply_rules(b, a, f).equivalent);
  }

  TEST_CASE("metrics from counts") {
    auto m = eval::metrics_from_counts({9, 1, 1, 0});
    CHECK(m.precision == doctest::Approx(0.9));
    CHECK(m.recall == doctest::Approx(0.9));
    CHECK(m.f1 == doctest::Approx(0.9));
    auto z = eval::metrics_from_counts({});
    CHECK(z.f1 == 0);
    CHECK(z.accuracy == 0);
  }

  TEST_CASE("gold file and markdown predictions") {
    auto gold = eval::load_gold(testing::fixture_dir() / "gold.jsonl");
    REQUIRE(gold.size() == 3);
    std::string md = "# ABAYUY\n\n| Field | Value |\n| --- | --- |\n| Yield | 65% |\n| Equipment | N/A |\n";
    auto rec = eval::parse_markdown(md);
    CHECK(rec.yield == "65%");
    CHECK_FALSE(rec.equipment.has_value());
  }

  TEST_CASE("evaluating the golden outputs against gold") {
    auto gold = eval::load_gold(testing::fixture_dir() / "gold.jsonl");
    auto pred = eval::load_predictions(testing::fixture_dir() / "golden");
    REQUIRE(pred.size() == 3);
    eval::HashingEmbedder h;
    auto report = eval::compute_metrics(eval::evaluate(gold, pred, {&h, &h}));
    CHECK(report.tp > 0);
    CHECK(report.f1 > 0.5);
    CHECK(report.per_field.count("synthesis_text") == 1);
    auto csv = report.per_field_csv();
    CHECK(csv.rfind("field,", 0) == 0);
  }
}
