#include <doctest.h>

#include "harness.hpp"
#include "mofh6/error.hpp"
#include "mofh6/query.hpp"

using namespace mofh6;

namespace {

const std::vector<std::string> kCanonical = {
    "What is the PLD of MOF-5?",
    "What is the PLD of VUJBEI?",
    "What about its density?",
    "Find MOFs with PLD between 7.5 and 10 Å and LCD between 10 and 16 Å",
    "Show more results",
    "Give me MOFs with PLD between 7.5-10 Å, LCD between 10-16 Å, and VSA between 2000-2400 m2/cm3",
    "Give me 5 more",
    "Compare the density of VUJBEI and QOWTIG",
    "What is the average density of the MOF-5 series?",
    "Find the MOF with the maximum density",
    "What is the PLD of SAHYIK?",
};

std::vector<std::string> codes(const query::QueryResult& r) {
  std::vector<std::string> out;
  for (const auto& row : r.rows) out.push_back(row.code);
  return out;
}

}  // namespace

TEST_SUITE("query") {
  TEST_CASE("rule parser on canonical questions") {
    auto p = query::parse_rules(kCanonical[0]);
    CHECK(p.query_type == query::QueryType::Property);
    CHECK(p.materials == std::vector<std::string>{"MOF-5"});
    CHECK(p.properties == std::vector<std::string>{"PLD (Å)"});

    p = query::parse_rules(kCanonical[2]);
    CHECK(p.uses_context);
    CHECK(p.materials.empty());

    p = query::parse_rules(kCanonical[5]);
    CHECK(p.query_type == query::QueryType::Range);
    CHECK(p.range_min.at("VSA") == 2000);
    CHECK(p.range_max.at("VSA") == 2400);
    CHECK(p.range_min.at("PLD") == 7.5);

    p = query::parse_rules(kCanonical[6]);
    CHECK(p.query_type == query::QueryType::Paging);
    CHECK(p.page_size == 5);
    CHECK_FALSE(p.paged_index.has_value());

    p = query::parse_rules(kCanonical[8]);
    CHECK(p.query_type == query::QueryType::Statistical);
    CHECK(p.operation == query::OpType::Mean);

    CHECK(query::parse_rules("hello there").query_type == query::QueryType::Greeting);
    CHECK(query::parse_rules("start over").query_type == query::QueryType::Reset);
  }

  TEST_CASE("parsed query json round trip ignores reasoning") {
    for (const auto& q : kCanonical) {
      auto p = query::parse_rules(q);
      auto back = query::parsed_query_from_json(query::to_json(p));
      CHECK(back.same_as(p));
      back.reasoning = {"other"};
      CHECK(back.same_as(p));
    }
    CHECK_THROWS_AS(query::parsed_query_from_json(json::parse(R"({"query_type": "bogus"})")), Error);
  }

  TEST_CASE("llm replay parses equal the rule parser") {
    auto gw = service::make_gateway(testing::replay_setup());
    query::SessionContext ctx;
    query::ParseOptions o{query::ParseMode::LlmPrimary, gw.get(), "gpt-4o-mini", "rec"};
    for (const auto& q : kCanonical) CHECK(query::parse_query(q, ctx, o).same_as(query::parse_rules(q)));
  }

  TEST_CASE("context and clarification") {
    query::Engine e(testing::fixture_store(), {});
    auto a = e.ask("s", "What about its density?");
    CHECK(a.clarification);
    e.ask("s", "What is the PLD of VUJBEI?");
    a = e.ask("s", "What about its density?");
    CHECK_FALSE(a.clarification);
    CHECK(a.structured_result["rows"][0]["ccdc_code"] == "VUJBEI");
    CHECK(e.ask("other", "What about its density?").clarification);
    CHECK_THROWS_AS(e.ask("s", "What is the PLD of NOSUCH-MOF-77?"), Error);
  }

  TEST_CASE("paging concatenates to the unpaged result") {
    auto store = testing::fixture_store();
    query::SessionContext ctx;
    auto first = query::execute(query::parse_rules(kCanonical[3]), ctx, *store);
    auto all = codes(first);
    while (all.size() < first.total) {
      auto page = query::execute(query::apply_context(query::parse_rules("Show more results"), ctx), ctx, *store);
      CHECK(page.offset == all.size());
      REQUIRE_FALSE(page.rows.empty());
      for (auto& c : codes(page)) all.push_back(c);
    }
    CHECK(all.size() == 24);
    std::vector<std::string> want;
    dataset::PropertyFilter f;
    f.between("PLD", 7.5, 10).between("LCD", 10, 16);
    for (const auto* r : store->query(f)) want.push_back(r->ccdc_code);
    CHECK(all == want);
  }

  TEST_CASE("history is bounded") {
    query::SessionContext ctx(3);
    for (int i = 0; i < 5; ++i) ctx.remember({std::to_string(i), {}, {}, {}});
    REQUIRE(ctx.history.size() == 3);
    CHECK(ctx.history.front().question == "2");
  }

  TEST_CASE("statistics") {
    query::Engine e(testing::fixture_store(), {});
    auto a = e.ask("s", kCanonical[8]);
    CHECK(a.structured_result["aggregate"]["value"].get<double>() == doctest::Approx(0.609));
    a = e.ask("s", kCanonical[9]);
    CHECK(a.structured_result["aggregate"]["witnesses"] == json::array({"QCOMVA"}));
  }

  TEST_CASE("numeric post-check rejects misquoted answers") {
    auto gw = service::make_gateway(testing::replay_setup());
    query::EngineConfig cfg;
    cfg.compose_mode = query::ComposeMode::Llm;
    query::Engine e(testing::fixture_store(), cfg, gw.get());
    auto bad = e.ask("rec-answer", "What is the PLD of MOF-5?");
    CHECK(bad.answer_text.find("7.77") != std::string::npos);
    auto adv = e.ask("rec-answer", "What is the PLD of SAHYIK?");
    CHECK(adv.answer_text.find("9.99") == std::string::npos);
    CHECK(adv.answer_text.find("7.77") != std::string::npos);
  }

  TEST_CASE("numbers_faithful") {
    query::QueryResult r;
    r.type = query::QueryType::Property;
    r.properties = {"PLD (Å)"};
    r.rows = {{"SAHYIK", "MOF-5", {7.77}}};
    r.total = 1;
    CHECK(query::numbers_faithful("SAHYIK has a PLD of 7.77 Å.", r));
    CHECK_FALSE(query::numbers_faithful("SAHYIK has a PLD of 9.99 Å.", r));
  }
}
