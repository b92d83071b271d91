#include <doctest.h>

#include <cmath>
#include <random>

#include "mofh6/chem.hpp"
#include "mofh6/error.hpp"
#include "mofh6/json_schema.hpp"
#include "mofh6/text.hpp"

using namespace mofh6;

TEST_SUITE("text") {
  TEST_CASE("utf8 round trip") {
    std::string s;
    for (char32_t cp : {U'A', U'Å', U'₂', U'😀'}) text::append_utf8(s, cp);
    CHECK(text::is_valid_utf8(s));
    std::size_t pos = 0;
    CHECK(text::decode_utf8(s, pos) == U'A');
    CHECK(text::decode_utf8(s, pos) == U'Å');
    CHECK(text::decode_utf8(s, pos) == U'₂');
    CHECK(text::decode_utf8(s, pos) == U'😀');
    CHECK(pos == s.size());
    CHECK_FALSE(text::is_valid_utf8("\xC3"));
  }

  TEST_CASE("case helpers and trimming") {
    CHECK(text::to_upper("abayuy") == "ABAYUY");
    CHECK(text::trim("  x y \n") == "x y");
    CHECK(text::iequals("VuJbEi", "vujbei"));
    CHECK(text::starts_with_icase("Synthesis of", "synth"));
    CHECK(text::split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(text::join({"a", "b"}, ", ") == "a, b");
    CHECK(text::replace_all("aXbXc", "X", "--") == "a--b--c");
  }

  TEST_CASE("subscript flattening keeps byte origins") {
    auto f = text::flatten_subscripts("H₂L");
    CHECK(f.text == "H2L");
    REQUIRE(f.origin.size() == f.text.size() + 1);
    CHECK(f.origin[0] == 0);
    CHECK(f.origin[1] == 1);
    CHECK(f.origin[2] == 4);  // "₂" is three bytes
    CHECK(f.origin[3] == 5);
  }

  TEST_CASE("sentence split respects abbreviations") {
    std::string s = "Yield: 65%. Anal. Calcd for C16H16N2O6Zn: C, 48.32. Found: C, 48.10.";
    auto spans = text::split_sentences(s);
    REQUIRE(spans.size() == 3);
    CHECK(s.substr(spans[1].start, spans[1].end - spans[1].start).rfind("Anal.", 0) == 0);
  }

  TEST_CASE("crystallographic decimals") {
    CHECK(text::parse_decimal("10.234(2)") == doctest::Approx(10.234));
    CHECK(text::parse_decimal(" 105.43(1) ") == doctest::Approx(105.43));
    CHECK(text::parse_decimal("\xE2\x88\x92" "1.5") == doctest::Approx(-1.5));
    CHECK_FALSE(text::parse_decimal("10 Å").has_value());
    CHECK_FALSE(text::parse_decimal("").has_value());
  }

  TEST_CASE("format_number round-trips") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-1e6, 1e6);
    for (int i = 0; i < 500; ++i) {
      double v = d(rng);
      CHECK(std::stod(text::format_number(v)) == v);
    }
    CHECK(text::format_number(10.0) == "10");
    CHECK(text::format_number(0.621) == "0.621");
  }
}

TEST_SUITE("chem") {
  TEST_CASE("formula parsing") {
    auto c = chem::parse_formula("Zn(NO3)2·6H2O");
    CHECK(c["Zn"] == 1);
    CHECK(c["N"] == 2);
    CHECK(c["O"] == 12);
    CHECK(c["H"] == 12);
    auto t = chem::parse_formula("C24 H12 O13 Zn4");
    CHECK(t["Zn"] == 4);
    CHECK(t["O"] == 13);
    auto n = chem::parse_formula("Zn4O(C8H4O4)3");
    CHECK(n["C"] == 24);
    CHECK(n["O"] == 13);
  }

  TEST_CASE("bad formulas") {
    CHECK_THROWS_AS(chem::parse_formula("C11H11?NO5"), Error);
    CHECK_FALSE(chem::try_parse_formula("Xx2").has_value());
    try {
      chem::parse_formula("");
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UnparseableFormula);
    }
  }

  TEST_CASE("metals and hill order") {
    CHECK(chem::is_metal("Zn"));
    CHECK(chem::is_metal("Zr"));
    CHECK_FALSE(chem::is_metal("C"));
    CHECK_FALSE(chem::is_metal("Cl"));
    CHECK(chem::is_metal_name("cupric"));
    CHECK(chem::is_metal_name("Zinc"));
    CHECK_FALSE(chem::is_metal_name("carbon"));
    auto c = chem::parse_formula("C16H16CoN2O6");
    CHECK(chem::metals_of(c) == chem::Composition{{"Co", 1}});
    CHECK(chem::hill_formula(c) == "C16H16CoN2O6");
    CHECK(chem::covalent_radius("C") > 0.5);
  }
}

TEST_SUITE("json_schema") {
  TEST_CASE("validation paths") {
    json schema = {{"type", "object"},
                   {"required", {"a"}},
                   {"properties",
                    {{"a", {{"type", "integer"}, {"minimum", 0}}},
                     {"b", {{"type", "array"}, {"items", {{"type", "string"}}}, {"minItems", 1}}},
                     {"c", {{"enum", {"x", "y"}}}},
                     {"d", {{"type", json::array({"string", "null"})}}}}},
                   {"additionalProperties", false}};
    CHECK_FALSE(validate_json(schema, {{"a", 1}, {"b", {"s"}}, {"c", "x"}, {"d", nullptr}}).has_value());
    CHECK(validate_json(schema, json::object()).has_value());
    CHECK(validate_json(schema, {{"a", -1}}).has_value());
    CHECK(validate_json(schema, {{"a", 1}, {"b", json::array()}}).has_value());
    CHECK(validate_json(schema, {{"a", 1}, {"b", {1}}}).value().find("/b/0") != std::string::npos);
    CHECK(validate_json(schema, {{"a", 1}, {"c", "z"}}).has_value());
    CHECK(validate_json(schema, {{"a", 1}, {"extra", 1}}).has_value());
  }

  TEST_CASE("object-valued additionalProperties") {
    json schema = {{"type", "object"}, {"additionalProperties", {{"type", "number"}}}};
    CHECK_FALSE(validate_json(schema, {{"PLD", 7.5}}).has_value());
    CHECK(validate_json(schema, {{"PLD", "7.5"}}).has_value());
  }
}

TEST_SUITE("error") {
  TEST_CASE("kind names") {
    Error e(ErrorKind::ContextUnavailable, "no previous material");
    CHECK(e.kind_name() == "ContextUnavailable");
    CHECK(std::string(e.what()) == "no previous material");
    CHECK(to_string(ErrorKind::NotInCorpus) == "NotInCorpus");
  }
}
