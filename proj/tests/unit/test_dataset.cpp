#include <doctest.h>

#include <cmath>
#include <random>

#include "generators.hpp"
#include "mofh6/dataset.hpp"
#include "mofh6/error.hpp"
#include "support.hpp"

using namespace mofh6;

TEST_SUITE("dataset") {
  TEST_CASE("line errors are collected, good lines kept") {
    std::mt19937_64 rng(1);
    auto good = json(testing::random_records(rng, 1)[0]).dump();
    auto r = dataset::Store::parse(good + "\n\nnot json\n" + good + "\n{\"ccdc_code\": 3}\n");
    CHECK(r.store.size() == 1);
    REQUIRE(r.errors.size() == 3);
    CHECK(r.errors[0].line == 3);
    CHECK(r.errors[0].kind == "SchemaViolation");
    CHECK(r.errors[1].kind == "DuplicateKey");
    CHECK(r.errors[2].line == 5);
    CHECK_THROWS_AS(dataset::Store::load("/nonexistent.jsonl"), Error);
  }

  TEST_CASE("fixture dataset loads cleanly") {
    auto r = dataset::Store::load(testing::data_dir() / "dataset.jsonl");
    CHECK(r.errors.empty());
    CHECK(r.store.size() == 200);
    CHECK(r.store.find("abayuy") != nullptr);
    CHECK(r.store.find_by_doi("10.1021/acs.cgd.9b00001").size() == 3);
    auto mof5 = r.store.find_by_name("MOF-5");
    std::vector<std::string> codes;
    for (const auto* m : mof5) codes.push_back(m->ccdc_code);
    CHECK(codes == std::vector<std::string>{"SAHYIK", "SAHYOQ", "SAHYUW"});  // not MOF-50
  }

  TEST_CASE("record json round trip") {
    std::mt19937_64 rng(3);
    for (const auto& r : testing::random_records(rng, 50)) {
      auto back = mof_record_from_json(json(r));
      CHECK(json(back) == json(r));
    }
  }

  TEST_CASE("property aliases") {
    CHECK(dataset::canonical_property("pore limiting diameter") == "pld");
    CHECK(dataset::canonical_property("PLD (Å)") == "pld");
    CHECK(dataset::canonical_property("Accessible_Surface_Area (m2/cm3)") == "vsa");
    CHECK_FALSE(dataset::canonical_property("colour").has_value());
    CHECK_THROWS_AS(dataset::property("colour"), Error);
  }

  TEST_CASE("range queries match a linear scan") {
    std::mt19937_64 rng(11);
    auto recs = testing::random_records(rng, 300);
    auto store = dataset::Store::from_records(recs);
    std::uniform_real_distribution<double> lo(2, 12);
    for (int t = 0; t < 30; ++t) {
      double a = testing::round_to(lo(rng), 0.1), b = a + 4;
      dataset::PropertyFilter f;
      f.between("PLD", a, b).between("density", std::nullopt, 1.5);
      std::vector<std::string> want;
      for (const auto& r : store.records())
        if (r.pore.pld >= a && r.pore.pld <= b && r.pore.density <= 1.5) want.push_back(r.ccdc_code);
      std::vector<std::string> got;
      for (const auto* r : store.query(f)) got.push_back(r->ccdc_code);
      CHECK(got == want);
    }
    dataset::PropertyFilter bad;
    bad.between("colour", 0, 1);
    CHECK_THROWS_AS(store.query(bad), Error);
  }

  TEST_CASE("aggregates and ties") {
    std::mt19937_64 rng(5);
    auto recs = testing::random_records(rng, 4);
    recs[0].pore.density = recs[2].pore.density = 3.0;
    recs[1].pore.density = 1.0;
    recs[3].pore.density = 2.0;
    auto store = dataset::Store::from_records(recs);
    auto mx = store.aggregate("density", dataset::AggregateOp::Max);
    CHECK(mx.value == 3.0);
    auto w = std::vector<std::string>{recs[0].ccdc_code, recs[2].ccdc_code};
    std::sort(w.begin(), w.end());
    CHECK(mx.witnesses == w);
    CHECK(store.aggregate("density", dataset::AggregateOp::Mean).value == doctest::Approx(2.25));
    dataset::PropertyFilter f;
    f.between("density", 2.0, std::nullopt);
    CHECK(store.aggregate("density", dataset::AggregateOp::CountIf, f).value == 3);
    CHECK_THROWS_AS(dataset::Store().aggregate("density", dataset::AggregateOp::Max), Error);
  }

  TEST_CASE("histogram bins cover every record once") {
    std::mt19937_64 rng(9);
    auto store = dataset::Store::from_records(testing::random_records(rng, 200));
    auto bins = store.histogram("pld", 2.5);
    std::size_t total = 0;
    for (std::size_t i = 0; i < bins.size(); ++i) {
      total += bins[i].count;
      CHECK(bins[i].hi - bins[i].lo == doctest::Approx(2.5));
      if (i) CHECK(bins[i].lo == doctest::Approx(bins[i - 1].hi));
    }
    CHECK(total == 200);
    CHECK_THROWS_AS(store.histogram("pld", 0), Error);
  }

  TEST_CASE("cif parse, emit, parse") {
    auto src = text::read_file(testing::data_dir() / "cifs" / "ABAYUY.cif");
    auto m = dataset::parse_cif(src);
    CHECK(*m.cell.a == doctest::Approx(10.234));
    CHECK(*m.cell.beta == doctest::Approx(105.43));
    CHECK(m.cell.space_group_canonical == "P21/c");
    REQUIRE(m.atoms.size() > 4);
    CHECK(m.atoms[0] == dataset::CifAtom{"Zn1", "Zn", 0.25, 0.25, 0.25});
    auto again = dataset::parse_cif(dataset::emit_cif(m));
    CHECK(again.atoms == m.atoms);
    CHECK(*again.cell.c == *m.cell.c);
    CHECK(dataset::emit_cif(again) == dataset::emit_cif(m));
  }

  TEST_CASE("cif errors") {
    try {
      dataset::parse_cif("data_x\n_cell_length_a 10\n");
      FAIL("expected MissingCellBlock");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::MissingCellBlock);
    }
    std::string bad =
        "data_x\n_cell_length_a 10\n_cell_length_b 10\n_cell_length_c 10\n_cell_angle_alpha 90\n"
        "_cell_angle_beta 90\n_cell_angle_gamma 90\nloop_\n_atom_site_label\n_atom_site_type_symbol\n"
        "_atom_site_fract_x\n_atom_site_fract_y\n_atom_site_fract_z\nZn1 Zn 0.1 0.2\n";
    try {
      dataset::parse_cif(bad);
      FAIL("expected MalformedLoop");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::MalformedLoop);
    }
  }

  TEST_CASE("lattice vectors") {
    CellParameters c;
    c.a = 10;
    c.b = 12;
    c.c = 14;
    c.alpha = 80;
    c.beta = 105;
    c.gamma = 95;
    auto v = dataset::lattice_vectors(c);
    auto dot = [&](int i, int j) { return v[i][0] * v[j][0] + v[i][1] * v[j][1] + v[i][2] * v[j][2]; };
    const double rad = M_PI / 180;
    CHECK(std::sqrt(dot(0, 0)) == doctest::Approx(10));
    CHECK(std::sqrt(dot(2, 2)) == doctest::Approx(14));
    CHECK(dot(1, 2) / (12 * 14) == doctest::Approx(std::cos(80 * rad)));
    CHECK(dot(0, 2) / (10 * 14) == doctest::Approx(std::cos(105 * rad)));
    CHECK(dot(0, 1) / (10 * 12) == doctest::Approx(std::cos(95 * rad)));
    CHECK(v[0][1] == 0);
    CHECK(v[0][2] == 0);
    CHECK(v[1][2] == 0);
  }

  TEST_CASE("viz payload") {
    dataset::CifModel m;
    m.cell.a = m.cell.b = m.cell.c = 10;
    m.cell.alpha = m.cell.beta = m.cell.gamma = 90;
    m.atoms = {{"Zn1", "Zn", 0.5, 0.5, 0.5}, {"O1", "O", 0.5, 0.5, 0.68}, {"O2", "O", 0, 0, 0}};
    auto v = dataset::viz_payload(m);
    REQUIRE(v["atoms"].size() == 3);
    CHECK(v["atoms"][0]["x"].get<double>() == doctest::Approx(5));
    CHECK(v["atoms"][0]["z"].get<double>() == doctest::Approx(5));
    CHECK(v["bonds"] == json::array({json::array({0, 1})}));
  }

  TEST_CASE("cif store lookup rejects paths") {
    dataset::CifStore s(testing::data_dir() / "cifs");
    CHECK(s.find("abayuy").has_value());
    CHECK_FALSE(s.find("../dataset").has_value());
    CHECK_FALSE(s.find("ZZZZZZ").has_value());
  }
}
