#include <doctest.h>

#include <httplib.h>

#include <chrono>
#include <thread>

#include "harness.hpp"
#include "mofh6/error.hpp"
#include "mofh6/service.hpp"

using namespace mofh6;

namespace {

service::ApiConfig fixture_config(const std::filesystem::path& out) {
  service::ApiConfig c;
  c.corpus_manifest = testing::manifest();
  c.dataset = testing::data_dir() / "dataset.jsonl";
  c.cif_dir = testing::data_dir() / "cifs";
  c.out_dir = out;
  c.gateway = testing::replay_setup();
  c.workers = 2;
  return c;
}

// A service listening on an ephemeral port for the lifetime of the object.
struct LiveServer {
  testing::TempDir out;
  service::Service svc{fixture_config(out.path())};
  httplib::Server http;
  int port = 0;
  std::thread thread;

  LiveServer() {
    svc.install(http);
    port = http.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { http.listen_after_bind(); });
    http.wait_until_ready();
  }
  ~LiveServer() {
    http.stop();
    thread.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(60, 0);
    return c;
  }
};

json body_of(const httplib::Result& r) { return json::parse(r->body); }

void check_schema(const std::string& name, const json& body) {
  auto err = validate_json(service::schemas().at(name), body);
  CHECK_MESSAGE(!err.has_value(), name << ": " << err.value_or(""));
}

json wait_for(httplib::Client& c, const std::string& id) {
  for (int i = 0; i < 600; ++i) {
    auto r = c.Get("/jobs/" + id);
    auto j = body_of(r);
    if (j["status"] == "done" || j["status"] == "failed") return j;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  FAIL("job did not finish");
  return {};
}

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("config validation") {
    service::ApiConfig c = fixture_config("/tmp/unused");
    CHECK_NOTHROW(c.validate());
    c.dataset = "/nonexistent.jsonl";
    try {
      c.validate();
      FAIL("expected InvalidConfig");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidConfig);
    }
    auto j = service::ApiConfig::from_json({{"dataset", "data/x.jsonl"}, {"port", 9000}, {"parser", "llm"}}, "/base");
    CHECK(j.dataset == std::filesystem::path("/base/data/x.jsonl"));
    CHECK(j.port == 9000);
    CHECK(j.engine.parse_mode == query::ParseMode::LlmPrimary);
  }

  TEST_CASE("job submission validation without HTTP") {
    testing::TempDir out;
    service::Service s(fixture_config(out.path()));
    CHECK(s.submit_job(json::object()).status == 400);
    CHECK(s.submit_job({{"doi", "10.1021/x"}, {"ccdc_code", "ABAYUY"}}).status == 400);
    CHECK(s.submit_job({{"doi", ""}}).status == 400);
    auto bad = s.submit_job({{"doi", "nonsense"}});
    CHECK(bad.status == 400);
    CHECK(bad.body["error"] == "MalformedDoi");
    CHECK(s.job_status("job-999999").status == 404);
  }

  TEST_CASE("endpoints over HTTP") {
    LiveServer srv;
    auto c = srv.client();

    auto h = c.Get("/health");
    REQUIRE(h);
    CHECK(h->status == 200);
    check_schema("health", body_of(h));

    SUBCASE("jobs") {
      auto r = c.Post("/jobs", R"({"ccdc_code": "ABAYUY"})", "application/json");
      REQUIRE(r);
      CHECK(r->status == 202);
      auto created = body_of(r);
      check_schema("job_created", created);
      auto done = wait_for(c, created["job_id"]);
      check_schema("job_status", done);
      CHECK(done["status"] == "done");
      CHECK(done["error"].is_null());
      bool has_identifier = false;
      for (const auto& f : done["outputs"])
        if (f == "identifier_ABAYUY.txt") has_identifier = true;
      CHECK(has_identifier);
      auto file = c.Get("/jobs/" + created["job_id"].get<std::string>() + "/files/identifier_ABAYUY.txt");
      REQUIRE(file);
      CHECK(file->status == 200);
      CHECK(file->body == text::read_file(testing::fixture_dir() / "golden" / "identifier_ABAYUY.txt"));
      CHECK(c.Get("/jobs/" + created["job_id"].get<std::string>() + "/files/..%2Fsecret")->status == 404);

      auto miss = body_of(c.Post("/jobs", R"({"doi": "10.1021/acs.cgd.0b99999"})", "application/json"));
      auto failed = wait_for(c, miss["job_id"]);
      check_schema("job_status", failed);
      CHECK(failed["status"] == "failed");
      CHECK(failed["error"] == "NotInCorpus");

      auto two = c.Post("/jobs", R"({"doi": "10.1021/acs.cgd.9b00001", "raw_text": "x"})", "application/json");
      CHECK(two->status == 400);
      check_schema("error", body_of(two));
      CHECK(c.Post("/jobs", "not json", "application/json")->status == 400);
      CHECK(c.Get("/jobs/job-424242")->status == 404);
    }

    SUBCASE("ask") {
      auto r = c.Post("/sessions/s1/ask", R"({"question": "What is the PLD of VUJBEI?"})", "application/json");
      REQUIRE(r);
      CHECK(r->status == 200);
      auto b = body_of(r);
      check_schema("ask_response", b);
      CHECK(b["answer_text"].get<std::string>().find("7.81") != std::string::npos);
      auto ctx = c.Post("/sessions/s1/ask", R"({"question": "What about its density?"})", "application/json");
      CHECK(ctx->status == 200);
      auto clar = c.Post("/sessions/s2/ask", R"({"question": "What about its density?"})", "application/json");
      CHECK(clar->status == 422);
      CHECK(body_of(clar)["error"] == "ContextUnavailable");
      auto unknown = c.Post("/sessions/s1/ask", R"({"question": "What is the PLD of ZZZZZZ?"})", "application/json");
      CHECK(unknown->status == 404);
      CHECK(c.Post("/sessions/s1/ask", "{}", "application/json")->status == 400);
    }

    SUBCASE("cif and viz") {
      auto cif = c.Get("/cif/ABAYUY");
      REQUIRE(cif);
      CHECK(cif->status == 200);
      CHECK(cif->body == text::read_file(testing::data_dir() / "cifs" / "ABAYUY.cif"));
      CHECK(cif->get_header_value("Content-Type") == "chemical/x-cif");
      auto viz = c.Get("/cif/ABAYUY/viz");
      CHECK(viz->status == 200);
      auto v = body_of(viz);
      check_schema("viz_payload", v);
      CHECK(v["atoms"].size() == dataset::parse_cif(cif->body).atoms.size());
      CHECK(c.Get("/cif/ZZZZZZ")->status == 404);
      CHECK(c.Get("/cif/ZZZZZZ/viz")->status == 404);
    }

    SUBCASE("stats") {
      auto s = c.Get("/stats");
      CHECK(s->status == 200);
      check_schema("stats", body_of(s));
      CHECK(body_of(s)["records"] == 200);
      auto hist = c.Get("/stats?property=pld&bin_width=2");
      CHECK(hist->status == 200);
      auto hb = body_of(hist);
      check_schema("stats", hb);
      long total = 0;
      for (const auto& b : hb["bins"]) total += b["count"].get<long>();
      CHECK(total == 200);
      CHECK(c.Get("/stats?property=colour")->status == 400);
      CHECK(c.Get("/stats?property=pld&bin_width=-1")->status == 400);
    }

    SUBCASE("eval") {
      json req = {{"gold", (testing::fixture_dir() / "gold.jsonl").string()},
                  {"pred", (testing::fixture_dir() / "golden").string()}};
      auto r = c.Post("/eval", req.dump(), "application/json");
      CHECK(r->status == 200);
      check_schema("metric_report", body_of(r));
      CHECK(c.Post("/eval", "{}", "application/json")->status == 400);
    }

    SUBCASE("schemas") {
      auto all = c.Get("/schema");
      CHECK(all->status == 200);
      CHECK(body_of(all).contains("job_status"));
      CHECK(c.Get("/schema/ask_response")->status == 200);
      CHECK(c.Get("/schema/nope")->status == 404);
    }
  }

  TEST_CASE("cost projection") {
    auto prices = llm::price_table_from_json(json::parse(text::read_file(testing::data_dir() / "prices.json")));
    auto profile =
        service::cost_profile_from_json(json::parse(text::read_file(testing::data_dir() / "cost_profile.json")));
    auto ledger = service::project_cost(profile, prices, 100);
    double total = ledger->total().to_double();
    CHECK(total >= 1.0);
    CHECK(total < 10.0);
    CHECK(ledger->by_doc().size() == 100);
  }
}
