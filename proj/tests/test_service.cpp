#include <chrono>
#include <thread>

#include "doctest.h"
#include "fixtures.hpp"
#include "httplib.h"
#include "json.hpp"
#include "lexd/service.hpp"

using namespace lexd;
using json = nlohmann::json;

namespace {

json body_for(const std::filesystem::path& input) {
    return json{{"input", input.string()}, {"features", fixture::small_features()}, {"min_size", 20}, {"lags", "[1]"}};
}

json poll_run(httplib::Client& cli, const std::string& id) {
    for (int i = 0; i < 600; ++i) {
        auto res = cli.Get("/api/runs/" + id);
        REQUIRE(res);
        if (res->status == 200) {
            auto j = json::parse(res->body);
            if (!j.contains("status") || j["status"] != "running") return j;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    FAIL("run did not finish");
    return {};
}

}  // namespace

TEST_CASE("http api") {
    fixture::TempDir dir("service");
    fixture::write_corpus(dir / "corpus.csv");
    Service service(dir / "state");
    const int port = service.start("127.0.0.1", 0);
    REQUIRE(port > 0);
    httplib::Client cli("127.0.0.1", port);
    cli.set_read_timeout(30);

    auto health = cli.Get("/api/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    CHECK(json::parse(health->body)["status"] == "ok");

    SUBCASE("unknown config key is rejected with its name") {
        auto body = body_for(dir / "corpus.csv");
        body["colour"] = "red";
        auto res = cli.Post("/api/runs", body.dump(), "application/json");
        REQUIRE(res);
        CHECK(res->status == 400);
        CHECK(json::parse(res->body)["error"].get<std::string>().find("colour") != std::string::npos);

        res = cli.Post("/api/runs", "not json", "application/json");
        REQUIRE(res);
        CHECK(res->status == 400);
        res = cli.Post("/api/runs", json{{"input", (dir / "nope.csv").string()}}.dump(), "application/json");
        REQUIRE(res);
        CHECK(res->status == 400);
    }

    SUBCASE("submit, poll, read subgroups and radar") {
        const auto body = body_for(dir / "corpus.csv").dump();
        auto res = cli.Post("/api/runs", body, "application/json");
        REQUIRE(res);
        CHECK(res->status == 202);
        const std::string id = json::parse(res->body)["run_id"];
        CHECK(id.size() == 16);
        CHECK(id.find_first_not_of("0123456789abcdef") == std::string::npos);

        const auto doc = poll_run(cli, id);
        CHECK(doc["run_id"] == id);
        REQUIRE(doc["lags"].size() == 1);
        CHECK(doc["lags"][0]["lag"] == 1);
        CHECK(parse_document(doc.dump()).run_id == id);

        res = cli.Post("/api/runs", body, "application/json");
        REQUIRE(res);
        CHECK(res->status == 200);
        CHECK(json::parse(res->body)["existing"] == true);
        CHECK(json::parse(res->body)["run_id"] == id);

        res = cli.Get("/api/runs/" + id + "/subgroups?lag=1");
        REQUIRE(res);
        REQUIRE(res->status == 200);
        const auto sg = json::parse(res->body);
        CHECK(sg["population"]["instance_count"] == 340);
        REQUIRE_FALSE(sg["subgroups"].empty());
        const auto& top = sg["subgroups"][0];
        for (const char* key : {"pattern", "size", "subgroup_mean", "population_mean", "quality"}) {
            CHECK(top.contains(key));
        }
        CHECK(top["size"].get<int>() >= 20);

        res = cli.Get("/api/runs/" + id + "/radar?lag=1");
        REQUIRE(res);
        REQUIRE(res->status == 200);
        const auto radar = json::parse(res->body);
        CHECK(radar["axes"] == json::array({"quality", "size", "subgroup_mean"}));
        REQUIRE(radar["subgroups"].size() == sg["subgroups"].size());
        const auto& first = radar["subgroups"][0];
        CHECK(first["pattern"] == top["pattern"]);
        for (const auto& sel : first["selectors"]) {
            CHECK(first["attribute_values"][sel["attribute"].get<std::string>()] == sel["ordinal"]);
        }

        CHECK(cli.Get("/api/runs/" + id + "/subgroups")->status == 200);
        CHECK(cli.Get("/api/runs/" + id + "/subgroups?lag=0")->status == 404);
        CHECK(cli.Get("/api/runs/" + id + "/subgroups?lag=x")->status == 400);
        CHECK(cli.Get("/api/runs/abc123/subgroups?lag=1")->status == 404);
        CHECK(cli.Get("/api/runs/abc123")->status == 404);

        auto list = cli.Get("/api/runs");
        REQUIRE(list);
        const auto runs = json::parse(list->body);
        REQUIRE(runs.size() == 1);
        CHECK(runs[0]["run_id"] == id);
        CHECK(runs[0]["status"] == "done");

        CHECK(std::filesystem::exists(dir / "state" / id / "result.json"));
        CHECK(std::filesystem::exists(dir / "state" / id / "subgroups_lag1.csv"));

        // a fresh store over the same directory serves the stored run
        service.stop();
        RunStore reopened(dir / "state");
        const auto entry = reopened.get(id);
        REQUIRE(entry.has_value());
        CHECK(entry->status == RunStore::Status::done);
        CHECK(*entry->result == parse_document(doc.dump()));
    }
}

TEST_CASE("config from json") {
    const auto cfg = config_from_json(R"({"input": "x.csv", "min_size": 7, "lags": [0, 2], "pruning": false})");
    CHECK(cfg.search.min_size == 7);
    CHECK(cfg.lags == std::vector<std::size_t>{0, 2});
    CHECK_FALSE(cfg.search.pruning);
    CHECK_THROWS_AS(config_from_json("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"top_k": "lots"})"), ConfigError);
}
