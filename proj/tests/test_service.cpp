#include <doctest.h>

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "test_support.hpp"
#include "xwalk/service.hpp"

using namespace xwalk;
using json = nlohmann::json;

namespace {

using Params = std::multimap<std::string, std::string>;

WalkParams defaults() {
  WalkParams p;
  p.walks = 2000;
  p.hops = 3;
  p.top_k = 10;
  return p;
}

}  // namespace

TEST_SUITE("cli_service") {
  TEST_CASE("health") {
    const auto g = test::build_from(test::table1_records(), true);
    const RetrievalService svc(g, defaults());
    const auto r = svc.health();
    CHECK(r.status == 200);
    CHECK(r.body == "ok");
  }

  TEST_CASE("retrieve replies") {
    const auto g = test::build_from(test::table1_records(), true);
    const RetrievalService svc(g, defaults());

    const auto ok = svc.retrieve({{"q", "wedding gown"}, {"seed", "7"}});
    REQUIRE(ok.status == 200);
    const auto body = json::parse(ok.body);
    CHECK(body["query"] == "wedding gown");
    REQUIRE(body["results"].size() >= 1);
    CHECK(body["results"][0]["listing"] == "l12");
    CHECK(body["results"][0]["score"].get<double>() > 0);
    CHECK(svc.retrieve({{"q", "wedding gown"}, {"seed", "7"}}).body == ok.body);

    const auto direct = retrieve(g, "wedding gown", defaults(), 7);
    CHECK(body["results"].size() == direct.results.size());

    const auto one_hop = json::parse(svc.retrieve({{"q", "wedding gown"}, {"hops", "1"}, {"walks", "50"}}).body);
    CHECK(one_hop["results"] == json::parse(R"([{"listing":"l12","score":50.0}])"));

    const auto cold = svc.retrieve({{"q", "never seen"}});
    CHECK(cold.status == 404);
    CHECK(json::parse(cold.body) == json::parse(R"({"error":"cold_start"})"));

    CHECK(svc.retrieve({{"q", "wedding gown"}, {"hops", "2"}}).status == 400);
    CHECK(svc.retrieve({{"q", "wedding gown"}, {"walks", "lots"}}).status == 400);
    CHECK(svc.retrieve({{"q", "wedding gown"}, {"topk", "0"}}).status == 400);
    CHECK(svc.retrieve(Params{}).status == 400);
  }

  TEST_CASE("bind address parsing") {
    CHECK(parse_bind_address("127.0.0.1:8080") == std::pair<std::string, int>{"127.0.0.1", 8080});
    CHECK(parse_bind_address("localhost:0").second == 0);
    CHECK_THROWS_AS(parse_bind_address("8080"), std::invalid_argument);
    CHECK_THROWS_AS(parse_bind_address("host:"), std::invalid_argument);
    CHECK_THROWS_AS(parse_bind_address("host:99999"), std::invalid_argument);
    CHECK_THROWS_AS(parse_bind_address("host:80x"), std::invalid_argument);
  }

  TEST_CASE("live HTTP round trip") {
    const auto g = test::build_from(test::table1_records(), true);
    const RetrievalService svc(g, defaults());
    HttpFrontend http(svc, 2000);
    const int port = http.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread server([&] { http.run(); });

    httplib::Client client("127.0.0.1", port);
    client.set_connection_timeout(2);
    const auto health = client.Get("/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    CHECK(health->body == "ok");

    const auto a = client.Get("/retrieve?q=wedding%20dress&seed=3&walks=500");
    const auto b = client.Get("/retrieve?q=wedding%20dress&seed=3&walks=500");
    REQUIRE(a);
    REQUIRE(b);
    CHECK(a->status == 200);
    CHECK(a->body == b->body);
    CHECK_FALSE(json::parse(a->body)["results"].empty());

    const auto cold = client.Get("/retrieve?q=unknown");
    REQUIRE(cold);
    CHECK(cold->status == 404);
    CHECK(json::parse(cold->body)["error"] == "cold_start");

    const auto even = client.Get("/retrieve?q=wedding%20dress&hops=4");
    REQUIRE(even);
    CHECK(even->status == 400);

    http.stop();
    server.join();
  }
}
