#include "support.hpp"

#include "attentiv/tcp.hpp"
#include "attentiv/wire_protocol.hpp"

#include <doctest.h>

#include <thread>

using namespace attentiv;
using namespace attentiv::wire;

namespace {

std::shared_ptr<stream::ModelRegistry> registry() {
  static const auto models = [] {
    auto r = std::make_shared<stream::ModelRegistry>();
    r->add("nb", testsupport::band_model(Algorithm::nb, 3));
    return r;
  }();
  return models;
}

json samples_message(const std::string& id, const std::vector<dsp::RawSample>& raw) {
  json rows = json::array();
  for (const auto& s : raw) rows.push_back({s.timestamp, s.channel, s.value});
  return {{"type", "samples"}, {"session_id", id}, {"samples", rows}};
}

std::string open_session(ProtocolHandler& h, double acclimation = 0.0) {
  const auto r = h.handle({{"type", "open"},
                           {"subject_id", "s01"},
                           {"material_id", "video-1"},
                           {"model_id", "nb"},
                           {"acclimation_s", acclimation}});
  REQUIRE(r.size() == 1);
  REQUIRE(r[0]["type"] == "open_ack");
  return r[0]["session_id"].get<std::string>();
}

}  // namespace

TEST_SUITE("wire_protocol") {

TEST_CASE("open acknowledges with session details") {
  stream::SessionManager mgr(registry());
  ProtocolHandler h(mgr);
  const auto r = h.handle({{"type", "open"},
                           {"subject_id", "s01"},
                           {"material_id", "video-1"},
                           {"model_id", "nb"},
                           {"id", 7}});
  REQUIRE(r.size() == 1);
  CHECK(r[0]["type"] == "open_ack");
  CHECK(r[0]["phase"] == "acclimating");
  CHECK(r[0]["acclimation_ticks"] == 120 * 128);
  CHECK(r[0]["protocol"] == kProtocolVersion);
  CHECK(r[0]["model_id"] == "nb");
  CHECK(r[0]["id"] == 7);
  CHECK(is_terminal(r[0]));
}

TEST_CASE("samples produce prediction lines then an ack") {
  stream::SessionManager mgr(registry());
  ProtocolHandler h(mgr);
  const auto id = open_session(h);
  const auto r = h.handle(samples_message(id, testsupport::raw_stream(300, 1, 1)));
  REQUIRE(r.size() == 3);
  CHECK(r[0]["type"] == "prediction");
  CHECK(r[0]["window_start"] == 1);
  CHECK(r[1]["window_start"] == 129);
  CHECK_FALSE(is_terminal(r[0]));
  CHECK(r[2]["type"] == "ack");
  CHECK(r[2]["request"] == "samples");
  CHECK(r[2]["accepted"] == 300);
  CHECK(r[2]["predictions"] == 2);
  CHECK(r[2]["buffered"] == 44);
  CHECK(r[2]["dropped"] == 0);
  for (const char* band : {"alpha", "beta", "theta", "delta", "gamma"}) {
    CHECK(r[0]["energies"].contains(band));
  }
  // the lines carry exactly the service's predictions
  const auto p = mgr.all_predictions(id);
  CHECK(prediction_from_json(r[0]) == p[0]);
  CHECK(prediction_from_json(r[1]) == p[1]);
}

TEST_CASE("prediction JSON round trip is exact") {
  stream::WirePrediction p{"session-4", 1234, {1.5, 2.25, 1e-300, 7e12, 0.1}, 1, -0.3, "nb", false, false};
  CHECK(prediction_from_json(json::parse(to_json(p).dump())) == p);
}

TEST_CASE("poll returns predictions after the cursor") {
  stream::SessionManager mgr(registry());
  ProtocolHandler h(mgr);
  const auto id = open_session(h);
  h.handle(samples_message(id, testsupport::raw_stream(256, 1, 1)));
  const auto all = h.handle({{"type", "poll"}, {"session_id", id}});
  REQUIRE(all.size() == 3);
  CHECK(all[2]["count"] == 2);
  const auto after = h.handle({{"type", "poll"}, {"session_id", id}, {"after", 1}});
  REQUIRE(after.size() == 2);
  CHECK(after[0]["window_start"] == 129);
  const auto none = h.handle({{"type", "poll"}, {"session_id", id}, {"after", 129}});
  REQUIRE(none.size() == 1);
  CHECK(none[0]["count"] == 0);
}

TEST_CASE("full session lifecycle over the handler") {
  stream::SessionManager mgr(registry());
  ProtocolHandler h(mgr);
  const auto id = open_session(h);
  h.handle(samples_message(id, testsupport::raw_stream(128 * 120, 2)));
  auto r = h.handle({{"type", "phase"}, {"session_id", id}, {"phase", "resting"}});
  CHECK(r[0]["phase"] == "resting");
  r = h.handle({{"type", "phase"}, {"session_id", id}, {"phase", "recording"}});
  CHECK(r[0]["phase"] == "recording");
  r = h.handle({{"type", "rate"}, {"session_id", id}, {"self_rating", 6}, {"observer_ratings", {4, 5}}});
  CHECK(r[0]["type"] == "ack");
  CHECK(r[0]["phase"] == "rating");
  r = h.handle({{"type", "close"}, {"session_id", id}, {"trim", true}});
  REQUIRE(r.size() == 1);
  const auto& s = r[0];
  CHECK(s["type"] == "summary");
  CHECK(s["windows_total"] == 120);
  CHECK(s["windows_included"] == 60);
  CHECK(s["self_rating"] == 6);
  CHECK(s["observer_ratings"] == json({4, 5}));
  CHECK(s["phase"] == "closed");
  CHECK(s["trim"] == true);
  CHECK(s["mean_score"].is_number());
}

TEST_CASE("errors carry codes, indices and the request type") {
  stream::SessionManager mgr(registry());
  ProtocolHandler h(mgr);
  const auto id = open_session(h);

  auto raw = testsupport::raw_stream(10, 1);
  raw[3].timestamp = 0;
  auto r = h.handle(samples_message(id, raw));
  REQUIRE(r.size() == 1);
  CHECK(r[0]["type"] == "error");
  CHECK(r[0]["code"] == "stream_order");
  CHECK(r[0]["index"] == 3);
  CHECK(r[0]["request"] == "samples");

  r = h.handle({{"type", "open"}, {"subject_id", "s"}, {"material_id", "m"}, {"model_id", "zz"}});
  CHECK(r[0]["code"] == "not_found");
  r = h.handle({{"type", "open"}, {"material_id", "m"}, {"model_id", "nb"}});
  CHECK(r[0]["code"] == "validation");
  r = h.handle({{"type", "close"}, {"session_id", id}, {"self_rating", 11}});
  CHECK(r[0]["code"] == "validation");
  r = h.handle({{"type", "poll"}, {"session_id", "session-404"}});
  CHECK(r[0]["code"] == "not_found");
  r = h.handle({{"type", "dance"}, {"session_id", id}});
  CHECK(r[0]["code"] == "validation");
  r = h.handle({{"type", "samples"}, {"session_id", id}, {"samples", "nope"}});
  CHECK(r[0]["code"] == "validation");
  r = h.handle(json::array({1, 2}));
  CHECK(r[0]["code"] == "validation");

  const auto lines = h.handle_line("{not json");
  REQUIRE(lines.size() == 1);
  CHECK(json::parse(lines[0])["code"] == "parse");

  h.handle({{"type", "close"}, {"session_id", id}, {"self_rating", 3}});
  r = h.handle({{"type", "close"}, {"session_id", id}, {"self_rating", 3}, {"id", "c2"}});
  CHECK(r[0]["code"] == "state");
  CHECK(r[0]["id"] == "c2");
}

TEST_CASE("every reply sequence ends in exactly one terminal message") {
  stream::SessionManager mgr(registry());
  ProtocolHandler h(mgr);
  const auto id = open_session(h);
  const std::vector<json> requests{
      samples_message(id, testsupport::raw_stream(700, 4)),
      {{"type", "poll"}, {"session_id", id}},
      {{"type", "phase"}, {"session_id", id}, {"phase", "bogus"}},
      {{"type", "rate"}, {"session_id", id}, {"self_rating", 2}},
      {{"type", "close"}, {"session_id", id}},
  };
  for (const auto& req : requests) {
    const auto r = h.handle(req);
    REQUIRE_FALSE(r.empty());
    CHECK(is_terminal(r.back()));
    for (std::size_t i = 0; i + 1 < r.size(); ++i) CHECK_FALSE(is_terminal(r[i]));
  }
}

TEST_CASE("tcp server speaks the protocol") {
  stream::SessionManager mgr(registry());
  ProtocolHandler h(mgr);
  net::TcpServer server(h, 0);
  server.start();
  REQUIRE(server.port() != 0);
  {
    net::LineClient client("127.0.0.1", server.port());
    const auto open = client.request({{"type", "open"},
                                      {"subject_id", "s01"},
                                      {"material_id", "m"},
                                      {"model_id", "nb"},
                                      {"acclimation_s", 0}});
    REQUIRE(open.size() == 1);
    const auto id = open[0]["session_id"].get<std::string>();
    const auto raw = testsupport::raw_stream(512, 8);
    const auto r = client.request(samples_message(id, raw));
    REQUIRE(r.size() == 5);
    CHECK(r.back()["predictions"] == 4);

    // a second connection sees the same session
    net::LineClient other("127.0.0.1", server.port());
    const auto polled = other.request({{"type", "poll"}, {"session_id", id}});
    CHECK(polled.size() == 5);
    for (std::size_t i = 0; i < 4; ++i) CHECK(polled[i] == r[i]);

    client.send_line("garbage");
    const auto line = client.read_line();
    REQUIRE(line.has_value());
    CHECK(json::parse(*line)["code"] == "parse");
  }
  server.stop();
}

TEST_CASE("tcp server handles concurrent clients") {
  stream::SessionManager mgr(registry());
  ProtocolHandler h(mgr);
  net::TcpServer server(h, 0);
  server.start();
  std::vector<std::thread> threads;
  std::vector<std::size_t> counts(4, 0);
  for (int c = 0; c < 4; ++c) {
    threads.emplace_back([&, c] {
      net::LineClient client("127.0.0.1", server.port());
      const auto open = client.request({{"type", "open"},
                                        {"subject_id", "s" + std::to_string(c)},
                                        {"material_id", "m"},
                                        {"model_id", "nb"},
                                        {"acclimation_s", 0}});
      const auto id = open[0]["session_id"].get<std::string>();
      const auto raw = testsupport::raw_stream(128 * 10, 20 + c);
      for (std::size_t pos = 0; pos < raw.size(); pos += 100) {
        const std::vector<dsp::RawSample> part(raw.begin() + pos,
                                               raw.begin() + std::min(raw.size(), pos + 100));
        const auto r = client.request(samples_message(id, part));
        counts[c] += r.back()["predictions"].get<std::size_t>();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto n : counts) CHECK(n == 10);
  server.stop();
}

TEST_CASE("stop closes idle connections") {
  stream::SessionManager mgr(registry());
  ProtocolHandler h(mgr);
  net::TcpServer server(h, 0);
  server.start();
  net::LineClient client("127.0.0.1", server.port());
  server.stop();
  CHECK_FALSE(client.read_line().has_value());
}

TEST_CASE("connecting to a closed port is a network error") {
  std::uint16_t port = 0;
  {
    stream::SessionManager mgr(registry());
    ProtocolHandler h(mgr);
    net::TcpServer server(h, 0);
    server.start();
    port = server.port();
    server.stop();
  }
  CHECK(testsupport::error_kind([&] { net::LineClient c("127.0.0.1", port); }) ==
        ErrorKind::network);
}

}  // TEST_SUITE
