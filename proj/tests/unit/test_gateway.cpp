#include <chrono>
#include <filesystem>
#include <thread>

#include <unistd.h>

#include <gtest/gtest.h>

#include "tickvar/gateway/bench.hpp"
#include "tickvar/gateway/server.hpp"

using namespace tickvar;
using namespace tickvar::gateway;
namespace fs = std::filesystem;

namespace {

// One shared fixture: six days of index history and a quote per product.
BenchFixture& fixture() {
    static std::unique_ptr<BenchFixture> fx = [] {
        const fs::path root = fs::temp_directory_path() / ("tickvar-unit-gateway-" + std::to_string(::getpid()));
        fs::remove_all(root);
        return make_bench_fixture(root, 6);
    }();
    return *fx;
}

std::string first_option(const BenchFixture& fx) {
    for (const auto& i : fx.universe)
        if (i.is_option() && i.underlying == "BTC") return i.id;
    return {};
}

std::string first_future(const BenchFixture& fx) {
    for (const auto& i : fx.universe)
        if (i.is_future()) return i.id;
    return {};
}

} // namespace

TEST(Api, HealthAndInstruments) {
    auto& fx = fixture();
    ApiService api(*fx.engine, fx.book);
    const auto h = api.handle("GET", "/health", "", "abc");
    EXPECT_EQ(h.status, 200);
    EXPECT_EQ(h.body["request_id"], "abc");
    EXPECT_EQ(h.body["operation"], "health");
    EXPECT_EQ(h.body["data"]["products"], fx.universe.size());

    const auto i = api.handle("GET", "/instruments", "");
    EXPECT_EQ(i.status, 200);
    EXPECT_EQ(i.body["data"].size(), fx.universe.size());
    EXPECT_EQ(i.body["request_id"], "req-1");
}

TEST(Api, PositionLifecycleAndStatusCodes) {
    auto& fx = fixture();
    var::PortfolioBook book;
    ApiService api(*fx.engine, book);
    const std::string fut = first_future(fx);

    EXPECT_EQ(api.handle("GET", "/portfolios/p1/positions", "").status, 404);
    auto r = api.handle("POST", "/portfolios/p1/positions", R"({"instrument":")" + fut + R"(","quantity":2})");
    EXPECT_EQ(r.status, 201);
    EXPECT_EQ(r.body["data"]["instrument"], fut);
    EXPECT_EQ(r.body["data"]["quantity"], 2.0);

    r = api.handle("GET", "/portfolios/p1/positions", "");
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.body["data"].size(), 1u);

    EXPECT_EQ(api.handle("POST", "/portfolios/p1/positions", R"({"instrument":"BTC"})").status, 400);
    EXPECT_EQ(api.handle("POST", "/portfolios/p1/positions", "{oops").status, 400);
    EXPECT_EQ(api.handle("POST", "/portfolios/p1/positions", R"({"instrument":"nope","quantity":1})").status, 400);

    r = api.handle("DELETE", "/portfolios/p1/positions/" + fut, "");
    EXPECT_EQ(r.status, 200);
    EXPECT_TRUE(r.body["data"].empty());
    EXPECT_EQ(api.handle("DELETE", "/portfolios/p1/positions/" + fut, "").status, 404);
    EXPECT_EQ(api.handle("DELETE", "/portfolios/p1/positions", "").status, 200);
    EXPECT_EQ(api.handle("GET", "/nowhere", "").status, 404);
}

TEST(Api, VarEstimateCarriesTimingsAndErrors) {
    auto& fx = fixture();
    var::PortfolioBook book;
    ApiService api(*fx.engine, book);
    book.add_position("p", first_future(fx), 1.0);
    book.add_position("p", first_option(fx), 3.0);

    const auto r = api.handle("POST", "/var-estimate", R"({"pid":"p","confidence":0.99,"horizon_days":1,"model":"EWMA"})");
    ASSERT_EQ(r.status, 200) << r.body.dump();
    EXPECT_TRUE(r.body["ok"].get<bool>());
    EXPECT_LT(r.body["data"]["var_value"].get<double>(), 0.0);
    for (const char* k : {"t1_ms", "t2_ms", "t3_ms", "total_ms"}) EXPECT_TRUE(r.body["timings"].contains(k)) << k;

    EXPECT_EQ(api.handle("POST", "/var-estimate", R"({"pid":"p","confidence":1.5,"horizon_days":1})").status, 400);
    EXPECT_EQ(api.handle("POST", "/var-estimate", R"({"pid":"p","confidence":0.99,"horizon_days":1,"model":"REALIZED"})").status, 400);
    EXPECT_EQ(api.handle("POST", "/var-estimate", R"({"pid":"missing","confidence":0.99,"horizon_days":1})").status, 404);

    // HAR needs 15 days of history; the fixture has 6
    const auto har = api.handle("POST", "/var-estimate", R"({"pid":"p","confidence":0.99,"horizon_days":1,"model":"HAR"})");
    EXPECT_EQ(har.status, 503);
    EXPECT_EQ(har.body["error"]["stage"], "inference");
}

TEST(FrameQueue, OverflowDropsOldestAndReportsGap) {
    FrameQueue q(3);
    for (int i = 0; i < 5; ++i) q.push("olhc", {{"i", i}});
    const auto frames = q.drain();
    ASSERT_EQ(frames.size(), 4u);
    EXPECT_EQ(frames[0]["channel"], "gap");
    EXPECT_EQ(frames[0]["data"]["dropped"], 2);
    EXPECT_EQ(frames[0]["data"]["missing_from"], 1);
    EXPECT_EQ(frames[0]["data"]["missing_to"], 2);
    EXPECT_EQ(frames[1]["seq"], 3);
    EXPECT_EQ(frames[3]["seq"], 5);
    EXPECT_TRUE(q.drain().empty());
}

TEST(StreamHub, OlhcFramesMatchDirectQueryAndAreSharedAcrossClients) {
    auto& fx = fixture();
    var::VarEngine ve(fx.book, *fx.engine);
    StreamHub hub(*fx.engine, ve, 4096);
    const auto a = hub.connect(), b = hub.connect();
    const std::string sub = R"({"op":"subscribe","channel":"olhc","params":{"product":"BTC","interval_seconds":300}})";
    hub.handle_message(a, sub);
    hub.handle_message(b, sub);
    hub.publish(0);
    const auto fa = hub.drain(a), fb = hub.drain(b);
    ASSERT_EQ(fa.size(), 1u);
    EXPECT_EQ(fa, fb);

    const TimestampMs upto = floor_to(fx.engine->now(), 5 * kMsPerMinute);
    const auto bars = fx.engine->streaming().ohlc("BTC", 5 * kMsPerMinute, 0, upto);
    const auto& sent = fa[0]["data"]["bars"];
    ASSERT_EQ(sent.size(), bars.size());
    EXPECT_EQ(sent.back()["close"].get<double>(), bars.back().close);
    EXPECT_EQ(sent.front()["count"].get<std::size_t>(), bars.front().count);

    // nothing new until another bar completes
    hub.publish(1000);
    EXPECT_TRUE(hub.drain(a).empty());
}

TEST(StreamHub, ProtocolErrorsAndOtherChannels) {
    auto& fx = fixture();
    var::PortfolioBook book;
    book.add_position("s", first_future(fx), 1.0);
    var::VarEngine ve(book, *fx.engine);
    StreamHub hub(*fx.engine, ve);
    const auto c = hub.connect();
    hub.handle_message(c, "not json");
    hub.handle_message(c, R"({"op":"dance"})");
    hub.handle_message(c, R"({"op":"subscribe","channel":"weather"})");
    hub.handle_message(c, R"({"op":"subscribe","channel":"olhc","params":{"product":"XRP"}})");
    auto frames = hub.drain(c);
    ASSERT_EQ(frames.size(), 4u);
    EXPECT_EQ(frames[0]["channel"], "error");
    EXPECT_EQ(frames[2]["data"]["code"], "validation_error");
    EXPECT_TRUE(frames[3]["data"].contains("warning"));

    hub.handle_message(c, R"({"op":"subscribe","channel":"volsurface","params":{"underlying":"BTC"}})");
    hub.handle_message(c, R"({"op":"subscribe","channel":"var","params":{"pid":"s","model":"EWMA","cadence_seconds":5}})");
    hub.publish(0);
    frames = hub.drain(c);
    ASSERT_EQ(frames.size(), 2u);
    EXPECT_EQ(frames[0]["channel"], "volsurface");
    EXPECT_FALSE(frames[0]["data"]["points"].empty());
    EXPECT_EQ(frames[1]["channel"], "var");
    EXPECT_TRUE(frames[1]["data"].contains("var_value"));

    hub.publish(2000); // inside the VaR cadence
    frames = hub.drain(c);
    ASSERT_EQ(frames.size(), 1u);
    EXPECT_EQ(frames[0]["channel"], "volsurface");

    hub.handle_message(c, R"({"op":"unsubscribe","channel":"volsurface","params":{"underlying":"BTC"}})");
    hub.publish(6000);
    frames = hub.drain(c);
    ASSERT_EQ(frames.size(), 1u);
    EXPECT_EQ(frames[0]["channel"], "var");
    hub.disconnect(c);
    EXPECT_EQ(hub.clients(), 0u);
}

TEST(Server, HttpAndWebSocketEndToEnd) {
    auto& fx = fixture();
    var::PortfolioBook book;
    ServerConfig sc;
    sc.port = 0;
    sc.publish_interval_ms = 50;
    Server server(*fx.engine, book, sc);
    server.start();

    httplib::Client http("127.0.0.1", server.http_port());
    auto res = http.Post("/portfolios/w/positions", R"({"instrument":")" + first_future(fx) + R"(","quantity":1})",
                         "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 201);
    res = http.Get("/health", {{"X-Request-Id", "probe-1"}});
    ASSERT_TRUE(res);
    EXPECT_EQ(nlohmann::json::parse(res->body)["request_id"], "probe-1");

    namespace asio = boost::asio;
    namespace websocket = boost::beast::websocket;
    asio::io_context ioc;
    asio::ip::tcp::socket sock(ioc);
    sock.connect({asio::ip::make_address("127.0.0.1"), static_cast<unsigned short>(server.ws_port())});
    websocket::stream<asio::ip::tcp::socket> ws(std::move(sock));
    ws.handshake("127.0.0.1", "/");
    ws.write(asio::buffer(std::string(R"({"op":"subscribe","channel":"olhc","params":{"product":"ETH"}})")));
    boost::beast::flat_buffer buf;
    ws.read(buf);
    const auto frame = nlohmann::json::parse(boost::beast::buffers_to_string(buf.data()));
    EXPECT_EQ(frame["channel"], "olhc");
    EXPECT_EQ(frame["seq"], 1);
    EXPECT_FALSE(frame["data"]["bars"].empty());
    ws.close(websocket::close_code::normal);
    server.stop();
}
