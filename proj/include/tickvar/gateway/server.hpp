#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <httplib.h>

#include "tickvar/gateway/streams.hpp"

namespace tickvar::gateway {

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 8080;      // HTTP; 0 picks a free port
    int ws_port = -1;     // WebSocket; -1 means port + 1, 0 picks a free port
    int publish_interval_ms = 1000;
    std::size_t queue_capacity = 256;
};

// Port from TICKVAR_PORT, else `fallback`.
inline int port_from_env(int fallback = 8080) {
    if (const char* v = std::getenv("TICKVAR_PORT")) {
        try {
            const int p = std::stoi(v);
            if (p > 0 && p < 65536) return p;
        } catch (const std::exception&) {
        }
        throw ValidationError(std::string("TICKVAR_PORT is not a port: ") + v);
    }
    return fallback;
}

namespace detail {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

// One WebSocket client. All operations run on the server's single I/O
// thread; outgoing frames are polled from the hub and written one at a time.
class WsSession : public std::enable_shared_from_this<WsSession> {
public:
    WsSession(tcp::socket socket, StreamHub& hub) : ws_(std::move(socket)), hub_(hub), timer_(ws_.get_executor()) {}

    void start() {
        ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
            if (ec) return;
            self->id_ = self->hub_.connect();
            self->read();
            self->poll();
        });
    }

    void close() {
        closed_ = true;
        timer_.cancel();
        beast::error_code ec;
        ws_.next_layer().close(ec);
    }

private:
    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return self->finish();
            self->hub_.handle_message(self->id_, beast::buffers_to_string(self->buffer_.data()));
            self->buffer_.consume(self->buffer_.size());
            self->read();
        });
    }

    void poll() {
        if (closed_) return;
        for (auto& f : hub_.drain(id_)) out_.push_back(f.dump());
        write();
        timer_.expires_after(std::chrono::milliseconds(50));
        timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
            if (!ec) self->poll();
        });
    }

    void write() {
        if (writing_ || out_.empty() || closed_) return;
        writing_ = true;
        ws_.text(true);
        ws_.async_write(asio::buffer(out_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            self->writing_ = false;
            if (ec) return self->finish();
            self->out_.pop_front();
            self->write();
        });
    }

    void finish() {
        if (closed_) return;
        closed_ = true;
        timer_.cancel();
        if (id_) hub_.disconnect(id_);
    }

    websocket::stream<tcp::socket> ws_;
    StreamHub& hub_;
    asio::steady_timer timer_;
    beast::flat_buffer buffer_;
    std::deque<std::string> out_;
    StreamHub::ClientId id_ = 0;
    bool writing_ = false;
    bool closed_ = false;
};

} // namespace detail

// HTTP API (cpp-httplib) plus WebSocket streams (Boost.Beast) over one
// tick engine and portfolio book.
class Server {
public:
    Server(tick::TickEngine& engine, var::PortfolioBook& book, ServerConfig cfg = {}, var::EngineConfig engine_cfg = {})
        : cfg_(std::move(cfg)), api_(engine, book, engine_cfg), hub_(engine, api_.var_engine(), cfg_.queue_capacity),
          acceptor_(ioc_) {}

    ~Server() { stop(); }

    void start() {
        http_.Get(R"(/.*)", [this](const httplib::Request& q, httplib::Response& r) { serve(q, r); });
        http_.Post(R"(/.*)", [this](const httplib::Request& q, httplib::Response& r) { serve(q, r); });
        http_.Delete(R"(/.*)", [this](const httplib::Request& q, httplib::Response& r) { serve(q, r); });
        if (cfg_.port == 0) {
            http_port_ = http_.bind_to_any_port(cfg_.host);
        } else {
            if (!http_.bind_to_port(cfg_.host, cfg_.port)) throw IoError("cannot bind HTTP port " + std::to_string(cfg_.port));
            http_port_ = cfg_.port;
        }
        if (http_port_ <= 0) throw IoError("cannot bind HTTP port");

        const int wsp = cfg_.ws_port < 0 ? (cfg_.port == 0 ? 0 : cfg_.port + 1) : cfg_.ws_port;
        const detail::tcp::endpoint ep(detail::asio::ip::make_address(cfg_.host), static_cast<unsigned short>(wsp));
        acceptor_.open(ep.protocol());
        acceptor_.set_option(detail::asio::socket_base::reuse_address(true));
        acceptor_.bind(ep);
        acceptor_.listen();
        ws_port_ = acceptor_.local_endpoint().port();
        accept();

        running_ = true;
        http_thread_ = std::thread([this] { http_.listen_after_bind(); });
        ws_thread_ = std::thread([this] { ioc_.run(); });
        publisher_ = std::thread([this] { publish_loop(); });
        http_.wait_until_ready();
    }

    void stop() {
        if (!running_.exchange(false)) return;
        {
            std::lock_guard lock(stop_mutex_);
            stop_cv_.notify_all();
        }
        http_.stop();
        detail::asio::post(ioc_, [this] {
            beast_error ec;
            acceptor_.close(ec);
            for (auto& w : sessions_)
                if (auto s = w.lock()) s->close();
        });
        ioc_.stop();
        for (auto* t : {&http_thread_, &ws_thread_, &publisher_})
            if (t->joinable()) t->join();
    }

    int http_port() const { return http_port_; }
    int ws_port() const { return ws_port_; }
    ApiService& api() { return api_; }
    StreamHub& hub() { return hub_; }

private:
    using beast_error = boost::beast::error_code;

    void serve(const httplib::Request& q, httplib::Response& r) {
        const ApiResponse resp = api_.handle(q.method, q.path, q.body, q.get_header_value("X-Request-Id"));
        r.status = resp.status;
        r.set_content(resp.body.dump(), "application/json");
    }

    void accept() {
        acceptor_.async_accept([this](beast_error ec, detail::tcp::socket socket) {
            if (ec) return;
            auto s = std::make_shared<detail::WsSession>(std::move(socket), hub_);
            std::erase_if(sessions_, [](const auto& w) { return w.expired(); });
            sessions_.push_back(s);
            s->start();
            accept();
        });
    }

    void publish_loop() {
        const auto t0 = std::chrono::steady_clock::now();
        std::unique_lock lock(stop_mutex_);
        while (running_) {
            stop_cv_.wait_for(lock, std::chrono::milliseconds(cfg_.publish_interval_ms), [this] { return !running_; });
            if (!running_) break;
            const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
            hub_.publish(ms.count());
        }
    }

    ServerConfig cfg_;
    ApiService api_;
    StreamHub hub_;
    httplib::Server http_;
    detail::asio::io_context ioc_;
    detail::tcp::acceptor acceptor_;
    std::vector<std::weak_ptr<detail::WsSession>> sessions_;
    int http_port_ = 0;
    int ws_port_ = 0;
    std::atomic<bool> running_{false};
    std::mutex stop_mutex_;
    std::condition_variable stop_cv_;
    std::thread http_thread_, ws_thread_, publisher_;
};

} // namespace tickvar::gateway
