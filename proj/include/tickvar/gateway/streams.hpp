#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "tickvar/gateway/api.hpp"

namespace tickvar::gateway {

// Bounded per-client frame queue; a full queue drops its oldest frame and
// the next drain starts with a gap notice naming the missing seq range.
class FrameQueue {
public:
    explicit FrameQueue(std::size_t capacity = 256) : capacity_(capacity ? capacity : 1) {}

    void push(const std::string& channel, json data) {
        json frame = {{"channel", channel}, {"seq", ++seq_}, {"data", std::move(data)}};
        if (frames_.size() >= capacity_) {
            const auto lost = frames_.front().at("seq").get<std::uint64_t>();
            if (!dropped_) gap_from_ = lost;
            gap_to_ = lost;
            ++dropped_;
            frames_.pop_front();
        }
        frames_.push_back(std::move(frame));
    }

    std::vector<json> drain() {
        std::vector<json> out;
        if (dropped_) {
            out.push_back({{"channel", "gap"},
                           {"seq", 0},
                           {"data", {{"dropped", dropped_}, {"missing_from", gap_from_}, {"missing_to", gap_to_}}}});
            dropped_ = 0;
        }
        for (auto& f : frames_) out.push_back(std::move(f));
        frames_.clear();
        return out;
    }

    std::size_t size() const { return frames_.size(); }
    std::uint64_t last_seq() const { return seq_; }

private:
    std::size_t capacity_;
    std::deque<json> frames_;
    std::uint64_t seq_ = 0;
    std::uint64_t dropped_ = 0;
    std::uint64_t gap_from_ = 0;
    std::uint64_t gap_to_ = 0;
};

inline json to_json(const tick::OhlcBar& b) {
    return {{"start", format_iso8601(b.start)}, {"open", b.open}, {"high", b.high},
            {"low", b.low},   {"close", b.close}, {"count", b.count}};
}

inline json to_json(const tick::SurfacePoint& p) {
    return {{"instrument", p.instrument},
            {"maturity", tickvar::detail::format_maturity(p.maturity)},
            {"strike", p.strike},
            {"type", p.type == OptionType::call ? "C" : "P"},
            {"implied_vol", p.implied_vol},
            {"time", format_iso8601(p.time)}};
}

// Subscription registry and frame producer for the streaming channels
// olhc, volsurface and var. `publish` is driven by a timer (1 s in the
// server); it never blocks the ingestion path.
class StreamHub {
public:
    using ClientId = std::uint64_t;

    StreamHub(tick::TickEngine& engine, var::VarEngine& var, std::size_t queue_capacity = 256)
        : engine_(engine), var_(var), capacity_(queue_capacity) {}

    ClientId connect() {
        std::lock_guard lock(mutex_);
        const ClientId id = ++next_id_;
        clients_.emplace(id, Client{FrameQueue(capacity_), {}});
        return id;
    }

    void disconnect(ClientId id) {
        std::lock_guard lock(mutex_);
        clients_.erase(id);
    }

    // Handles one client text message. Protocol errors produce error frames.
    void handle_message(ClientId id, const std::string& text) {
        std::lock_guard lock(mutex_);
        const auto it = clients_.find(id);
        if (it == clients_.end()) return;
        Client& c = it->second;
        const json msg = json::parse(text, nullptr, false);
        if (msg.is_discarded() || !msg.is_object()) {
            c.queue.push("error", {{"code", "parse_error"}, {"message", "message is not a JSON object"}});
            return;
        }
        const std::string op = msg.value("op", "");
        const std::string channel = msg.value("channel", "");
        const json params = msg.value("params", json::object());
        if (op == "unsubscribe") {
            std::erase_if(c.subs, [&](const Subscription& s) { return s.channel == channel && s.params == params; });
            return;
        }
        if (op != "subscribe") {
            c.queue.push("error", {{"code", "validation_error"}, {"message", "unknown op '" + op + "'"}});
            return;
        }
        Subscription s;
        s.channel = channel;
        s.params = params;
        try {
            if (channel == "olhc") {
                s.product = params.at("product").get<std::string>();
                s.interval = static_cast<TimestampMs>(params.value("interval_seconds", 60.0) * kMsPerSecond);
                if (s.interval <= 0) throw ValidationError("interval_seconds must be positive");
                if (!engine_.streaming().knows(s.product))
                    c.queue.push(channel, {{"product", s.product}, {"bars", json::array()},
                                           {"warning", "unknown product '" + s.product + "'"}});
            } else if (channel == "volsurface") {
                s.product = params.at("underlying").get<std::string>();
            } else if (channel == "var") {
                json req = params;
                if (!req.contains("confidence")) req["confidence"] = 0.99;
                if (!req.contains("horizon_days")) req["horizon_days"] = 1.0;
                s.var = parse_var_request(req);
                s.cadence_ms = static_cast<std::int64_t>(params.value("cadence_seconds", 5.0) * 1000.0);
            } else {
                c.queue.push("error", {{"code", "validation_error"}, {"message", "unknown channel '" + channel + "'"}});
                return;
            }
        } catch (const json::exception& e) {
            c.queue.push("error", {{"code", "validation_error"}, {"message", e.what()}});
            return;
        } catch (const Error& e) {
            c.queue.push("error", {{"code", to_string(e.kind())}, {"message", e.what()}});
            return;
        }
        c.subs.push_back(std::move(s));
    }

    // Emits due frames for every subscription. `monotonic_ms` drives VaR
    // cadence; data times come from the tick engine.
    void publish(std::int64_t monotonic_ms) {
        std::lock_guard lock(mutex_);
        const TimestampMs now = engine_.now();
        for (auto& [_, c] : clients_)
            for (auto& s : c.subs) emit(c, s, now, monotonic_ms);
    }

    std::vector<json> drain(ClientId id) {
        std::lock_guard lock(mutex_);
        const auto it = clients_.find(id);
        return it == clients_.end() ? std::vector<json>{} : it->second.queue.drain();
    }

    std::size_t clients() const {
        std::lock_guard lock(mutex_);
        return clients_.size();
    }

private:
    struct Subscription {
        std::string channel;
        json params;
        std::string product;
        TimestampMs interval = kMsPerMinute;
        TimestampMs emitted_until = std::numeric_limits<TimestampMs>::min();
        VarRequest var;
        std::int64_t cadence_ms = 5000;
        std::optional<std::int64_t> last_var_ms;
    };

    struct Client {
        FrameQueue queue;
        std::vector<Subscription> subs;
    };

    void emit(Client& c, Subscription& s, TimestampMs now, std::int64_t mono) {
        if (s.channel == "olhc") {
            // completed bars not yet sent
            const TimestampMs upto = floor_to(now, s.interval);
            if (upto <= s.emitted_until) return;
            const TimestampMs from = s.emitted_until == std::numeric_limits<TimestampMs>::min() ? 0 : s.emitted_until;
            const auto bars = engine_.streaming().ohlc(s.product, s.interval, from, upto);
            s.emitted_until = upto;
            if (bars.empty()) return;
            json arr = json::array();
            for (const auto& b : bars) arr.push_back(to_json(b));
            c.queue.push("olhc", {{"product", s.product}, {"interval_seconds", s.interval / kMsPerSecond}, {"bars", arr}});
        } else if (s.channel == "volsurface") {
            json pts = json::array();
            for (const auto& p : tick::vol_surface(engine_.latest(), s.product)) pts.push_back(to_json(p));
            c.queue.push("volsurface", {{"underlying", s.product}, {"points", pts}});
        } else if (s.channel == "var") {
            if (s.last_var_ms && mono - *s.last_var_ms < s.cadence_ms) return;
            s.last_var_ms = mono;
            try {
                const auto r = var_.estimate_var(s.var.pid, s.var.confidence, s.var.horizon_days, s.var.model);
                json d = to_json(r);
                d["timings"] = to_json(r.latency);
                c.queue.push("var", std::move(d));
            } catch (const Error& e) {
                c.queue.push("var", {{"pid", s.var.pid}, {"error", {{"code", to_string(e.kind())}, {"message", e.what()}}}});
            }
        }
    }

    tick::TickEngine& engine_;
    var::VarEngine& var_;
    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::map<ClientId, Client> clients_;
    ClientId next_id_ = 0;
};

} // namespace tickvar::gateway
