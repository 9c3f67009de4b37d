#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "tickvar/core/types.hpp"

namespace tickvar::tick {

struct FeedRecord {
    std::uint64_t seq = 0;
    Tick tick;

    friend bool operator==(const FeedRecord&, const FeedRecord&) = default;
};

namespace detail {

struct OptionalField {
    const char* name;
    std::optional<double> Tick::*member;
};

inline constexpr OptionalField kOptionalFields[] = {
    {"mark_price", &Tick::mark_price}, {"index_price", &Tick::index_price},
    {"bid", &Tick::bid},               {"ask", &Tick::ask},
    {"last", &Tick::last},             {"open_interest", &Tick::open_interest},
    {"delta", &Tick::delta},           {"gamma", &Tick::gamma},
    {"theta", &Tick::theta},           {"implied_vol", &Tick::implied_vol},
};

} // namespace detail

inline nlohmann::json tick_to_json(const Tick& t) {
    nlohmann::json j;
    j["instrument"] = t.instrument;
    j["time"] = format_iso8601(t.time);
    for (const auto& f : detail::kOptionalFields)
        if (const auto& v = t.*(f.member)) j[f.name] = *v;
    return j;
}

inline Tick tick_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("feed record is not an object");
    Tick t;
    try {
        t.instrument = j.at("instrument").get<std::string>();
        t.time = parse_iso8601(j.at("time").get<std::string>());
        for (const auto& f : detail::kOptionalFields) {
            const auto it = j.find(f.name);
            if (it != j.end() && !it->is_null()) t.*(f.member) = it->get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("feed record: ") + e.what());
    }
    if (t.instrument.empty()) throw ParseError("feed record: empty instrument");
    return t;
}

// One line of the feed wire format; no trailing newline.
inline std::string encode_tick(const Tick& t) { return tick_to_json(t).dump(); }

inline Tick decode_tick(std::string_view line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("feed line: ") + e.what());
    }
    return tick_from_json(j);
}

// Recovery-log line: the wire format plus the sequence number.
inline std::string encode_record(const FeedRecord& r) {
    auto j = tick_to_json(r.tick);
    j["seq"] = r.seq;
    return j.dump();
}

inline FeedRecord decode_record(std::string_view line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("log line: ") + e.what());
    }
    FeedRecord r;
    r.tick = tick_from_json(j);
    const auto it = j.find("seq");
    if (it == j.end() || !it->is_number_unsigned()) throw ParseError("log line: missing sequence number");
    r.seq = it->get<std::uint64_t>();
    return r;
}

} // namespace tickvar::tick
