#pragma once

#include <atomic>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tickvar/tick/engine.hpp"
#include "tickvar/var/engine.hpp"

namespace tickvar::gateway {

using json = nlohmann::json;
using var::LatencyReport;

struct ApiResponse {
    int status = 200;
    json body;
};

// HTTP status for an engine error kind.
inline int status_for(ErrorKind k) {
    switch (k) {
    case ErrorKind::validation:
    case ErrorKind::parse:
    case ErrorKind::domain: return 400;
    case ErrorKind::not_found: return 404;
    case ErrorKind::degenerate_portfolio: return 409;
    case ErrorKind::invalid_moments: return 422;
    case ErrorKind::stale_data:
    case ErrorKind::insufficient_data: return 503;
    default: return 500;
    }
}

inline json to_json(const LatencyReport& l) {
    return {{"t1_ms", l.t1},       {"t2_ms", l.t2},       {"t3_ms", l.t3},
            {"t_epsilon_ms", l.t_epsilon}, {"total_ms", l.total}, {"space_bytes", l.space_bytes}};
}

inline json to_json(const var::Position& p) {
    return {{"pid", p.pid}, {"instrument", p.instrument.id}, {"underlying", p.instrument.underlying},
            {"kind", to_string(p.instrument.kind)}, {"quantity", p.quantity}};
}

inline json to_json(const var::Moments& m) {
    return {{"mu1", m.mu1}, {"mu2", m.mu2},   {"mu3", m.mu3},
            {"mu4", m.mu4}, {"skew", m.skew}, {"kurt", m.kurt}, {"sigma_v", m.sigma_v}};
}

// VaR result without timings; the envelope carries those.
inline json to_json(const var::VaRResult& r) {
    return {{"pid", r.pid},
            {"confidence", r.confidence},
            {"horizon_days", r.horizon_days},
            {"model", vol::to_string(r.model)},
            {"z_cf", r.z_cf},
            {"q_return", r.q_return},
            {"var_value", r.var_value},
            {"portfolio_value", r.portfolio_value},
            {"moments", to_json(r.moments)},
            {"valid", r.valid},
            {"psd_adjusted", r.psd_adjusted},
            {"underlyings", r.syms},
            {"as_of", format_iso8601(r.as_of)}};
}

struct VarRequest {
    std::string pid;
    double confidence = 0.99;
    double horizon_days = 1.0;
    vol::Model model = vol::Model::har;
};

inline VarRequest parse_var_request(const json& j) {
    if (!j.is_object()) throw ValidationError("request body must be a JSON object");
    VarRequest r;
    try {
        r.pid = j.at("pid").get<std::string>();
        r.confidence = j.at("confidence").get<double>();
        r.horizon_days = j.at("horizon_days").get<double>();
        if (j.contains("model") && !j.at("model").is_null()) {
            const auto name = j.at("model").get<std::string>();
            const auto m = vol::parse_model(name);
            if (!m || *m == vol::Model::realized) throw ValidationError("unknown model '" + name + "'");
            r.model = *m;
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid var-estimate payload: ") + e.what());
    }
    if (r.pid.empty()) throw ValidationError("pid is empty");
    var::validate_request(r.confidence, r.horizon_days);
    return r;
}

// Transport-independent request handling: one call per HTTP request, the
// result is an envelope carrying the request id.
class ApiService {
public:
    ApiService(tick::TickEngine& engine, var::PortfolioBook& book, var::EngineConfig cfg = {})
        : engine_(engine), book_(book), var_(book, engine, cfg) {}

    ApiResponse handle(std::string_view method, std::string_view path, std::string_view body,
                       std::string request_id = {}) {
        if (request_id.empty()) request_id = "req-" + std::to_string(++counter_);
        std::string operation = std::string(method) + " " + std::string(path);
        try {
            const auto parts = split_path(path);
            if (method == "GET" && parts == std::vector<std::string>{"health"}) {
                operation = "health";
                return ok(request_id, operation, health());
            }
            if (method == "GET" && parts == std::vector<std::string>{"instruments"}) {
                operation = "instruments";
                return ok(request_id, operation, instruments());
            }
            if (method == "POST" && parts == std::vector<std::string>{"var-estimate"}) {
                operation = "var_estimate";
                const VarRequest req = parse_var_request(parse_body(body));
                const auto r = var_.estimate_var(req.pid, req.confidence, req.horizon_days, req.model);
                ApiResponse resp = ok(request_id, operation, to_json(r));
                resp.body["timings"] = to_json(r.latency);
                return resp;
            }
            if (parts.size() >= 3 && parts[0] == "portfolios" && parts[2] == "positions") {
                const std::string& pid = parts[1];
                if (method == "GET" && parts.size() == 3) {
                    operation = "list_positions";
                    if (!book_.has_portfolio(pid)) throw NotFound("unknown portfolio '" + pid + "'");
                    return ok(request_id, operation, positions_json(pid));
                }
                if (method == "POST" && parts.size() == 3) {
                    operation = "add_position";
                    const json j = parse_body(body);
                    std::string instrument;
                    double quantity = 0.0;
                    try {
                        instrument = j.at("instrument").get<std::string>();
                        quantity = j.at("quantity").get<double>();
                    } catch (const json::exception& e) {
                        throw ValidationError(std::string("invalid position payload: ") + e.what());
                    }
                    const auto p = book_.add_position(pid, instrument, quantity);
                    return ok(request_id, operation, to_json(p), 201);
                }
                if (method == "DELETE" && parts.size() == 4) {
                    operation = "delete_position";
                    book_.remove_position(pid, parts[3]);
                    return ok(request_id, operation, positions_json(pid));
                }
                if (method == "DELETE" && parts.size() == 3) {
                    operation = "clear_positions";
                    if (!book_.has_portfolio(pid)) throw NotFound("unknown portfolio '" + pid + "'");
                    book_.clear(pid);
                    return ok(request_id, operation, json::array());
                }
            }
            throw NotFound("no route for " + std::string(method) + " " + std::string(path));
        } catch (const Error& e) {
            return fail(request_id, operation, status_for(e.kind()), to_string(e.kind()), e.what(), e.stage());
        } catch (const std::exception& e) {
            return fail(request_id, operation, 500, "internal_error", e.what(), {});
        }
    }

    var::VarEngine& var_engine() { return var_; }

private:
    static std::vector<std::string> split_path(std::string_view path) {
        if (const auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
        std::vector<std::string> out;
        std::size_t i = 0;
        while (i < path.size()) {
            while (i < path.size() && path[i] == '/') ++i;
            const std::size_t j = path.find('/', i);
            const auto part = path.substr(i, j == std::string_view::npos ? path.size() - i : j - i);
            if (!part.empty()) out.emplace_back(part);
            if (j == std::string_view::npos) break;
            i = j;
        }
        return out;
    }

    static json parse_body(std::string_view body) {
        const json j = json::parse(body, nullptr, false);
        if (j.is_discarded()) throw ValidationError("request body is not valid JSON");
        return j;
    }

    static ApiResponse ok(const std::string& id, const std::string& op, json data, int status = 200) {
        return {status, {{"request_id", id}, {"operation", op}, {"ok", true}, {"data", std::move(data)}}};
    }

    static ApiResponse fail(const std::string& id, const std::string& op, int status, const std::string& code,
                            const std::string& message, const std::string& stage) {
        json err = {{"code", code}, {"message", message}};
        if (!stage.empty()) err["stage"] = stage;
        return {status, {{"request_id", id}, {"operation", op}, {"ok", false}, {"error", std::move(err)}}};
    }

    json health() const {
        const TimestampMs now = engine_.now();
        return {{"status", "ok"},
                {"now", now > 0 ? json(format_iso8601(now)) : json()},
                {"products", engine_.latest().product_ids().size()},
                {"next_seq", engine_.plant().next_seq()}};
    }

    json instruments() const {
        json out = json::array();
        for (const auto& id : engine_.latest().product_ids()) {
            Instrument ins;
            try {
                ins = parse_instrument(id);
            } catch (const ParseError&) {
                continue;
            }
            json j = {{"id", id}, {"underlying", ins.underlying}, {"kind", to_string(ins.kind)}};
            if (ins.maturity) j["maturity"] = tickvar::detail::format_maturity(*ins.maturity);
            if (ins.strike) j["strike"] = *ins.strike;
            if (ins.option_type) j["option_type"] = *ins.option_type == OptionType::call ? "C" : "P";
            out.push_back(std::move(j));
        }
        return out;
    }

    json positions_json(const std::string& pid) const {
        json out = json::array();
        for (const auto& p : book_.list_portfolio(pid)) out.push_back(to_json(p));
        return out;
    }

    tick::TickEngine& engine_;
    var::PortfolioBook& book_;
    var::VarEngine var_;
    std::atomic<std::uint64_t> counter_{0};
};

} // namespace tickvar::gateway
