#pragma once

#include <array>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tickvar/core/error.hpp"
#include "tickvar/core/time.hpp"

namespace tickvar {

enum class InstrumentKind { index, future, option };
enum class OptionType { call, put };

inline const char* to_string(InstrumentKind k) {
    switch (k) {
    case InstrumentKind::index: return "index";
    case InstrumentKind::future: return "future";
    case InstrumentKind::option: return "option";
    }
    return "?";
}

// Exchange naming convention: crypto[-maturity[-strike-optiontype]], with
// maturity written DMMMYY (no zero padding), e.g. BTC-29DEC23,
// ETH-29DEC23-2000-C. A bare underlying symbol (BTC) names the index.
struct Instrument {
    std::string id;
    std::string underlying;
    InstrumentKind kind = InstrumentKind::index;
    std::optional<Date> maturity;
    std::optional<double> strike;
    std::optional<OptionType> option_type;

    bool is_option() const { return kind == InstrumentKind::option; }
    bool is_future() const { return kind == InstrumentKind::future; }
    bool is_index() const { return kind == InstrumentKind::index; }

    friend bool operator==(const Instrument&, const Instrument&) = default;
};

namespace detail {

inline constexpr std::array<std::string_view, 12> kMonthTokens = {
    "JAN", "FEB", "MAR", "APR", "MAY", "JUN", "JUL", "AUG", "SEP", "OCT", "NOV", "DEC"};

inline std::vector<std::string_view> split_dash(std::string_view s) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find('-', start);
        parts.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

inline bool is_underlying_token(std::string_view s) {
    if (s.empty() || s.size() > 10) return false;
    for (char c : s)
        if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'))) return false;
    return s[0] >= 'A' && s[0] <= 'Z';
}

inline Date parse_maturity(std::string_view tok, std::string_view id) {
    auto fail = [&] {
        return ParseError("instrument '" + std::string(id) + "': bad maturity segment '" +
                          std::string(tok) + "'");
    };
    if (tok.size() < 6 || tok.size() > 7) throw fail();
    const std::size_t day_len = tok.size() - 5;
    if (tok[0] == '0') throw fail();
    unsigned day = 0;
    for (std::size_t i = 0; i < day_len; ++i) {
        if (tok[i] < '0' || tok[i] > '9') throw fail();
        day = day * 10 + static_cast<unsigned>(tok[i] - '0');
    }
    const auto mon = tok.substr(day_len, 3);
    unsigned month = 0;
    for (unsigned m = 0; m < 12; ++m)
        if (kMonthTokens[m] == mon) month = m + 1;
    if (month == 0) throw fail();
    const auto yy = tok.substr(day_len + 3);
    if (yy[0] < '0' || yy[0] > '9' || yy[1] < '0' || yy[1] > '9') throw fail();
    const int year = 2000 + (yy[0] - '0') * 10 + (yy[1] - '0');
    Date d{year, month, day};
    if (!valid_date(d)) throw fail();
    return d;
}

inline std::string format_maturity(const Date& d) {
    std::string out = std::to_string(d.day);
    out += kMonthTokens[d.month - 1];
    const int yy = d.year % 100;
    out += static_cast<char>('0' + yy / 10);
    out += static_cast<char>('0' + yy % 10);
    return out;
}

inline std::string format_strike(double strike) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), strike);
    return std::string(buf.data(), res.ptr);
}

} // namespace detail

inline std::string format_instrument(const Instrument& ins) {
    std::string out = ins.underlying;
    if (ins.kind == InstrumentKind::index) return out;
    out += '-';
    out += detail::format_maturity(*ins.maturity);
    if (ins.kind == InstrumentKind::future) return out;
    out += '-';
    out += detail::format_strike(*ins.strike);
    out += '-';
    out += (*ins.option_type == OptionType::call) ? 'C' : 'P';
    return out;
}

inline Instrument parse_instrument(std::string_view id) {
    if (id.empty()) throw ParseError("instrument id is empty");
    const auto parts = detail::split_dash(id);
    const std::string sid(id);
    if (parts.size() != 1 && parts.size() != 2 && parts.size() != 4)
        throw ParseError("instrument '" + sid + "': expected 1, 2 or 4 dash-separated segments, got " +
                         std::to_string(parts.size()));
    if (!detail::is_underlying_token(parts[0]))
        throw ParseError("instrument '" + sid + "': bad underlying segment '" +
                         std::string(parts[0]) + "'");

    Instrument ins;
    ins.id = sid;
    ins.underlying = std::string(parts[0]);
    if (parts.size() == 1) return ins;

    ins.maturity = detail::parse_maturity(parts[1], id);
    if (parts.size() == 2) {
        ins.kind = InstrumentKind::future;
        return ins;
    }

    const auto strike_tok = parts[2];
    double strike = 0.0;
    const auto res = std::from_chars(strike_tok.data(), strike_tok.data() + strike_tok.size(), strike);
    if (strike_tok.empty() || res.ec != std::errc{} || res.ptr != strike_tok.data() + strike_tok.size())
        throw ParseError("instrument '" + sid + "': bad strike segment '" + std::string(strike_tok) + "'");
    if (!(strike > 0.0))
        throw ParseError("instrument '" + sid + "': strike segment '" + std::string(strike_tok) +
                         "' must be positive");
    if (parts[3] != "C" && parts[3] != "P")
        throw ParseError("instrument '" + sid + "': bad option type segment '" + std::string(parts[3]) + "'");

    ins.kind = InstrumentKind::option;
    ins.strike = strike;
    ins.option_type = parts[3] == "C" ? OptionType::call : OptionType::put;
    return ins;
}

} // namespace tickvar
