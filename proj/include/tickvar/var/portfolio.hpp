#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "tickvar/core/instrument.hpp"

namespace tickvar::var {

struct Position {
    std::string pid;
    Instrument instrument;
    double quantity = 0.0; // signed, in contracts
};

inline constexpr double kQuantityEpsilon = 1e-12;

// In-memory holdings keyed by portfolio id; mutations of one portfolio are
// serialized, reads return copies.
class PortfolioBook {
public:
    Position add_position(const std::string& pid, const std::string& instrument_id, double quantity) {
        if (pid.empty()) throw ValidationError("portfolio id is empty");
        if (!std::isfinite(quantity) || std::abs(quantity) < kQuantityEpsilon)
            throw ValidationError("quantity must be a non-zero finite number");
        Instrument ins = parse_instrument(instrument_id);
        if (ins.is_index()) throw ValidationError("'" + instrument_id + "' is an index, not a tradable product");

        Book& book = book_for(pid, true);
        std::lock_guard lock(book.mutex);
        auto it = book.positions.find(ins.id);
        if (it == book.positions.end()) {
            Position p{pid, std::move(ins), quantity};
            book.positions.emplace(p.instrument.id, p);
            return p;
        }
        it->second.quantity += quantity;
        Position result = it->second;
        if (std::abs(it->second.quantity) < kQuantityEpsilon) {
            book.positions.erase(it);
            result.quantity = 0.0;
        }
        return result;
    }

    void remove_position(const std::string& pid, const std::string& instrument_id) {
        Book* book = find(pid);
        if (!book) throw NotFound("unknown portfolio '" + pid + "'");
        std::lock_guard lock(book->mutex);
        if (book->positions.erase(instrument_id) == 0)
            throw NotFound("portfolio '" + pid + "' holds no '" + instrument_id + "'");
    }

    std::vector<Position> list_portfolio(const std::string& pid) const {
        const Book* book = find(pid);
        if (!book) return {};
        std::lock_guard lock(book->mutex);
        std::vector<Position> out;
        out.reserve(book->positions.size());
        for (const auto& [_, p] : book->positions) out.push_back(p);
        return out;
    }

    bool has_portfolio(const std::string& pid) const { return find(pid) != nullptr; }

    std::vector<std::string> portfolio_ids() const {
        std::lock_guard lock(mutex_);
        std::vector<std::string> ids;
        for (const auto& [id, _] : books_) ids.push_back(id);
        return ids;
    }

    void clear(const std::string& pid) {
        Book* book = find(pid);
        if (!book) return;
        std::lock_guard lock(book->mutex);
        book->positions.clear();
    }

private:
    struct Book {
        mutable std::mutex mutex;
        std::map<std::string, Position> positions;
    };

    Book& book_for(const std::string& pid, bool create) {
        std::lock_guard lock(mutex_);
        auto it = books_.find(pid);
        if (it == books_.end()) {
            if (!create) throw NotFound("unknown portfolio '" + pid + "'");
            it = books_.emplace(pid, std::make_unique<Book>()).first;
        }
        return *it->second;
    }

    Book* find(const std::string& pid) const {
        std::lock_guard lock(mutex_);
        const auto it = books_.find(pid);
        return it == books_.end() ? nullptr : it->second.get();
    }

    mutable std::mutex mutex_;
    std::map<std::string, std::unique_ptr<Book>> books_;
};

// Distinct underlying indices of the holdings, sorted.
inline std::vector<std::string> extract_indices(const std::vector<Position>& positions) {
    std::set<std::string> s;
    for (const auto& p : positions) s.insert(p.instrument.underlying);
    return {s.begin(), s.end()};
}

} // namespace tickvar::var
