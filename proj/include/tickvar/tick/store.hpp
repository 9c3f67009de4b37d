#pragma once

#include <atomic>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <array>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "tickvar/core/types.hpp"
#include "tickvar/tick/twap_table.hpp"

namespace tickvar::tick {

namespace fs = std::filesystem;

// Column files: 8-byte magic, 1-byte type tag, u64 row count, then values.
// Fixed-width columns store little-endian 8-byte values; string columns store
// a u32 length before each value.
namespace column {

inline constexpr char kMagic[8] = {'T', 'V', 'C', 'O', 'L', '0', '0', '1'};
inline constexpr std::size_t kHeaderBytes = sizeof(kMagic) + 1 + sizeof(std::uint64_t);

enum class Type : std::uint8_t { i64 = 0, f64 = 1, str = 2 };

template <class T>
void put(std::string& buf, const T& v) {
    char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    buf.append(raw, sizeof(T));
}

inline std::string header(Type t, std::uint64_t rows) {
    std::string buf(kMagic, sizeof(kMagic));
    buf.push_back(static_cast<char>(t));
    put(buf, rows);
    return buf;
}

inline void write_file(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("cannot write " + p.string());
}

inline std::ifstream open_checked(const fs::path& p, Type expect, std::uint64_t& rows) {
    std::ifstream in(p, std::ios::binary);
    char head[kHeaderBytes];
    if (!in.read(head, sizeof head) || std::memcmp(head, kMagic, sizeof kMagic) != 0 ||
        static_cast<Type>(head[sizeof kMagic]) != expect)
        throw IoError("bad column file " + p.string());
    std::memcpy(&rows, head + sizeof kMagic + 1, sizeof rows);
    return in;
}

// Reads rows [start, start + n) of a fixed-width column.
template <class T>
std::vector<T> read_fixed(const fs::path& p, Type type, std::uint64_t start, std::uint64_t n) {
    std::uint64_t rows = 0;
    auto in = open_checked(p, type, rows);
    if (start + n > rows) throw IoError("column " + p.string() + " shorter than its manifest");
    std::vector<T> out(n);
    in.seekg(static_cast<std::streamoff>(kHeaderBytes + start * sizeof(T)));
    if (n && !in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(n * sizeof(T))))
        throw IoError("short read from " + p.string());
    return out;
}

inline std::vector<std::string> read_strings(const fs::path& p) {
    std::uint64_t rows = 0;
    auto in = open_checked(p, Type::str, rows);
    std::vector<std::string> out;
    out.reserve(rows);
    for (std::uint64_t i = 0; i < rows; ++i) {
        std::uint32_t len = 0;
        if (!in.read(reinterpret_cast<char*>(&len), sizeof len)) throw IoError("short read from " + p.string());
        std::string s(len, '\0');
        if (len && !in.read(s.data(), len)) throw IoError("short read from " + p.string());
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace column

enum class Column { sym, minute, twap, count };

inline const char* column_name(Column c) {
    switch (c) {
    case Column::sym: return "sym";
    case Column::minute: return "minute";
    case Column::twap: return "twap";
    case Column::count: return "count";
    }
    return "?";
}

struct StoreStats {
    std::uint64_t partitions_written = 0;
    std::uint64_t column_reads = 0;
    std::uint64_t count_column_reads = 0;
    std::uint64_t sym_column_reads = 0;
};

// Date-partitioned, column-splayed store of TWAP tables:
// <root>/<YYYY.MM.DD>/<table>/<column> plus <root>/<YYYY.MM.DD>/manifest.
// A partition becomes visible only when its manifest is in place and every
// column file matches the sizes it records; rewrites swap whole directories.
class PartitionedStore {
public:
    explicit PartitionedStore(fs::path root) : root_(std::move(root)) {
        fs::create_directories(root_);
        refresh();
    }

    const fs::path& root() const { return root_; }

    // Writes one date's tables. `tables` rows must lie inside `date`.
    void write_partition(const Date& date, const std::map<TableId, std::vector<TwapBar>>& tables) {
        std::unique_lock wlock(write_mutex_);
        const std::string name = format_partition_date(date);
        const TimestampMs day = to_timestamp(date);
        std::mt19937_64 rng(std::random_device{}());
        const fs::path tmp = root_ / ("." + name + ".tmp-" + std::to_string(rng() % 1000000000ULL));
        fs::remove_all(tmp);
        fs::create_directories(tmp);

        nlohmann::json manifest;
        manifest["date"] = name;
        manifest["format"] = 1;
        manifest["tables"] = nlohmann::json::object();
        for (TableId id : kAllTables) {
            std::vector<TwapBar> rows;
            if (const auto it = tables.find(id); it != tables.end()) rows = it->second;
            std::sort(rows.begin(), rows.end(), [](const TwapBar& a, const TwapBar& b) {
                return a.sym != b.sym ? a.sym < b.sym : a.minute < b.minute;
            });
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (rows[i].minute < day || rows[i].minute >= day + kMsPerDay)
                    throw ContractViolation("row " + rows[i].sym + "@" + format_iso8601(rows[i].minute) +
                                            " outside partition " + name);
                if (i && rows[i].sym == rows[i - 1].sym && rows[i].minute == rows[i - 1].minute)
                    throw ContractViolation("duplicate row " + rows[i].sym + "@" + format_iso8601(rows[i].minute));
            }
            const std::uint64_t n = rows.size();
            std::string sym = column::header(column::Type::str, n);
            std::string minute = column::header(column::Type::i64, n);
            std::string twap = column::header(column::Type::f64, n);
            std::string count = column::header(column::Type::i64, n);
            std::map<std::string, std::array<std::uint64_t, 2>> slices;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const auto& r = rows[i];
                column::put(sym, static_cast<std::uint32_t>(r.sym.size()));
                sym += r.sym;
                column::put(minute, static_cast<std::int64_t>(r.minute));
                column::put(twap, r.twap);
                column::put(count, static_cast<std::int64_t>(r.count));
                ++slices.try_emplace(r.sym, std::array<std::uint64_t, 2>{i, 0}).first->second[1];
            }
            nlohmann::json index = nlohmann::json::object();
            for (const auto& [s, range] : slices) index[s] = range;
            const fs::path dir = tmp / table_name(id);
            fs::create_directories(dir);
            column::write_file(dir / "sym", sym);
            column::write_file(dir / "minute", minute);
            column::write_file(dir / "twap", twap);
            column::write_file(dir / "count", count);
            manifest["tables"][table_name(id)] = {
                {"rows", n},
                {"columns", {{"sym", sym.size()}, {"minute", minute.size()}, {"twap", twap.size()}, {"count", count.size()}}},
                {"index", index},
            };
        }
        column::write_file(tmp / "manifest", manifest.dump(1));

        const fs::path target = root_ / name;
        const fs::path old = root_ / ("." + name + ".old");
        fs::remove_all(old);
        if (fs::exists(target)) fs::rename(target, old);
        fs::rename(tmp, target);
        fs::remove_all(old);
        ++stats_.partitions_written;
        refresh();
    }

    // Re-scans the root; only complete partitions are listed.
    void refresh() {
        std::map<TimestampMs, Partition> found;
        for (const auto& e : fs::directory_iterator(root_)) {
            if (!e.is_directory()) continue;
            Date d;
            try {
                d = parse_partition_date(e.path().filename().string());
            } catch (const ParseError&) {
                continue;
            }
            if (auto p = load_manifest(e.path())) found.emplace(to_timestamp(d), std::move(*p));
        }
        std::unique_lock lock(mutex_);
        partitions_ = std::move(found);
    }

    std::vector<Date> dates() const {
        std::shared_lock lock(mutex_);
        std::vector<Date> out;
        for (const auto& [day, _] : partitions_) out.push_back(date_of(day));
        return out;
    }

    bool has_partition(const Date& d) const {
        std::shared_lock lock(mutex_);
        return partitions_.count(to_timestamp(d)) > 0;
    }

    // Bars of `sym` in [from, to) across finalized partitions. Only the
    // minute and twap columns are read unless counts are requested.
    std::vector<TwapBar> read(TableId table, const std::string& sym, TimestampMs from, TimestampMs to,
                              bool with_counts = false) const {
        std::vector<TwapBar> out;
        if (from >= to) return out;
        std::vector<std::pair<fs::path, Slice>> slices;
        {
            std::shared_lock lock(mutex_);
            for (auto it = partitions_.lower_bound(day_of(from)); it != partitions_.end() && it->first < to; ++it) {
                const auto& t = it->second.tables[static_cast<std::size_t>(table)];
                const auto s = t.index.find(sym);
                if (s != t.index.end()) slices.emplace_back(it->second.dir / table_name(table), s->second);
            }
        }
        for (const auto& [dir, slice] : slices) {
            const auto minutes = column::read_fixed<std::int64_t>(dir / "minute", column::Type::i64, slice.start, slice.count);
            const auto twaps = column::read_fixed<double>(dir / "twap", column::Type::f64, slice.start, slice.count);
            std::vector<std::int64_t> counts;
            stats_.column_reads += 2;
            if (with_counts) {
                counts = column::read_fixed<std::int64_t>(dir / "count", column::Type::i64, slice.start, slice.count);
                ++stats_.column_reads;
                ++stats_.count_column_reads;
            }
            for (std::uint64_t i = 0; i < slice.count; ++i) {
                if (minutes[i] < from || minutes[i] >= to) continue;
                out.push_back(TwapBar{sym, minutes[i], twaps[i], with_counts ? counts[i] : 0});
            }
        }
        return out;
    }

    // Every row of one table in one partition, all columns.
    std::vector<TwapBar> read_all(const Date& date, TableId table) const {
        fs::path dir;
        {
            std::shared_lock lock(mutex_);
            const auto it = partitions_.find(to_timestamp(date));
            if (it == partitions_.end()) return {};
            dir = it->second.dir / table_name(table);
        }
        const auto syms = column::read_strings(dir / "sym");
        const auto n = syms.size();
        const auto minutes = column::read_fixed<std::int64_t>(dir / "minute", column::Type::i64, 0, n);
        const auto twaps = column::read_fixed<double>(dir / "twap", column::Type::f64, 0, n);
        const auto counts = column::read_fixed<std::int64_t>(dir / "count", column::Type::i64, 0, n);
        stats_.column_reads += 4;
        ++stats_.sym_column_reads;
        ++stats_.count_column_reads;
        std::vector<TwapBar> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = TwapBar{syms[i], minutes[i], twaps[i], counts[i]};
        return out;
    }

    StoreStats stats() const {
        return StoreStats{stats_.partitions_written.load(), stats_.column_reads.load(),
                          stats_.count_column_reads.load(), stats_.sym_column_reads.load()};
    }

private:
    struct Slice {
        std::uint64_t start = 0;
        std::uint64_t count = 0;
    };
    struct TableMeta {
        std::map<std::string, Slice> index;
    };
    struct Partition {
        fs::path dir;
        std::array<TableMeta, 3> tables;
    };
    struct AtomicStats {
        std::atomic<std::uint64_t> partitions_written{0};
        std::atomic<std::uint64_t> column_reads{0};
        std::atomic<std::uint64_t> count_column_reads{0};
        std::atomic<std::uint64_t> sym_column_reads{0};
    };

    static std::optional<Partition> load_manifest(const fs::path& dir) {
        std::ifstream in(dir / "manifest");
        if (!in) return std::nullopt;
        try {
            const auto m = nlohmann::json::parse(in);
            Partition p;
            p.dir = dir;
            for (TableId id : kAllTables) {
                const auto& t = m.at("tables").at(table_name(id));
                for (const auto& [col, bytes] : t.at("columns").items()) {
                    const fs::path f = dir / table_name(id) / col;
                    if (!fs::exists(f) || fs::file_size(f) != bytes.get<std::uintmax_t>()) return std::nullopt;
                }
                auto& meta = p.tables[static_cast<std::size_t>(id)];
                for (const auto& [sym, slice] : t.at("index").items())
                    meta.index.emplace(sym, Slice{slice.at(0).get<std::uint64_t>(), slice.at(1).get<std::uint64_t>()});
            }
            return p;
        } catch (const nlohmann::json::exception&) {
            return std::nullopt;
        }
    }

    fs::path root_;
    mutable std::shared_mutex mutex_;
    std::mutex write_mutex_;
    std::map<TimestampMs, Partition> partitions_;
    mutable AtomicStats stats_;
};

} // namespace tickvar::tick
