#pragma once

#include <cstdio>
#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "tickvar/tick/feed.hpp"

namespace tickvar::tick {

class Subscriber {
public:
    virtual ~Subscriber() = default;
    virtual void on_batch(std::span<const FeedRecord> batch) = 0;
};

// Append-only recovery log, one encoded record per line. Every append is
// flushed before it returns so that delivered data is always on disk.
class RecoveryLog {
public:
    explicit RecoveryLog(std::filesystem::path path) : path_(std::move(path)) {
        if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
        file_ = std::fopen(path_.c_str(), "ab");
        if (!file_) throw IoError("cannot open recovery log " + path_.string());
    }
    ~RecoveryLog() {
        if (file_) std::fclose(file_);
    }
    RecoveryLog(const RecoveryLog&) = delete;
    RecoveryLog& operator=(const RecoveryLog&) = delete;

    void append(std::span<const FeedRecord> batch) {
        std::string buf;
        for (const auto& r : batch) {
            buf += encode_record(r);
            buf += '\n';
        }
        if (std::fwrite(buf.data(), 1, buf.size(), file_) != buf.size() || std::fflush(file_) != 0)
            throw IoError("write to recovery log " + path_.string() + " failed");
    }

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::FILE* file_ = nullptr;
};

// Zero-latency publisher: each publish call is logged, then handed to every
// subscriber in registration order. Publishes are serialized.
class Tickerplant {
public:
    Tickerplant() = default;
    explicit Tickerplant(std::filesystem::path log_path) : log_(std::make_unique<RecoveryLog>(std::move(log_path))) {}

    void subscribe(Subscriber* s) {
        std::lock_guard lock(mutex_);
        subscribers_.push_back(s);
    }

    // Assigns sequence numbers and publishes.
    std::uint64_t publish(std::span<const Tick> ticks) {
        std::lock_guard lock(mutex_);
        std::vector<FeedRecord> batch;
        batch.reserve(ticks.size());
        for (const Tick& t : ticks) batch.push_back(FeedRecord{next_seq_ + batch.size(), t});
        deliver(batch);
        return next_seq_;
    }

    // Publishes records that already carry sequence numbers.
    void publish_records(std::span<const FeedRecord> batch) {
        std::lock_guard lock(mutex_);
        std::uint64_t expect = next_seq_;
        for (const auto& r : batch) {
            if (r.seq < expect)
                throw ContractViolation("sequence number " + std::to_string(r.seq) + " is not increasing");
            expect = r.seq + 1;
        }
        deliver(batch);
    }

    std::uint64_t next_seq() const {
        std::lock_guard lock(mutex_);
        return next_seq_;
    }

    // Resume numbering after a replay.
    void set_next_seq(std::uint64_t seq) {
        std::lock_guard lock(mutex_);
        next_seq_ = seq;
    }

    const RecoveryLog* log() const { return log_.get(); }

private:
    void deliver(std::span<const FeedRecord> batch) {
        if (batch.empty()) return;
        if (log_) log_->append(batch); // throws before any subscriber sees the batch
        next_seq_ = batch.back().seq + 1;
        for (Subscriber* s : subscribers_) s->on_batch(batch);
    }

    mutable std::mutex mutex_;
    std::unique_ptr<RecoveryLog> log_;
    std::vector<Subscriber*> subscribers_;
    std::uint64_t next_seq_ = 1;
};

} // namespace tickvar::tick
