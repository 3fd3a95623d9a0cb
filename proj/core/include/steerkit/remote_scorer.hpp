#pragma once

#include <atomic>
#include <cstdint>
#include <string>

#include "steerkit/aggregation.hpp"

namespace steerkit {

struct RemoteScorerConfig {
    std::string base_url;  // e.g. http://127.0.0.1:8080
    std::string path = "/score";
    int timeout_ms = 2000; // connection and read timeout per attempt
    int max_retries = 2;   // total attempts = 1 + max_retries
};

// Judge client: POST {"query": ..., "response": ...} to base_url + path, the
// reply must be 200 with {"score": <finite number>}. A record is retried up
// to max_retries times on timeout, connection error, bad status or malformed
// body; when all attempts fail the record is reported unscored (nullopt) and
// aggregation only fails if every record is unscored.
class RemoteScorer : public Scorer {
public:
    explicit RemoteScorer(RemoteScorerConfig cfg);

    std::optional<double> score(const TaskItem& item, const GenerationRecord& rec) override;
    std::string name() const override { return "remote:" + cfg_.base_url; }

    uint64_t attempts_made() const { return attempts_.load(); }

private:
    RemoteScorerConfig cfg_;
    std::atomic<uint64_t> attempts_{0};
};

} // namespace steerkit
