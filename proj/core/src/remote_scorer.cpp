#include "steerkit/remote_scorer.hpp"

#include <cmath>

#include <httplib.h>
#include <json.hpp>

namespace steerkit {

using nlohmann::json;

RemoteScorer::RemoteScorer(RemoteScorerConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty())
        throw Error(ErrorCode::ConfigError, "remote scorer needs a base url");
    if (cfg_.timeout_ms < 1 || cfg_.max_retries < 0)
        throw Error(ErrorCode::ConfigError, "invalid remote scorer timeout/retry config");
}

std::optional<double> RemoteScorer::score(const TaskItem& item, const GenerationRecord& rec) {
    json body{{"query", item.query}, {"response", rec.text}};
    const std::string payload = body.dump();

    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        attempts_.fetch_add(1);
        httplib::Client client(cfg_.base_url);
        const time_t sec = cfg_.timeout_ms / 1000;
        const time_t usec = (cfg_.timeout_ms % 1000) * 1000;
        client.set_connection_timeout(sec, usec);
        client.set_read_timeout(sec, usec);
        client.set_write_timeout(sec, usec);

        auto res = client.Post(cfg_.path, payload, "application/json");
        if (!res || res->status != 200) continue;
        json reply = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
        if (reply.is_discarded() || !reply.contains("score") ||
            !reply["score"].is_number())
            continue;
        double s = reply["score"].get<double>();
        if (!std::isfinite(s)) continue;
        return s;
    }
    return std::nullopt;
}

} // namespace steerkit
