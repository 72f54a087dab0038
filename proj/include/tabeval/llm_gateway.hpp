#pragma once

#include <chrono>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tabeval::gateway {

struct ModelConfig {
    std::string name;
    std::string endpoint;  // http(s) URL, or "replay:<fixture path>"
    std::size_t context_limit = 0;  // approx tokens, 0 = unlimited
    std::size_t default_shots = 4;
    double temperature = 0.0;
    double top_p = 1.0;
    std::size_t max_output_tokens = 1024;
    std::size_t requests_per_minute = 0;  // 0 = unlimited
    std::size_t parallelism = 4;          // in-flight provider calls
    std::string api_key_env;              // env var NAME; value never configured
    std::string cache_dir = "cache";
};

enum class FinishReason { Stop, Length, Error };
std::string_view finish_reason_name(FinishReason r);

struct ModelResponse {
    std::string raw_text;
    FinishReason finish_reason = FinishReason::Stop;
    long latency_ms = 0;  // 0 for cache and replay hits (reproducible output)
    bool cached = false;
    std::string request_hash;
};

class ProviderError : public std::runtime_error {
public:
    ProviderError(int status, std::string body_excerpt);
    int status() const { return status_; }
    const std::string& body_excerpt() const { return excerpt_; }

private:
    int status_;
    std::string excerpt_;
};

class ReplayMiss : public std::runtime_error {
public:
    explicit ReplayMiss(std::string request_hash);
    const std::string& request_hash() const { return hash_; }

private:
    std::string hash_;
};

class RateLimited : public std::runtime_error {
public:
    RateLimited();
};

// SHA-256 hex over (model name, prompt, temperature, top_p, max tokens).
std::string request_hash(const ModelConfig& config, std::string_view prompt);

// Model name reduced to [A-Za-z0-9._-], as used in cache, replay-fixture
// and run-record filenames.
std::string model_filename_stem(std::string_view model);

// Sliding-window limiter; timing is injectable so tests can run on a fake
// clock. Thread-safe.
class RateLimiter {
public:
    using Clock = std::function<std::chrono::steady_clock::time_point()>;
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit RateLimiter(std::size_t per_minute);
    void acquire();  // real clock
    void acquire(const Clock& now, const Sleeper& sleep);

private:
    std::size_t per_minute_;
    std::mutex mutex_;
    std::deque<std::chrono::steady_clock::time_point> window_;
};

// One gateway per model config: owns the cache journal, the limiter and the
// replay table. complete() may be called concurrently.
class Gateway {
public:
    explicit Gateway(ModelConfig config);
    ~Gateway();

    // Cache first; then replay table or HTTP chat-completion with 3-attempt
    // exponential backoff on transient failures.
    ModelResponse complete(std::string_view prompt);

    const ModelConfig& config() const { return config_; }
    std::string cache_path() const;

private:
    struct Impl;
    ModelConfig config_;
    std::unique_ptr<Impl> impl_;
};

// Writes a replay fixture (request_hash -> raw_text JSONL).
void save_replay_fixture(const std::string& path,
                         const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace tabeval::gateway
