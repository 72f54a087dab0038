#include "tabeval/llm_gateway.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <semaphore>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace tabeval::gateway {

namespace {

using nlohmann::json;

constexpr std::string_view kReplayPrefix = "replay:";
constexpr int kMaxAttempts = 3;
constexpr std::chrono::milliseconds kBackoffBase{250};

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

// The journal filename comes from the model name; keep it path-safe.
std::string sanitize_for_filename(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                  (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
        out.push_back(ok ? c : '_');
    }
    return out.empty() ? std::string("model") : out;
}

FinishReason finish_reason_from_name(std::string_view s) {
    if (s == "stop") return FinishReason::Stop;
    if (s == "length") return FinishReason::Length;
    return FinishReason::Error;
}

struct CacheEntry {
    std::string raw_text;
    FinishReason finish_reason = FinishReason::Stop;
};

struct ParsedUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto slash = url.find('/', host_start);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

std::string excerpt_of(const std::string& body) {
    constexpr std::size_t kLimit = 200;
    if (body.size() <= kLimit) return body;
    return body.substr(0, kLimit) + "...";
}

}  // namespace

std::string_view finish_reason_name(FinishReason r) {
    switch (r) {
        case FinishReason::Stop: return "stop";
        case FinishReason::Length: return "length";
        case FinishReason::Error: return "error";
    }
    return "error";
}

ProviderError::ProviderError(int status, std::string body_excerpt)
    : std::runtime_error("provider error (status " + std::to_string(status) +
                         "): " + body_excerpt),
      status_(status),
      excerpt_(std::move(body_excerpt)) {}

ReplayMiss::ReplayMiss(std::string request_hash)
    : std::runtime_error("replay fixture has no entry for request " + request_hash),
      hash_(std::move(request_hash)) {}

RateLimited::RateLimited()
    : std::runtime_error("provider rate limit persisted across retries") {}

std::string request_hash(const ModelConfig& config, std::string_view prompt) {
    // nlohmann objects serialize with sorted keys, so dump() is canonical.
    json j;
    j["max_tokens"] = config.max_output_tokens;
    j["model"] = config.name;
    j["prompt"] = std::string(prompt);
    j["temperature"] = config.temperature;
    j["top_p"] = config.top_p;
    return sha256_hex(j.dump());
}

std::string model_filename_stem(std::string_view model) {
    return sanitize_for_filename(model);
}

RateLimiter::RateLimiter(std::size_t per_minute) : per_minute_(per_minute) {}

void RateLimiter::acquire() {
    acquire([] { return std::chrono::steady_clock::now(); },
            [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); });
}

void RateLimiter::acquire(const Clock& now, const Sleeper& sleep) {
    if (per_minute_ == 0) return;
    constexpr auto kWindow = std::chrono::seconds(60);
    for (;;) {
        std::chrono::milliseconds wait{0};
        {
            std::lock_guard lock(mutex_);
            auto t = now();
            while (!window_.empty() && t - window_.front() >= kWindow) {
                window_.pop_front();
            }
            if (window_.size() < per_minute_) {
                window_.push_back(t);
                return;
            }
            wait = std::chrono::duration_cast<std::chrono::milliseconds>(
                       window_.front() + kWindow - t) +
                   std::chrono::milliseconds(1);
        }
        sleep(wait);
    }
}

struct Gateway::Impl {
    std::unordered_map<std::string, CacheEntry> cache;
    std::mutex cache_mutex;
    std::ofstream journal;
    bool replay_mode = false;
    std::unordered_map<std::string, std::string> replay;
    RateLimiter limiter;
    std::counting_semaphore<> slots;

    Impl(std::size_t per_minute, std::size_t parallelism)
        : limiter(per_minute),
          slots(static_cast<std::ptrdiff_t>(parallelism == 0 ? 1 : parallelism)) {}
};

Gateway::Gateway(ModelConfig config) : config_(std::move(config)) {
    impl_ = std::make_unique<Impl>(config_.requests_per_minute, config_.parallelism);

    if (config_.endpoint.rfind(kReplayPrefix, 0) == 0) {
        impl_->replay_mode = true;
        std::string path = config_.endpoint.substr(kReplayPrefix.size());
        std::ifstream in(path);
        if (!in) {
            throw std::runtime_error("cannot open replay fixture: " + path);
        }
        std::string line;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            json j = json::parse(line);
            impl_->replay[j.at("request_hash").get<std::string>()] =
                j.at("raw_text").get<std::string>();
        }
    }

    std::filesystem::create_directories(config_.cache_dir);
    std::string journal_path = cache_path();
    if (std::ifstream in(journal_path); in) {
        std::string line;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            json j = json::parse(line);
            CacheEntry entry;
            entry.raw_text = j.at("raw_text").get<std::string>();
            entry.finish_reason =
                finish_reason_from_name(j.value("finish_reason", "stop"));
            impl_->cache[j.at("request_hash").get<std::string>()] = std::move(entry);
        }
    }
    impl_->journal.open(journal_path, std::ios::app);
    if (!impl_->journal) {
        throw std::runtime_error("cannot open cache journal: " + journal_path);
    }
}

Gateway::~Gateway() = default;

std::string Gateway::cache_path() const {
    return (std::filesystem::path(config_.cache_dir) /
            (sanitize_for_filename(config_.name) + ".jsonl"))
        .string();
}

ModelResponse Gateway::complete(std::string_view prompt) {
    std::string hash = request_hash(config_, prompt);

    {
        std::lock_guard lock(impl_->cache_mutex);
        auto it = impl_->cache.find(hash);
        if (it != impl_->cache.end()) {
            return {it->second.raw_text, it->second.finish_reason, 0, true, hash};
        }
    }

    CacheEntry entry;
    long latency_ms = 0;

    if (impl_->replay_mode) {
        auto it = impl_->replay.find(hash);
        if (it == impl_->replay.end()) throw ReplayMiss(hash);
        entry.raw_text = it->second;
        entry.finish_reason = FinishReason::Stop;
    } else {
        // Bound in-flight calls, then respect the per-minute budget.
        impl_->slots.acquire();
        struct Release {
            std::counting_semaphore<>& s;
            ~Release() { s.release(); }
        } release{impl_->slots};

        impl_->limiter.acquire();

        ParsedUrl url = split_url(config_.endpoint);
        httplib::Client client(url.base);
        client.set_connection_timeout(30);
        client.set_read_timeout(120);
        httplib::Headers headers;
        if (!config_.api_key_env.empty()) {
            if (const char* key = std::getenv(config_.api_key_env.c_str())) {
                headers.emplace("Authorization", std::string("Bearer ") + key);
            }
        }
        json body = {
            {"model", config_.name},
            {"messages", json::array({{{"role", "user"},
                                       {"content", std::string(prompt)}}})},
            {"temperature", config_.temperature},
            {"top_p", config_.top_p},
            {"max_tokens", config_.max_output_tokens},
        };
        std::string payload = body.dump();

        int last_status = 0;
        std::string last_body;
        auto started = std::chrono::steady_clock::now();
        bool got_response = false;
        for (int attempt = 1; attempt <= kMaxAttempts && !got_response; ++attempt) {
            auto res = client.Post(url.path, headers, payload, "application/json");
            if (res && res->status == 200) {
                last_body = res->body;
                got_response = true;
                break;
            }
            last_status = res ? res->status : 0;
            last_body = res ? res->body : "network error";
            bool transient = !res || res->status == 429 || res->status >= 500;
            if (!transient) break;
            if (attempt < kMaxAttempts) {
                std::this_thread::sleep_for(kBackoffBase * (1 << (attempt - 1)));
            }
        }
        latency_ms = static_cast<long>(
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - started)
                .count());
        if (!got_response) {
            if (last_status == 429) throw RateLimited();
            throw ProviderError(last_status, excerpt_of(last_body));
        }

        json parsed;
        try {
            parsed = json::parse(last_body);
            const json& choice = parsed.at("choices").at(0);
            entry.raw_text = choice.at("message").at("content").get<std::string>();
            entry.finish_reason =
                finish_reason_from_name(choice.value("finish_reason", "stop"));
        } catch (const json::exception& e) {
            throw ProviderError(200, std::string("malformed completion body: ") +
                                         e.what());
        }
    }

    {
        std::lock_guard lock(impl_->cache_mutex);
        if (impl_->cache.find(hash) == impl_->cache.end()) {
            json j;
            j["request_hash"] = hash;
            j["raw_text"] = entry.raw_text;
            j["finish_reason"] = std::string(finish_reason_name(entry.finish_reason));
            impl_->journal << j.dump() << '\n';
            impl_->journal.flush();
            impl_->cache[hash] = entry;
        }
    }
    return {entry.raw_text, entry.finish_reason, latency_ms, false, hash};
}

void save_replay_fixture(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& entries) {
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write replay fixture: " + path);
    for (const auto& [hash, text] : entries) {
        json j;
        j["request_hash"] = hash;
        j["raw_text"] = text;
        out << j.dump() << '\n';
    }
}

}  // namespace tabeval::gateway
