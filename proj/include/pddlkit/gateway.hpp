#pragma once

// Uniform access to chat-completion and embedding endpoints. HttpProvider
// speaks the de-facto standard HTTP+JSON chat shape (messages in, choices
// out); ReplayProvider serves scripted responses for deterministic tests.
// LlmClient adds retry with exponential backoff on transport errors, an
// append-only transcript, and a digest-keyed embedding cache.
//
// The API credential is read from an environment variable at construction
// and lives only in the Authorization header of outgoing requests; it is
// never serialized into transcripts, traces, or logs.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pddlkit/errors.hpp"

namespace pddlkit::gateway {

struct ChatMessage {
    std::string role;
    std::string content;

    friend bool operator==(const ChatMessage& a, const ChatMessage& b) {
        return a.role == b.role && a.content == b.content;
    }
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 4096;
    std::string tag;  // step label, e.g. "localize", "refine-round-2"
};

struct ProviderConfig {
    std::string endpoint_url;        // e.g. http://localhost:8000/v1
    std::string model_name;
    std::string credential_env_var = "LLM_API_KEY";
    double request_timeout_seconds = 120.0;
    int max_retries = 2;
    std::string embedding_model;     // defaults to model_name when empty
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string chat(const ChatRequest& request) = 0;
    virtual std::vector<double> embed(const std::string& text) = 0;
    virtual std::string name() const = 0;
};

// --- request digest -------------------------------------------------------

namespace detail {

inline std::uint64_t fnv1a(const std::string& data, std::uint64_t seed = 14695981039346656037ull) {
    std::uint64_t hash = seed;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

inline std::string to_hex(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

} // namespace detail

inline std::string request_digest(const ChatRequest& request) {
    std::ostringstream flat;
    flat << request.temperature << '\x1f' << request.max_tokens;
    for (const auto& m : request.messages) flat << '\x1f' << m.role << '\x1e' << m.content;
    return detail::to_hex(detail::fnv1a(flat.str()));
}

inline std::string text_digest(const std::string& text) {
    return detail::to_hex(detail::fnv1a(text));
}

// --- replay provider ------------------------------------------------------

/// Scripted provider: each tag owns an ordered response list consumed one
/// call at a time. Unscripted tags and exhausted lists raise ScriptGapError
/// so test scripts must be exhaustive. Requests are captured for
/// prompt-content assertions.
class ReplayProvider : public Provider {
public:
    ReplayProvider() = default;
    explicit ReplayProvider(std::map<std::string, std::vector<std::string>> script,
                            std::map<std::string, std::vector<double>> embeddings = {})
        : script_(std::move(script)), embeddings_(std::move(embeddings)) {}

    std::string chat(const ChatRequest& request) override {
        std::lock_guard<std::mutex> lock(mutex_);
        captured_.push_back(request);
        auto it = script_.find(request.tag);
        if (it == script_.end())
            throw ScriptGapError("no scripted response for tag '" + request.tag + "'");
        std::size_t& used = consumed_[request.tag];
        if (used >= it->second.size())
            throw ScriptGapError("scripted responses for tag '" + request.tag +
                                 "' exhausted after " + std::to_string(used) + " calls");
        return it->second[used++];
    }

    std::vector<double> embed(const std::string& text) override {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = embeddings_.find(text);
        if (it == embeddings_.end())
            throw ScriptGapError("no scripted embedding for text of " +
                                 std::to_string(text.size()) + " bytes");
        return it->second;
    }

    std::string name() const override { return "replay"; }

    std::vector<ChatRequest> captured_requests() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return captured_;
    }

private:
    std::map<std::string, std::vector<std::string>> script_;
    std::map<std::string, std::vector<double>> embeddings_;
    std::map<std::string, std::size_t> consumed_;
    std::vector<ChatRequest> captured_;
    mutable std::mutex mutex_;
};

inline std::shared_ptr<Provider> replay_provider(
    std::map<std::string, std::vector<std::string>> script,
    std::map<std::string, std::vector<double>> embeddings = {}) {
    return std::make_shared<ReplayProvider>(std::move(script), std::move(embeddings));
}

// --- transcript -----------------------------------------------------------

struct TranscriptEntry {
    std::string tag;
    std::string request_digest;
    std::string response;
    double latency_ms = 0.0;
};

// --- client ---------------------------------------------------------------

struct RetryPolicy {
    int max_retries = 2;
    int base_delay_ms = 100;  // doubles per attempt; 0 in tests
};

class LlmClient {
public:
    explicit LlmClient(std::shared_ptr<Provider> provider, RetryPolicy retry = {})
        : provider_(std::move(provider)), retry_(retry) {}

    std::string complete(const ChatRequest& request) {
        if (request.messages.empty()) throw GatewayError("chat request has no messages");
        if (request.tag.empty()) throw GatewayError("chat request has no tag");
        auto start = std::chrono::steady_clock::now();
        std::string response = with_retries([&] { return provider_->chat(request); });
        double latency = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
        append_transcript({request.tag, request_digest(request), response, latency});
        return response;
    }

    std::vector<double> embed(const std::string& text) {
        std::string digest = text_digest(text);
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = embed_cache_.find(digest);
            if (it != embed_cache_.end()) return it->second;
        }
        std::vector<double> vector = with_retries([&] { return provider_->embed(text); });
        std::lock_guard<std::mutex> lock(mutex_);
        embed_cache_.emplace(digest, vector);
        return vector;
    }

    std::vector<TranscriptEntry> transcript() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return transcript_;
    }

    void save_transcript_jsonl(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write " + path);
        std::lock_guard<std::mutex> lock(mutex_);
        for (const auto& e : transcript_) {
            nlohmann::ordered_json j;
            j["tag"] = e.tag;
            j["request_digest"] = e.request_digest;
            j["response"] = e.response;
            j["latency_ms"] = e.latency_ms;
            out << j.dump() << "\n";
        }
    }

    Provider& provider() { return *provider_; }

private:
    std::shared_ptr<Provider> provider_;
    RetryPolicy retry_;
    std::vector<TranscriptEntry> transcript_;
    std::map<std::string, std::vector<double>> embed_cache_;
    mutable std::mutex mutex_;

    template <typename Fn>
    auto with_retries(Fn&& fn) -> decltype(fn()) {
        int attempt = 0;
        while (true) {
            try {
                return fn();
            } catch (const TransportError& e) {
                if (attempt >= retry_.max_retries)
                    throw GatewayError("retries exhausted after " +
                                       std::to_string(attempt + 1) + " attempts: " + e.what());
                int delay = retry_.base_delay_ms << attempt;
                if (delay > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay));
                ++attempt;
            }
        }
    }

    void append_transcript(TranscriptEntry entry) {
        std::lock_guard<std::mutex> lock(mutex_);
        transcript_.push_back(std::move(entry));
    }
};

} // namespace pddlkit::gateway
