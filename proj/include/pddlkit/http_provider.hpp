#pragma once

// HTTP provider speaking the standard chat-completion and embedding JSON
// shapes. The endpoint URL may carry a path prefix ("http://host:1234/v1");
// requests go to <prefix>/chat/completions and <prefix>/embeddings. The
// credential is resolved from the configured environment variable once, at
// construction, and is attached only as a bearer header.

#include <cstdlib>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "pddlkit/errors.hpp"
#include "pddlkit/gateway.hpp"

namespace pddlkit::gateway {

class HttpProvider : public Provider {
public:
    explicit HttpProvider(ProviderConfig config) : cfg_(std::move(config)) {
        if (cfg_.endpoint_url.empty()) throw ConfigError("provider endpoint_url is empty");
        if (const char* value = std::getenv(cfg_.credential_env_var.c_str()))
            credential_ = value;
        split_endpoint();
    }

    std::string chat(const ChatRequest& request) override {
        nlohmann::json body;
        body["model"] = cfg_.model_name;
        body["temperature"] = request.temperature;
        body["max_tokens"] = request.max_tokens;
        body["messages"] = nlohmann::json::array();
        for (const auto& m : request.messages)
            body["messages"].push_back({{"role", m.role}, {"content", m.content}});
        nlohmann::json reply = post(path_prefix_ + "/chat/completions", body);
        try {
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw GatewayError(std::string("malformed chat response: ") + e.what());
        }
    }

    std::vector<double> embed(const std::string& text) override {
        nlohmann::json body;
        body["model"] = cfg_.embedding_model.empty() ? cfg_.model_name : cfg_.embedding_model;
        body["input"] = text;
        nlohmann::json reply = post(path_prefix_ + "/embeddings", body);
        try {
            return reply.at("data").at(0).at("embedding").get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            throw GatewayError(std::string("malformed embedding response: ") + e.what());
        }
    }

    std::string name() const override { return "http:" + cfg_.model_name; }

private:
    ProviderConfig cfg_;
    std::string credential_;
    std::string host_;         // scheme://host[:port]
    std::string path_prefix_;  // possibly empty

    void split_endpoint() {
        const std::string& url = cfg_.endpoint_url;
        std::size_t scheme = url.find("://");
        std::size_t path_start =
            url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
        if (path_start == std::string::npos) {
            host_ = url;
        } else {
            host_ = url.substr(0, path_start);
            path_prefix_ = url.substr(path_start);
            while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
        }
    }

    nlohmann::json post(const std::string& path, const nlohmann::json& body) {
        httplib::Client client(host_);
        auto seconds = static_cast<time_t>(cfg_.request_timeout_seconds);
        client.set_connection_timeout(seconds, 0);
        client.set_read_timeout(seconds, 0);
        client.set_write_timeout(seconds, 0);
        httplib::Headers headers;
        if (!credential_.empty()) headers.emplace("Authorization", "Bearer " + credential_);
        auto result = client.Post(path, headers, body.dump(), "application/json");
        if (!result)
            throw TransportError("request to " + host_ + path + " failed: " +
                                 httplib::to_string(result.error()));
        if (result->status == 429 || result->status >= 500)
            throw TransportError("endpoint returned status " + std::to_string(result->status));
        if (result->status != 200)
            throw GatewayError("endpoint returned status " + std::to_string(result->status) +
                               ": " + result->body);
        try {
            return nlohmann::json::parse(result->body);
        } catch (const nlohmann::json::exception& e) {
            throw GatewayError(std::string("response is not valid JSON: ") + e.what());
        }
    }
};

} // namespace pddlkit::gateway
