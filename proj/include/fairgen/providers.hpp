#pragma once

#include <map>
#include <memory>
#include <string>

#include "fairgen/demographics.hpp"

namespace fairgen {

// Canned responses for tests and offline use. Matches on the concept quoted
// in the instruction; falls back to default_response.
class StubLlmProvider : public LlmProvider {
public:
    StubLlmProvider() = default;
    explicit StubLlmProvider(std::map<std::string, std::string> by_concept, std::string default_response = "")
        : by_concept_(std::move(by_concept)), default_response_(std::move(default_response)) {}
    StubLlmProvider(std::initializer_list<std::pair<const std::string, std::string>> items)
        : by_concept_(items) {}

    static StubLlmProvider from_file(const std::filesystem::path& path);

    void set_response(const std::string& concept_key, std::string response) {
        by_concept_[concept_key] = std::move(response);
    }
    void set_default(std::string response) { default_response_ = std::move(response); }

    int calls() const { return calls_; }

    std::string id() const override { return "stub"; }
    std::string complete(const std::string& instruction) override;

private:
    std::map<std::string, std::string> by_concept_;
    std::string default_response_;
    int calls_ = 0;
};

struct HttpProviderConfig {
    std::string base_url;                  // e.g. "https://api.openai.com"
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-4o";
    std::string api_key_env = "FAIRGEN_LLM_API_KEY";
    double temperature = 0.0;
    int timeout_seconds = 60;
    std::optional<double> threshold; // default routing threshold for this provider

    static HttpProviderConfig from_json_file(const std::filesystem::path& path);
};

// OpenAI-compatible chat-completions client. The API key is read from the
// configured environment variable at call time.
class HttpLlmProvider : public LlmProvider {
public:
    explicit HttpLlmProvider(HttpProviderConfig config);

    std::string id() const override;
    std::string complete(const std::string& instruction) override;

private:
    HttpProviderConfig config_;
};

} // namespace fairgen
