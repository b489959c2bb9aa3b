#include "fairgen/providers.hpp"

#include <cstdlib>

#include <httplib.h>

namespace fairgen {

StubLlmProvider StubLlmProvider::from_file(const std::filesystem::path& path) {
    const Json j = load_json_file(path);
    std::map<std::string, std::string> by_concept;
    std::string default_response;
    if (j.contains("default")) default_response = j.at("default").dump();
    for (const auto& [key, value] : require(j, "responses").items())
        by_concept[key] = value.dump();
    return StubLlmProvider(std::move(by_concept), std::move(default_response));
}

std::string StubLlmProvider::complete(const std::string& instruction) {
    ++calls_;
    // The instruction quotes the concept on its own line: Concept: "..."
    for (const auto& [concept_key, response] : by_concept_)
        if (instruction.find("Concept: \"" + concept_key + "\"") != std::string::npos) return response;
    if (!default_response_.empty()) return default_response_;
    raise(Errc::transport, "stub provider has no response for this instruction");
}

HttpProviderConfig HttpProviderConfig::from_json_file(const std::filesystem::path& path) {
    const Json j = load_json_file(path);
    HttpProviderConfig c;
    c.base_url = require_string(j, "base_url");
    if (j.contains("path")) c.path = j.at("path").get<std::string>();
    if (j.contains("model")) c.model = j.at("model").get<std::string>();
    if (j.contains("api_key_env")) c.api_key_env = j.at("api_key_env").get<std::string>();
    if (j.contains("temperature")) c.temperature = j.at("temperature").get<double>();
    if (j.contains("timeout_seconds")) c.timeout_seconds = j.at("timeout_seconds").get<int>();
    if (j.contains("threshold")) c.threshold = j.at("threshold").get<double>();
    return c;
}

HttpLlmProvider::HttpLlmProvider(HttpProviderConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) raise(Errc::config, "provider base_url is empty");
}

std::string HttpLlmProvider::id() const { return "http:" + config_.base_url + ":" + config_.model; }

std::string HttpLlmProvider::complete(const std::string& instruction) {
    const char* key = nullptr;
    if (!config_.api_key_env.empty()) {
        key = std::getenv(config_.api_key_env.c_str());
        if (!key || !*key)
            raise(Errc::config, "API key environment variable " + config_.api_key_env + " is not set");
    }

    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);

    httplib::Headers headers;
    if (key) headers.emplace("Authorization", std::string("Bearer ") + key);

    const Json body{{"model", config_.model},
                    {"temperature", config_.temperature},
                    {"messages", Json::array({Json{{"role", "user"}, {"content", instruction}}})}};
    auto res = client.Post(config_.path, headers, body.dump(), "application/json");
    if (!res)
        raise(Errc::transport, "provider unreachable: " + config_.base_url + " (" +
                                   httplib::to_string(res.error()) + ")");
    if (res->status != 200)
        raise(Errc::transport, "provider returned HTTP " + std::to_string(res->status) + ": " + res->body);

    const Json j = Json::parse(res->body, nullptr, false);
    if (j.is_discarded()) raise(Errc::schema_violation, "provider returned non-JSON body");
    try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception&) {
        raise(Errc::schema_violation, "provider response missing choices[0].message.content");
    }
}

} // namespace fairgen
