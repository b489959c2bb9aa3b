#include "fairgen/demographics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>

namespace fairgen {

std::string DemographicQuery::scope_string() const {
    switch (scope) {
    case Scope::global: return "global";
    case Scope::us: return "us";
    case Scope::custom: return custom_scope;
    }
    return "global";
}

Scope DemographicQuery::scope_from_string(std::string_view s, std::string* custom_out) {
    if (s == "global") return Scope::global;
    if (s == "us") return Scope::us;
    if (custom_out) *custom_out = std::string(s);
    return Scope::custom;
}

const char* fallback_reason_name(RoutingDecision::FallbackReason r) {
    switch (r) {
    case RoutingDecision::FallbackReason::none: return "none";
    case RoutingDecision::FallbackReason::no_data: return "no_data";
    case RoutingDecision::FallbackReason::low_confidence: return "low_confidence";
    case RoutingDecision::FallbackReason::user_forced: return "user_forced";
    }
    return "none";
}

namespace {

std::string lowercased(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trimmed(std::string s) {
    const auto notspace = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
    return s;
}

} // namespace

std::string extract_concept(std::string_view base_prompt) {
    if (base_prompt.empty()) raise(Errc::invalid_argument, "empty prompt");
    std::string low = trimmed(lowercased(base_prompt));
    constexpr std::string_view kTemplate = "a full-color headshot of ";
    if (low.rfind(kTemplate, 0) == 0) {
        std::string rest = trimmed(low.substr(kTemplate.size()));
        if (rest.rfind("an ", 0) == 0) rest = rest.substr(3);
        else if (rest.rfind("a ", 0) == 0) rest = rest.substr(2);
        if (!rest.empty()) return rest;
    }
    return low;
}

std::string demographics_instruction(const DemographicQuery& query) {
    Json schema{{"concept", "<string>"},
                {"scope", "<string>"},
                {"groups", Json::array({Json{{"label", "<string>"}, {"proportion", "<number in [0,1]>"}}})},
                {"confidence", "<number in [0,1]>"},
                {"sources", Json::array({"<citation string>"})}};
    std::string s;
    s += "You retrieve population-level demographic statistics.\n";
    s += "Concept: \"" + query.concept_name + "\"\n";
    s += "Scope: \"" + query.scope_string() + "\"\n\n";
    s += "Reply with a single JSON object, no prose, matching this schema:\n";
    s += schema.dump(2);
    s += "\n\nRules:\n";
    s += "- groups: the demographic groups relevant to the concept under the scope, ";
    s += "each with its population proportion; proportions must sum to 1.\n";
    s += "- Keep any residual share as an explicit \"Other\" group; never drop it.\n";
    s += "- sources: citations for the statistics used.\n";
    s += "- confidence: your confidence in [0,1] that these statistics are real and applicable.\n";
    s += "- If the concept is ill-defined or has no known population-level statistics ";
    s += "(for example an emotion such as \"a happy person\"), reply with confidence 0.0, ";
    s += "an empty groups array, and empty sources.\n";
    return s;
}

namespace {

// Providers often wrap JSON in markdown fences or prose; take the outermost
// object.
std::string extract_json_object(const std::string& raw) {
    const auto open = raw.find('{');
    const auto close = raw.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open)
        raise(Errc::schema_violation, "provider response contains no JSON object");
    return raw.substr(open, close - open + 1);
}

} // namespace

DemographicResult parse_provider_response(const std::string& raw, const DemographicQuery& query) {
    DemographicResult result;
    result.raw_response = raw;

    Json j = Json::parse(extract_json_object(raw), nullptr, false);
    if (j.is_discarded()) raise(Errc::schema_violation, "provider response is not valid JSON");

    result.confidence = require_number(j, "confidence");
    if (result.confidence < 0.0 || result.confidence > 1.0)
        raise(Errc::schema_violation, "confidence outside [0,1]");

    const Json& groups = require(j, "groups");
    if (!groups.is_array()) raise(Errc::schema_violation, "groups must be an array");

    if (j.contains("sources")) {
        const Json& sources = j.at("sources");
        if (!sources.is_array()) raise(Errc::schema_violation, "sources must be an array");
        for (const auto& s : sources) {
            if (!s.is_string()) raise(Errc::schema_violation, "sources must be strings");
            result.sources.push_back(s.get<std::string>());
        }
    }

    std::vector<double> props;
    for (const auto& g : groups) {
        result.groups.push_back(require_string(g, "label"));
        const double p = require_number(g, "proportion");
        if (p < 0.0 || p > 1.0) raise(Errc::schema_violation, "group proportion outside [0,1]");
        props.push_back(p);
    }

    // Confidence/groups contract: zero confidence means no data, and data
    // requires nonzero confidence.
    if (result.confidence == 0.0 && !result.groups.empty())
        raise(Errc::contract_violation, "confidence 0.0 must come with no demographic data");

    if (!result.groups.empty()) {
        double sum = 0.0;
        for (double p : props) sum += p;
        if (std::abs(sum - 1.0) > kProportionSumTolerance)
            raise(Errc::schema_violation,
                  "group proportions sum to " + std::to_string(sum) + ", outside tolerance");
        for (double& p : props) p /= sum; // exact unit sum for the Distribution invariant
        result.proportions =
            Distribution(AttributeScheme::demographic("llm:" + query.concept_name, result.groups), std::move(props));
    }
    return result;
}

Json to_json(const DemographicResult& r) {
    Json groups = Json::array();
    if (r.proportions)
        for (std::size_t i = 0; i < r.groups.size(); ++i)
            groups.push_back(Json{{"label", r.groups[i]}, {"proportion", (*r.proportions)[i]}});
    return Json{{"groups", std::move(groups)},
                {"confidence", r.confidence},
                {"sources", r.sources},
                {"raw_response", r.raw_response}};
}

DemographicResult demographic_result_from_json(const Json& j) {
    DemographicResult r;
    r.confidence = require_number(j, "confidence");
    if (j.contains("raw_response")) r.raw_response = j.at("raw_response").get<std::string>();
    for (const auto& s : require(j, "sources")) r.sources.push_back(s.get<std::string>());
    std::vector<double> props;
    for (const auto& g : require(j, "groups")) {
        r.groups.push_back(require_string(g, "label"));
        props.push_back(require_number(g, "proportion"));
    }
    if (!r.groups.empty())
        r.proportions = Distribution(AttributeScheme::demographic("llm:cached", r.groups), std::move(props));
    return r;
}

namespace {

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string cache_key(const DemographicQuery& q, const std::string& provider_id) {
    return q.concept_name + "\x1f" + q.scope_string() + "\x1f" + provider_id;
}

std::mutex g_cache_mutex;

} // namespace

DemographicResult retrieve_demographics(const DemographicQuery& query, LlmProvider& provider,
                                        const RetrievalOptions& options) {
    if (query.concept_name.empty()) raise(Errc::invalid_argument, "query concept is empty");

    const bool caching = options.use_cache && !options.cache_dir.empty();
    const std::string key = cache_key(query, provider.id());
    std::filesystem::path cache_path;
    if (caching) {
        char hex[17];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(key)));
        cache_path = options.cache_dir / (std::string(hex) + ".json");
        std::lock_guard lock(g_cache_mutex);
        if (std::filesystem::exists(cache_path)) {
            const Json j = load_json_file(cache_path);
            if (j.value("key", "") == key) return demographic_result_from_json(require(j, "result"));
        }
    }

    std::string raw;
    try {
        raw = provider.complete(demographics_instruction(query));
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        raise(Errc::transport, std::string("provider call failed: ") + e.what());
    }

    DemographicResult result = parse_provider_response(raw, query);

    if (caching) {
        std::lock_guard lock(g_cache_mutex);
        save_json_file(cache_path, Json{{"key", key},
                                        {"concept", query.concept_name},
                                        {"scope", query.scope_string()},
                                        {"provider", provider.id()},
                                        {"result", to_json(result)}});
    }
    return result;
}

RoutingDecision route(const DemographicResult& result, double threshold, bool user_forced_fallback) {
    if (threshold < 0.0 || threshold > 1.0)
        raise(Errc::invalid_argument, "threshold outside [0,1]");
    RoutingDecision d;
    d.threshold = threshold;
    if (user_forced_fallback) {
        d.outcome = RoutingDecision::Outcome::use_fallback;
        d.reason = RoutingDecision::FallbackReason::user_forced;
        return d;
    }
    if (result.groups.empty()) {
        d.outcome = RoutingDecision::Outcome::use_fallback;
        d.reason = RoutingDecision::FallbackReason::no_data;
        return d;
    }
    if (result.confidence < threshold) {
        d.outcome = RoutingDecision::Outcome::use_fallback;
        d.reason = RoutingDecision::FallbackReason::low_confidence;
        return d;
    }
    d.outcome = RoutingDecision::Outcome::use_demographics;
    d.result = result;
    return d;
}

} // namespace fairgen
