#include "fairgen/json_io.hpp"

#include <fstream>

namespace fairgen {

Json to_json(const AttributeScheme& scheme) {
    return Json{{"name", scheme.name}, {"kind", scheme_kind_name(scheme.kind)}, {"categories", scheme.categories}};
}

AttributeScheme scheme_from_json(const Json& j) {
    AttributeScheme s;
    s.name = require_string(j, "name");
    s.kind = scheme_kind_from_name(require_string(j, "kind"));
    const Json& cats = require(j, "categories");
    if (!cats.is_array()) raise(Errc::schema_violation, "scheme categories must be an array");
    for (const auto& c : cats) s.categories.push_back(c.get<std::string>());
    validate(s);
    return s;
}

Json to_json(const Distribution& d) {
    Json j = to_json(d.scheme());
    j["probs"] = std::vector<double>(d.probs().begin(), d.probs().end());
    return j;
}

Distribution distribution_from_json(const Json& j) {
    AttributeScheme s = scheme_from_json(j);
    const Json& probs = require(j, "probs");
    if (!probs.is_array()) raise(Errc::schema_violation, "distribution probs must be an array");
    return Distribution(std::move(s), probs.get<std::vector<double>>());
}

Json to_json(const TargetSetting& t) {
    Json j{{"variant", t.variant_name()}};
    if (t.alpha) j["alpha"] = *t.alpha;
    if (t.focal) j["focal"] = *t.focal;
    if (t.dist) j["dist"] = to_json(*t.dist);
    return j;
}

TargetSetting target_setting_from_json(const Json& j) {
    TargetSetting t;
    t.variant = target_variant_from_name(require_string(j, "variant"));
    if (j.contains("alpha")) t.alpha = j.at("alpha").get<double>();
    if (j.contains("focal")) t.focal = j.at("focal").get<std::string>();
    if (j.contains("dist")) t.dist = distribution_from_json(j.at("dist"));
    using V = TargetSetting::Variant;
    if (t.variant == V::intermediate && !t.alpha)
        raise(Errc::schema_violation, "intermediate target setting needs alpha");
    if (t.variant == V::extreme && (!t.alpha || !t.focal))
        raise(Errc::schema_violation, "extreme target setting needs alpha and focal");
    if (t.variant == V::explicit_dist && !t.dist)
        raise(Errc::schema_violation, "explicit target setting needs dist");
    return t;
}

Json to_json(const AllocationPlan& plan) {
    Json alloc = Json::array();
    for (std::size_t i = 0; i < plan.counts.size(); ++i)
        alloc.push_back(Json{{"label", plan.scheme.categories[i]}, {"count", plan.counts[i]}});
    return Json{{"scheme", to_json(plan.scheme)}, {"total", plan.total}, {"alloc", alloc}};
}

AllocationPlan allocation_from_json(const Json& j) {
    AllocationPlan plan;
    plan.scheme = scheme_from_json(require(j, "scheme"));
    plan.total = static_cast<std::int64_t>(require_number(j, "total"));
    const Json& alloc = require(j, "alloc");
    if (!alloc.is_array() || alloc.size() != plan.scheme.size())
        raise(Errc::schema_violation, "alloc array does not match scheme size");
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < alloc.size(); ++i) {
        const Json& row = alloc[i];
        if (require_string(row, "label") != plan.scheme.categories[i])
            raise(Errc::schema_violation, "alloc labels out of order with scheme");
        std::int64_t c = static_cast<std::int64_t>(require_number(row, "count"));
        if (c < 0) raise(Errc::schema_violation, "negative allocation count");
        plan.counts.push_back(c);
        sum += c;
    }
    if (sum != plan.total) raise(Errc::schema_violation, "allocation counts do not sum to total");
    return plan;
}

Json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io, "cannot open " + path.string());
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) raise(Errc::schema_violation, "invalid JSON in " + path.string());
    return j;
}

void save_json_file(const std::filesystem::path& path, const Json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) raise(Errc::io, "cannot write " + tmp.string());
        out << j.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

Json strip_volatile(Json j) {
    if (j.is_object()) {
        j.erase("created_at");
        j.erase("timestamp");
        for (auto& [key, value] : j.items()) value = strip_volatile(value);
    } else if (j.is_array()) {
        for (auto& value : j) value = strip_volatile(value);
    }
    return j;
}

const Json& require(const Json& j, const std::string& key) {
    if (!j.is_object() || !j.contains(key)) raise(Errc::schema_violation, "missing field '" + key + "'");
    return j.at(key);
}

std::string require_string(const Json& j, const std::string& key) {
    const Json& v = require(j, key);
    if (!v.is_string()) raise(Errc::schema_violation, "field '" + key + "' must be a string");
    return v.get<std::string>();
}

double require_number(const Json& j, const std::string& key) {
    const Json& v = require(j, key);
    if (!v.is_number()) raise(Errc::schema_violation, "field '" + key + "' must be a number");
    return v.get<double>();
}

} // namespace fairgen
