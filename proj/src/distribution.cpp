#include "fairgen/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace fairgen {

const char* scheme_kind_name(SchemeKind k) {
    switch (k) {
    case SchemeKind::skin_tone_fitzpatrick: return "skin_tone_fitzpatrick";
    case SchemeKind::skin_tone_bins3: return "skin_tone_bins3";
    case SchemeKind::skin_tone_monk: return "skin_tone_monk";
    case SchemeKind::demographic_labels: return "demographic_labels";
    case SchemeKind::custom: return "custom";
    }
    return "custom";
}

SchemeKind scheme_kind_from_name(std::string_view name) {
    if (name == "skin_tone_fitzpatrick") return SchemeKind::skin_tone_fitzpatrick;
    if (name == "skin_tone_bins3") return SchemeKind::skin_tone_bins3;
    if (name == "skin_tone_monk") return SchemeKind::skin_tone_monk;
    if (name == "demographic_labels") return SchemeKind::demographic_labels;
    if (name == "custom") return SchemeKind::custom;
    raise(Errc::invalid_argument, "unknown scheme kind: " + std::string(name));
}

std::optional<std::size_t> AttributeScheme::index_of(std::string_view label) const {
    for (std::size_t i = 0; i < categories.size(); ++i)
        if (categories[i] == label) return i;
    return std::nullopt;
}

AttributeScheme AttributeScheme::fitzpatrick6() {
    return {"fitzpatrick6", {"I", "II", "III", "IV", "V", "VI"}, SchemeKind::skin_tone_fitzpatrick};
}

AttributeScheme AttributeScheme::bins3() {
    return {"bins3", {"Light", "Medium", "Dark"}, SchemeKind::skin_tone_bins3};
}

AttributeScheme AttributeScheme::monk10() {
    return {"monk10",
            {"MST-1", "MST-2", "MST-3", "MST-4", "MST-5", "MST-6", "MST-7", "MST-8", "MST-9", "MST-10"},
            SchemeKind::skin_tone_monk};
}

AttributeScheme AttributeScheme::demographic(std::string name, std::vector<std::string> labels) {
    AttributeScheme s{std::move(name), std::move(labels), SchemeKind::demographic_labels};
    validate(s);
    return s;
}

void validate(const AttributeScheme& scheme) {
    if (scheme.categories.empty())
        raise(Errc::invalid_argument, "attribute scheme '" + scheme.name + "' has no categories");
    std::unordered_set<std::string_view> seen;
    for (const auto& c : scheme.categories)
        if (!seen.insert(c).second)
            raise(Errc::invalid_argument, "attribute scheme '" + scheme.name + "' repeats label '" + c + "'");
}

Distribution::Distribution(AttributeScheme scheme, std::vector<double> probs)
    : scheme_(std::move(scheme)), probs_(std::move(probs)) {
    validate(scheme_);
    if (probs_.size() != scheme_.size())
        raise(Errc::invalid_argument, "distribution over '" + scheme_.name + "' has " +
                                          std::to_string(probs_.size()) + " probs for " +
                                          std::to_string(scheme_.size()) + " categories");
    double sum = 0.0;
    for (double p : probs_) {
        if (!std::isfinite(p) || p < 0.0)
            raise(Errc::invalid_argument, "distribution over '" + scheme_.name + "' has a negative or non-finite probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kUnitSumTolerance)
        raise(Errc::invalid_argument, "distribution over '" + scheme_.name + "' sums to " +
                                          std::to_string(sum) + ", not 1");
}

double Distribution::prob(std::string_view label) const {
    auto idx = scheme_.index_of(label);
    if (!idx) raise(Errc::invalid_argument, "label '" + std::string(label) + "' not in scheme '" + scheme_.name + "'");
    return probs_[*idx];
}

Distribution Distribution::renormalized() const {
    double sum = std::accumulate(probs_.begin(), probs_.end(), 0.0);
    if (sum <= 0.0) raise(Errc::invalid_argument, "cannot renormalize a zero-mass vector");
    std::vector<double> out(probs_);
    for (double& p : out) p /= sum;
    return Distribution(scheme_, std::move(out));
}

Distribution Distribution::uniform(AttributeScheme scheme) {
    validate(scheme);
    std::vector<double> p(scheme.size(), 1.0 / static_cast<double>(scheme.size()));
    return Distribution(std::move(scheme), std::move(p));
}

} // namespace fairgen
