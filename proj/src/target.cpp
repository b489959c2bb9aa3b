#include "fairgen/target.hpp"

#include <cmath>

namespace fairgen {

TargetSetting TargetSetting::Uniform() { return {Variant::uniform, std::nullopt, std::nullopt, std::nullopt}; }

TargetSetting TargetSetting::Intermediate(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        raise(Errc::invalid_argument, "intermediate setting needs alpha in (0,1), got " + std::to_string(alpha));
    return {Variant::intermediate, alpha, std::nullopt, std::nullopt};
}

TargetSetting TargetSetting::Extreme(std::string focal, double alpha) {
    if (!(alpha > 0.5 && alpha <= 1.0))
        raise(Errc::invalid_argument, "extreme setting needs alpha in (0.5,1], got " + std::to_string(alpha));
    return {Variant::extreme, alpha, std::move(focal), std::nullopt};
}

TargetSetting TargetSetting::Explicit(Distribution dist) {
    return {Variant::explicit_dist, std::nullopt, std::nullopt, std::move(dist)};
}

TargetSetting TargetSetting::Fallback(std::optional<Distribution> override_dist) {
    return {Variant::fallback, std::nullopt, std::nullopt, std::move(override_dist)};
}

const char* TargetSetting::variant_name() const {
    switch (variant) {
    case Variant::uniform: return "uniform";
    case Variant::intermediate: return "intermediate";
    case Variant::extreme: return "extreme";
    case Variant::explicit_dist: return "explicit";
    case Variant::fallback: return "fallback";
    }
    return "uniform";
}

TargetSetting::Variant target_variant_from_name(std::string_view name) {
    using V = TargetSetting::Variant;
    if (name == "uniform") return V::uniform;
    if (name == "intermediate") return V::intermediate;
    if (name == "extreme") return V::extreme;
    if (name == "explicit") return V::explicit_dist;
    if (name == "fallback") return V::fallback;
    raise(Errc::invalid_argument, "unknown target variant: " + std::string(name));
}

Distribution uniform_target(const AttributeScheme& scheme) { return Distribution::uniform(scheme); }

Distribution intermediate_target(const Distribution& r, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        raise(Errc::invalid_argument, "intermediate alpha out of range [0,1]: " + std::to_string(alpha));
    const double u = 1.0 / static_cast<double>(r.size());
    std::vector<double> q(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) q[i] = alpha * r[i] + (1.0 - alpha) * u;
    return Distribution(r.scheme(), std::move(q));
}

Distribution extreme_target(const Distribution& s, std::string_view focal, double alpha) {
    if (!(alpha > 0.5 && alpha <= 1.0))
        raise(Errc::invalid_argument, "extreme alpha out of range (0.5,1]: " + std::to_string(alpha));
    auto fi = s.scheme().index_of(focal);
    if (!fi)
        raise(Errc::invalid_argument, "focal group '" + std::string(focal) + "' not in scheme '" + s.scheme().name + "'");

    std::vector<double> q(s.size(), 0.0);
    if (alpha == 1.0) {
        q[*fi] = 1.0;
        return Distribution(s.scheme(), std::move(q));
    }
    const double rest = 1.0 - s[*fi];
    if (rest <= 0.0)
        raise(Errc::degenerate_reference,
              "reference puts all mass on '" + std::string(focal) + "'; only alpha=1 is defined");
    for (std::size_t i = 0; i < s.size(); ++i)
        q[i] = (i == *fi) ? alpha : (1.0 - alpha) * s[i] / rest;

    // Guard against accumulated rounding pushing the sum outside tolerance.
    double sum = 0.0;
    for (double p : q) sum += p;
    if (std::abs(sum - 1.0) > kUnitSumTolerance && std::abs(sum - 1.0) < 1e-12 * s.size())
        for (double& p : q) p /= sum;
    return Distribution(s.scheme(), std::move(q));
}

Distribution fallback_target(const std::optional<Distribution>& override_dist) {
    if (override_dist) return *override_dist; // ctor already validated it
    return Distribution::uniform(AttributeScheme::fitzpatrick6());
}

std::string majority_group(const Distribution& r) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < r.size(); ++i)
        if (r[i] > r[best]) best = i;
    return r.scheme().categories[best];
}

Distribution aggregate_to_bins(const Distribution& d) {
    const auto& s = d.scheme();
    if (s.kind != SchemeKind::skin_tone_fitzpatrick || s.size() != 6)
        raise(Errc::scheme_mismatch, "aggregate_to_bins needs the 6-type Fitzpatrick scheme, got '" + s.name + "'");
    std::vector<double> bins = {d[0] + d[1], d[2] + d[3], d[4] + d[5]};
    return Distribution(AttributeScheme::bins3(), std::move(bins));
}

Distribution resolve_target(const TargetSetting& setting, const AttributeScheme& scheme,
                            const std::optional<Distribution>& r) {
    using V = TargetSetting::Variant;
    switch (setting.variant) {
    case V::uniform:
        return uniform_target(scheme);
    case V::intermediate:
        if (!r) raise(Errc::invalid_argument, "intermediate target needs a reference distribution r");
        return intermediate_target(*r, setting.alpha.value());
    case V::extreme:
        if (!r) raise(Errc::invalid_argument, "extreme target needs a reference distribution s");
        return extreme_target(*r, setting.focal.value(), setting.alpha.value());
    case V::explicit_dist:
        if (!setting.dist) raise(Errc::invalid_argument, "explicit target carries no distribution");
        if (!(setting.dist->scheme() == scheme))
            raise(Errc::scheme_mismatch, "explicit target declared over '" + setting.dist->scheme().name +
                                             "', expected '" + scheme.name + "'");
        return *setting.dist;
    case V::fallback:
        return fallback_target(setting.dist);
    }
    raise(Errc::invalid_argument, "unresolvable target setting");
}

} // namespace fairgen
