#pragma once

#include <optional>
#include <string>

#include "fairgen/distribution.hpp"

namespace fairgen {

// A declared representation target, before it is resolved against a concrete
// scheme / reference distribution.
struct TargetSetting {
    enum class Variant { uniform, intermediate, extreme, explicit_dist, fallback };

    Variant variant = Variant::uniform;
    std::optional<double> alpha;        // intermediate: (0,1); extreme: (0.5,1]
    std::optional<std::string> focal;   // extreme only
    std::optional<Distribution> dist;   // explicit target or fallback override

    static TargetSetting Uniform();
    static TargetSetting Intermediate(double alpha);
    static TargetSetting Extreme(std::string focal, double alpha);
    static TargetSetting Explicit(Distribution dist);
    static TargetSetting Fallback(std::optional<Distribution> override_dist = std::nullopt);

    const char* variant_name() const;
};

TargetSetting::Variant target_variant_from_name(std::string_view name);

// q_uni: equal weight on every category.
Distribution uniform_target(const AttributeScheme& scheme);

// q_int = alpha*r + (1-alpha)*uniform. Accepts the closed interval [0,1]
// (endpoints collapse to uniform / r); errors outside it.
Distribution intermediate_target(const Distribution& r, double alpha);

// q_ext: focal gets alpha, everything else gets (1-alpha)*s(g)/(1-s(focal)).
// alpha in (0.5, 1]; alpha = 1 is the one-hot degenerate target.
Distribution extreme_target(const Distribution& s, std::string_view focal, double alpha);

// Returns the override when present, else uniform over Fitzpatrick I-VI.
Distribution fallback_target(const std::optional<Distribution>& override_dist = std::nullopt);

// Label of maximal probability; ties broken by lowest category index.
std::string majority_group(const Distribution& r);

// Pairwise sums (I+II, III+IV, V+VI) onto the 3-bin scheme.
Distribution aggregate_to_bins(const Distribution& fitzpatrick6);

// Resolves a setting against a scheme and (where the variant needs one) a
// reference distribution r. `r` doubles as the extreme reference s.
Distribution resolve_target(const TargetSetting& setting, const AttributeScheme& scheme,
                            const std::optional<Distribution>& r = std::nullopt);

} // namespace fairgen
