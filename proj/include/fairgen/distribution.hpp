#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairgen/errors.hpp"

namespace fairgen {

enum class SchemeKind {
    skin_tone_fitzpatrick, // the six phototypes I..VI
    skin_tone_bins3,       // Light / Medium / Dark
    skin_tone_monk,        // MST 1..10
    demographic_labels,    // free-form group labels (census/LLM)
    custom,
};

const char* scheme_kind_name(SchemeKind k);
SchemeKind scheme_kind_from_name(std::string_view name);

// Named, ordered category set. Order is significant: it breaks argmax and
// remainder ties deterministically.
struct AttributeScheme {
    std::string name;
    std::vector<std::string> categories;
    SchemeKind kind = SchemeKind::custom;

    std::size_t size() const { return categories.size(); }
    std::optional<std::size_t> index_of(std::string_view label) const;
    bool operator==(const AttributeScheme&) const = default;

    static AttributeScheme fitzpatrick6();
    static AttributeScheme bins3();
    static AttributeScheme monk10();
    static AttributeScheme demographic(std::string name, std::vector<std::string> labels);
};

// Throws Errc::invalid_argument on empty/duplicate categories.
void validate(const AttributeScheme& scheme);

inline constexpr double kUnitSumTolerance = 1e-9;

// Probabilities over an ordered attribute scheme. Immutable value type:
// validated at construction, safe to share across threads.
class Distribution {
public:
    Distribution(AttributeScheme scheme, std::vector<double> probs);

    const AttributeScheme& scheme() const { return scheme_; }
    std::span<const double> probs() const { return probs_; }
    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    double prob(std::string_view label) const;

    // Scales to exact unit sum. Only on explicit request: silent
    // renormalization would mask data errors upstream.
    Distribution renormalized() const;

    bool operator==(const Distribution&) const = default;

    static Distribution uniform(AttributeScheme scheme);

private:
    AttributeScheme scheme_;
    std::vector<double> probs_;
};

} // namespace fairgen
