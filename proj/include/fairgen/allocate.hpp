#pragma once

#include <cstdint>
#include <vector>

#include "fairgen/distribution.hpp"

namespace fairgen {

// Exact integer split of a generation budget across categories.
struct AllocationPlan {
    AttributeScheme scheme;
    std::vector<std::int64_t> counts;
    std::int64_t total = 0;
};

// Largest-remainder (Hamilton) apportionment: floor(q_i*N) per group, then
// the remainder one unit at a time by descending fractional part, ties by
// lowest index. Zero-probability groups never receive remainder units.
AllocationPlan allocate(const Distribution& q, std::int64_t total);

} // namespace fairgen
