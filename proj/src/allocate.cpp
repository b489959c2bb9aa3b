#include "fairgen/allocate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fairgen {

AllocationPlan allocate(const Distribution& q, std::int64_t total) {
    if (total < 0) raise(Errc::invalid_argument, "budget must be non-negative, got " + std::to_string(total));

    const std::size_t m = q.size();
    std::vector<std::int64_t> counts(m, 0);
    std::vector<double> frac(m, 0.0);
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double quota = q[i] * static_cast<double>(total);
        counts[i] = static_cast<std::int64_t>(std::floor(quota));
        frac[i] = quota - static_cast<double>(counts[i]);
        assigned += counts[i];
    }

    std::int64_t remainder = total - assigned;
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t k = 0; k < order.size() && remainder > 0; ++k) {
        const std::size_t i = order[k];
        if (q[i] <= 0.0) continue; // one-hot and zero-mass groups stay at zero
        ++counts[i];
        --remainder;
    }
    // remainder > 0 can only survive if every group has zero mass, which the
    // Distribution invariant rules out.

    return AllocationPlan{q.scheme(), std::move(counts), total};
}

} // namespace fairgen
