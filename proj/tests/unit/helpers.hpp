#pragma once

#include "pathwise/paths.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace pathwise::testing {

/// Deterministic "path" with components c_i(r) sampled on N + 1 nodes of [0, T].
inline SamplePath smooth_path(std::vector<std::function<double(double)>> comps, double horizon, std::size_t steps) {
    const std::size_t d = comps.size();
    std::vector<double> values((steps + 1) * d);
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = horizon * static_cast<double>(k) / static_cast<double>(steps);
        for (std::size_t i = 0; i < d; ++i) values[k * d + i] = comps[i](t) - comps[i](0.0);
    }
    return SamplePath::from_values(d, horizon, std::move(values));
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace pathwise::testing
