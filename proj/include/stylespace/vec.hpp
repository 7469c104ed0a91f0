#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "stylespace/errors.hpp"

namespace stylespace {

using Vec = std::vector<double>;
using FeatureMap = std::unordered_map<std::string, Vec>;

inline double squared_distance(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) {
        throw DimensionError("squared_distance: vector lengths differ (" +
                             std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double distance(const Vec& a, const Vec& b) {
    return std::sqrt(squared_distance(a, b));
}

inline bool all_finite(const Vec& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace stylespace
