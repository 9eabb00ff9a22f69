#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "conenet/error.hpp"

namespace conenet {

/// The five columns of a results table.
struct Summary {
    double mean = 0.0;
    double median = 0.0;
    double std_dev = 0.0;  // population divisor N; 0 for a single value
    double best = 0.0;
    double worst = 0.0;

    friend bool operator==(const Summary&, const Summary&) = default;
};

/// Median of an even count is the midpoint of the two central values.
inline Summary summarize(std::span<const double> values) {
    if (values.empty()) throw ValidationError("cannot summarize an empty set of values");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    Summary s;
    double total = 0.0;
    for (double v : values) total += v;
    s.mean = total / static_cast<double>(n);
    s.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std_dev = std::sqrt(sq / static_cast<double>(n));
    s.best = sorted.back();
    s.worst = sorted.front();
    return s;
}

}  // namespace conenet
