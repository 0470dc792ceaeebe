#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "dataset.hpp"

namespace osradv {

// P(score_familiar > score_novel) + 0.5 * P(tie) over all familiar x novel
// pairs, familiar as the positive class. Computed from exact integer pair
// counts, so it matches a brute-force pair count bit-for-bit.
double auroc(const std::vector<std::pair<SetLabel, double>>& scores);

// Type-7 linear-interpolation quantile on a copy of xs, q in [0, 1].
double quantile_type7(std::vector<double> xs, double q);

// Sample Pearson correlation; errors when either side has zero variance.
double pearson(std::span<const double> xs, std::span<const double> ys);

// Sorts points by the first coordinate and averages both coordinates over a
// centered window of the given size, truncated at the boundaries.
std::vector<std::pair<double, double>> sliding_trend(
    std::vector<std::pair<double, double>> points, std::size_t window);

}  // namespace osradv
