#include "evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "error.hpp"

namespace osradv {

double auroc(const std::vector<std::pair<SetLabel, double>>& scores) {
    std::size_t n_familiar = 0, n_novel = 0;
    for (const auto& [label, s] : scores) {
        if (!std::isfinite(s)) fail_invalid("auroc requires finite scores");
        (label == SetLabel::familiar ? n_familiar : n_novel) += 1;
    }
    if (n_familiar == 0 || n_novel == 0)
        fail_invalid("auroc needs at least one familiar and one novel sample");

    std::vector<std::pair<double, SetLabel>> sorted;
    sorted.reserve(scores.size());
    for (const auto& [label, s] : scores) sorted.emplace_back(s, label);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    // Sweep tie blocks in ascending score order; count wins twice and ties
    // once so the tally stays integral.
    std::uint64_t numerator2 = 0;
    std::uint64_t novel_below = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        std::uint64_t fam_here = 0, nov_here = 0;
        while (j < sorted.size() && sorted[j].first == sorted[i].first) {
            (sorted[j].second == SetLabel::familiar ? fam_here : nov_here) += 1;
            ++j;
        }
        numerator2 += fam_here * (2 * novel_below + nov_here);
        novel_below += nov_here;
        i = j;
    }
    return static_cast<double>(numerator2) /
           (2.0 * static_cast<double>(n_familiar) * static_cast<double>(n_novel));
}

double quantile_type7(std::vector<double> xs, double q) {
    if (xs.empty()) fail_invalid("quantile of an empty list");
    if (!(q >= 0.0 && q <= 1.0)) fail_invalid("quantile level must be in [0, 1]");
    std::sort(xs.begin(), xs.end());
    const double h = q * static_cast<double>(xs.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = lo + 1 < xs.size() ? lo + 1 : lo;
    return xs[lo] + (h - std::floor(h)) * (xs[hi] - xs[lo]);
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) fail_invalid("pearson requires equal-length inputs");
    const std::size_t n = xs.size();
    if (n < 2) fail_invalid("pearson requires at least 2 points");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        fail_invalid("pearson undefined: zero variance input");
    const double r = sxy / std::sqrt(sxx * syy);
    return std::min(std::max(r, -1.0), 1.0);
}

std::vector<std::pair<double, double>> sliding_trend(
    std::vector<std::pair<double, double>> points, std::size_t window) {
    if (window < 1) fail_invalid("sliding window must be >= 1");
    if (points.empty()) return {};
    std::stable_sort(points.begin(), points.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    const std::size_t n = points.size();
    const std::size_t half_lo = (window - 1) / 2;
    const std::size_t half_hi = window / 2;
    std::vector<std::pair<double, double>> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half_lo ? i - half_lo : 0;
        const std::size_t hi = std::min(i + half_hi, n - 1);
        double mx = 0.0, my = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) {
            mx += points[k].first;
            my += points[k].second;
        }
        const double m = static_cast<double>(hi - lo + 1);
        out.emplace_back(mx / m, my / m);
    }
    return out;
}

}  // namespace osradv
