#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

#include "slicedist/direction.hpp"
#include "slicedist/gaussian_mixture.hpp"
#include "slicedist/rng.hpp"
#include "slicedist/sample_set.hpp"

namespace slicedist {

enum class ThresholdRule {
    SampleQuantiles,      // b_j = empirical quantiles of the projected samples
    TargetPercentileGrid, // equally spaced between the 0.5th and 99.5th target percentiles
    Explicit,
};

struct Slice {
    Direction direction;
    std::vector<double> thresholds; // nondecreasing
};

// The frozen set of (direction, thresholds) pairs defining one deterministic
// distance evaluation.
struct SlicePlan {
    std::vector<Slice> slices;
    ThresholdRule rule = ThresholdRule::Explicit;

    std::size_t count() const { return slices.size(); }
    std::size_t values_per_slice() const {
        return slices.empty() ? 0 : slices[0].thresholds.size();
    }
};

namespace detail {

// Lower empirical quantile (inverse-CDF convention) of sorted values.
inline double empirical_quantile_sorted(const std::vector<double>& sorted, double p) {
    const auto n = static_cast<double>(sorted.size());
    auto idx = static_cast<std::ptrdiff_t>(std::ceil(p * n)) - 1;
    idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(sorted.size()) - 1);
    return sorted[static_cast<std::size_t>(idx)];
}

} // namespace detail

using PlanContext = std::variant<const SampleSet*, const GaussianMixture*>;

inline SlicePlan build_slice_plan(RngStream& rng, int h, int n_values,
                                  ThresholdRule rule, const PlanContext& context,
                                  Eigen::Index n) {
    if (h < 1 || n_values < 1)
        throw std::invalid_argument("build_slice_plan: h and n_values must be >= 1");
    SlicePlan plan;
    plan.rule = rule;
    plan.slices.reserve(static_cast<std::size_t>(h));
    for (int k = 0; k < h; ++k) {
        Direction q = sample_direction(rng, n);
        std::vector<double> thresholds(static_cast<std::size_t>(n_values));
        switch (rule) {
        case ThresholdRule::SampleQuantiles: {
            const auto* samples = std::get_if<const SampleSet*>(&context);
            if (!samples || !*samples)
                throw std::invalid_argument("build_slice_plan: SampleQuantiles needs a sample set");
            std::vector<double> proj = project(**samples, q);
            std::sort(proj.begin(), proj.end());
            for (int j = 0; j < n_values; ++j)
                thresholds[static_cast<std::size_t>(j)] = detail::empirical_quantile_sorted(
                    proj, (j + 0.5) / static_cast<double>(n_values));
            break;
        }
        case ThresholdRule::TargetPercentileGrid: {
            const auto* gmm = std::get_if<const GaussianMixture*>(&context);
            if (!gmm || !*gmm)
                throw std::invalid_argument("build_slice_plan: TargetPercentileGrid needs a mixture");
            const double lo = projected_quantile(**gmm, q, 0.005);
            const double hi = projected_quantile(**gmm, q, 0.995);
            if (n_values == 1) {
                thresholds[0] = 0.5 * (lo + hi);
            } else {
                for (int j = 0; j < n_values; ++j)
                    thresholds[static_cast<std::size_t>(j)] =
                        lo + (hi - lo) * j / static_cast<double>(n_values - 1);
            }
            break;
        }
        case ThresholdRule::Explicit:
            throw std::invalid_argument("build_slice_plan: Explicit plans are constructed directly");
        }
        plan.slices.push_back({std::move(q), std::move(thresholds)});
    }
    return plan;
}

} // namespace slicedist
