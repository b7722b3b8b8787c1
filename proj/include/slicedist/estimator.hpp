#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "slicedist/cdf.hpp"
#include "slicedist/direction.hpp"
#include "slicedist/parallel.hpp"
#include "slicedist/rng.hpp"
#include "slicedist/sample_set.hpp"

namespace slicedist {

using TargetCdfFactory = std::function<UnivariateCdf(const Direction&)>;

namespace detail {

// Directions are drawn sequentially up front and per-direction terms are
// reduced in block order, so the result is identical for any thread count.
inline double average_slice_terms(std::span<const SampleSet> blocks,
                                  std::span<const Direction> directions,
                                  const TargetCdfFactory& target,
                                  const SliceDiscrepancy& d, int threads) {
    std::vector<double> terms(directions.size(), 0.0);
    parallel_for(directions.size(), threads, [&](std::size_t i) {
        const SampleSet& block = blocks[blocks.size() == 1 ? 0 : i];
        EmpiricalCdf f(project(block, directions[i]));
        terms[i] = discrepancy(d, UnivariateCdf(std::move(f)), target(directions[i]));
    });
    double acc = 0.0;
    for (double t : terms) acc += t;
    return acc / static_cast<double>(terms.size());
}

} // namespace detail

// Monte Carlo estimator of the projection-averaged distance: one fresh
// uniform direction per independent sample block, terms averaged over blocks.
inline double estimate_delta(std::span<const SampleSet> x_blocks,
                             const TargetCdfFactory& target,
                             const SliceDiscrepancy& d, RngStream& rng,
                             int threads = 1) {
    if (x_blocks.empty())
        throw std::invalid_argument("estimate_delta: need at least one sample block");
    const Eigen::Index n = x_blocks[0].dimension();
    for (const auto& b : x_blocks)
        if (b.dimension() != n)
            throw std::invalid_argument("estimate_delta: blocks must share dimension");
    std::vector<Direction> dirs;
    dirs.reserve(x_blocks.size());
    for (std::size_t i = 0; i < x_blocks.size(); ++i)
        dirs.push_back(sample_direction(rng, n));
    return detail::average_slice_terms(x_blocks, dirs, target, d, threads);
}

// Variant reusing one sample set across all H directions (the regime the
// practical distance algorithm uses).
inline double estimate_delta_shared(const SampleSet& x, int h,
                                    const TargetCdfFactory& target,
                                    const SliceDiscrepancy& d, RngStream& rng,
                                    int threads = 1) {
    if (h < 1) throw std::invalid_argument("estimate_delta_shared: h must be >= 1");
    std::vector<Direction> dirs;
    dirs.reserve(static_cast<std::size_t>(h));
    for (int i = 0; i < h; ++i) dirs.push_back(sample_direction(rng, x.dimension()));
    return detail::average_slice_terms(std::span<const SampleSet>(&x, 1), dirs, target,
                                       d, threads);
}

// Asymptotic signal-to-noise ratio sqrt(H a / (1 - a)) when the true
// distance is a.
inline double asymptotic_snr(double alpha, int h) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("asymptotic_snr: alpha must lie in (0, 1)");
    if (h < 1) throw std::domain_error("asymptotic_snr: h must be >= 1");
    return std::sqrt(static_cast<double>(h) * alpha / (1.0 - alpha));
}

} // namespace slicedist
