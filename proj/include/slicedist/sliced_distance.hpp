#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "slicedist/gaussian_mixture.hpp"
#include "slicedist/parallel.hpp"
#include "slicedist/sample_set.hpp"
#include "slicedist/slice_plan.hpp"

namespace slicedist {

struct SmoothingConfig {
    double v = 100.0; // sigmoid sharpness
    bool enabled = true;
};

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

namespace detail {

inline void check_plan(const SlicePlan& plan, Eigen::Index n) {
    if (plan.slices.empty())
        throw std::invalid_argument("sliced distance: plan must have at least one slice");
    for (const auto& s : plan.slices) {
        if (s.direction.dimension() != n)
            throw std::invalid_argument("sliced distance: plan dimension does not match samples");
        if (s.thresholds.empty())
            throw std::invalid_argument("sliced distance: slice must have at least one threshold");
    }
}

// Fraction of sorted projections >= b.
inline double frac_at_least(const std::vector<double>& sorted, double b) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), b);
    return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}

inline double reduce_mean(const std::vector<double>& terms) {
    double acc = 0.0;
    for (double t : terms) acc += t;
    return acc / static_cast<double>(terms.size());
}

} // namespace detail

// D_{H,n_values}(X, mu_Y): averages |p_samples - p_target| over all
// (direction, threshold) pairs, where p_samples is the fraction of samples
// in the half-space and p_target the analytic half-space probability.
inline double hard_distance(const SampleSet& samples, const GaussianMixture& target,
                            const SlicePlan& plan, int threads = 1) {
    detail::check_plan(plan, samples.dimension());
    if (target.dimension() != samples.dimension())
        throw std::invalid_argument("hard_distance: target dimension mismatch");
    std::vector<double> terms(plan.count(), 0.0);
    parallel_for(plan.count(), threads, [&](std::size_t k) {
        const Slice& s = plan.slices[k];
        std::vector<double> proj = project(samples, s.direction);
        std::sort(proj.begin(), proj.end());
        double acc = 0.0;
        for (double b : s.thresholds) {
            const double p_s = detail::frac_at_least(proj, b);
            const double p_t = halfspace_probability(target, s.direction, -b);
            acc += std::abs(p_s - p_t);
        }
        terms[k] = acc / static_cast<double>(s.thresholds.size());
    });
    return detail::reduce_mean(terms);
}

// Two-sample variant: the target half-space probability is the empirical
// fraction over the second sample set.
inline double hard_distance_two_sample(const SampleSet& a, const SampleSet& b,
                                       const SlicePlan& plan, int threads = 1) {
    detail::check_plan(plan, a.dimension());
    if (a.dimension() != b.dimension())
        throw std::invalid_argument("hard_distance_two_sample: dimension mismatch");
    std::vector<double> terms(plan.count(), 0.0);
    parallel_for(plan.count(), threads, [&](std::size_t k) {
        const Slice& s = plan.slices[k];
        std::vector<double> pa = project(a, s.direction);
        std::vector<double> pb = project(b, s.direction);
        std::sort(pa.begin(), pa.end());
        std::sort(pb.begin(), pb.end());
        double acc = 0.0;
        for (double t : s.thresholds)
            acc += std::abs(detail::frac_at_least(pa, t) - detail::frac_at_least(pb, t));
        terms[k] = acc / static_cast<double>(s.thresholds.size());
    });
    return detail::reduce_mean(terms);
}

namespace detail {

// Per-slice forward pass of the sigmoid-relaxed distance. Fills, per
// threshold, the signed coefficient sign(p_samples - p_target) used by the
// backward pass.
inline double smooth_slice_term(const SampleSet& samples, const GaussianMixture& target,
                                const Slice& s, double v,
                                std::vector<double>* signs_out) {
    std::vector<double> proj = project(samples, s.direction);
    const double inv_n = 1.0 / static_cast<double>(proj.size());
    double acc = 0.0;
    if (signs_out) signs_out->assign(s.thresholds.size(), 0.0);
    for (std::size_t j = 0; j < s.thresholds.size(); ++j) {
        const double b = s.thresholds[j];
        double p_s = 0.0;
        for (double x : proj) p_s += sigmoid(v * (x - b));
        p_s *= inv_n;
        const double p_t = halfspace_probability(target, s.direction, -b);
        const double diff = p_s - p_t;
        acc += std::abs(diff);
        if (signs_out)
            (*signs_out)[j] = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    }
    return acc / static_cast<double>(s.thresholds.size());
}

} // namespace detail

// Sigmoid relaxation of hard_distance: the sample-side indicator
// 1(q'x >= b) becomes sigmoid(v (q'x - b)). Converges to hard_distance as
// v grows for samples off the thresholds.
inline double smooth_distance(const SampleSet& samples, const GaussianMixture& target,
                              const SlicePlan& plan, const SmoothingConfig& smoothing,
                              int threads = 1) {
    detail::check_plan(plan, samples.dimension());
    if (target.dimension() != samples.dimension())
        throw std::invalid_argument("smooth_distance: target dimension mismatch");
    if (!(smoothing.v > 0.0))
        throw std::invalid_argument("smooth_distance: sharpness must be positive");
    std::vector<double> terms(plan.count(), 0.0);
    parallel_for(plan.count(), threads, [&](std::size_t k) {
        terms[k] = detail::smooth_slice_term(samples, target, plan.slices[k],
                                             smoothing.v, nullptr);
    });
    return detail::reduce_mean(terms);
}

struct SmoothDistanceResult {
    double value = 0.0;
    Eigen::MatrixXd gradient; // N x n, d(value)/d(x_i)
};

// Value plus analytic gradient with respect to the samples. Forward pass is
// slice-parallel with fixed-order reduction; backward pass is
// sample-parallel, so both are thread-count invariant. sign(0) resolves to
// 0, a subgradient choice at exact ties.
inline SmoothDistanceResult smooth_distance_gradient(const SampleSet& samples,
                                                     const GaussianMixture& target,
                                                     const SlicePlan& plan,
                                                     const SmoothingConfig& smoothing,
                                                     int threads = 1) {
    detail::check_plan(plan, samples.dimension());
    if (target.dimension() != samples.dimension())
        throw std::invalid_argument("smooth_distance_gradient: target dimension mismatch");
    if (!(smoothing.v > 0.0))
        throw std::invalid_argument("smooth_distance_gradient: sharpness must be positive");

    const std::size_t h = plan.count();
    const double v = smoothing.v;
    std::vector<double> terms(h, 0.0);
    std::vector<std::vector<double>> signs(h);
    parallel_for(h, threads, [&](std::size_t k) {
        terms[k] = detail::smooth_slice_term(samples, target, plan.slices[k], v, &signs[k]);
    });

    SmoothDistanceResult result;
    result.value = detail::reduce_mean(terms);
    const auto n_rows = static_cast<std::size_t>(samples.size());
    result.gradient = Eigen::MatrixXd::Zero(samples.size(), samples.dimension());
    const double inv_n = 1.0 / static_cast<double>(samples.size());
    parallel_for(n_rows, threads, [&](std::size_t i) {
        const Eigen::VectorXd x = samples.points().row(static_cast<Eigen::Index>(i));
        Eigen::VectorXd row = Eigen::VectorXd::Zero(samples.dimension());
        for (std::size_t k = 0; k < h; ++k) {
            const Slice& s = plan.slices[k];
            const double coef =
                1.0 / (static_cast<double>(h) * static_cast<double>(s.thresholds.size()));
            const double p = s.direction.coords().dot(x);
            double c = 0.0;
            for (std::size_t j = 0; j < s.thresholds.size(); ++j) {
                const double sg = sigmoid(v * (p - s.thresholds[j]));
                c += coef * signs[k][j] * inv_n * v * sg * (1.0 - sg);
            }
            row += c * s.direction.coords();
        }
        result.gradient.row(static_cast<Eigen::Index>(i)) = row.transpose();
    });
    return result;
}

} // namespace slicedist
