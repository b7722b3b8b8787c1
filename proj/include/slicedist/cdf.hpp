#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

namespace slicedist {

inline double standard_normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

// Right-continuous empirical CDF of a set of reals: F(t) = #{v_i <= t} / N.
class EmpiricalCdf {
public:
    explicit EmpiricalCdf(std::vector<double> values) : sorted_(std::move(values)) {
        if (sorted_.empty())
            throw std::invalid_argument("EmpiricalCdf: need at least one value");
        for (double v : sorted_)
            if (!std::isfinite(v))
                throw std::invalid_argument("EmpiricalCdf: values must be finite");
        std::sort(sorted_.begin(), sorted_.end());
    }

    double operator()(double t) const {
        const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), t);
        return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
    }

    double left_limit(double t) const {
        const auto it = std::lower_bound(sorted_.begin(), sorted_.end(), t);
        return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
    }

    std::size_t count() const { return sorted_.size(); }
    const std::vector<double>& sorted_values() const { return sorted_; }

private:
    std::vector<double> sorted_;
};

// CDF of a weighted mixture of one-dimensional Gaussians. Components with
// zero standard deviation are point masses, which makes the CDF a step
// function there.
class MixtureCdf1d {
public:
    MixtureCdf1d(std::vector<double> weights, std::vector<double> means,
                 std::vector<double> sds)
        : weights_(std::move(weights)), means_(std::move(means)), sds_(std::move(sds)) {
        if (weights_.empty() || weights_.size() != means_.size() ||
            weights_.size() != sds_.size())
            throw std::invalid_argument("MixtureCdf1d: component arrays must be nonempty and equal-sized");
        for (double s : sds_)
            if (!(s >= 0.0))
                throw std::invalid_argument("MixtureCdf1d: standard deviations must be >= 0");
    }

    double operator()(double t) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < weights_.size(); ++k) {
            if (sds_[k] > 0.0)
                acc += weights_[k] * standard_normal_cdf((t - means_[k]) / sds_[k]);
            else if (t >= means_[k])
                acc += weights_[k];
        }
        return acc;
    }

    double left_limit(double t) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < weights_.size(); ++k) {
            if (sds_[k] > 0.0)
                acc += weights_[k] * standard_normal_cdf((t - means_[k]) / sds_[k]);
            else if (t > means_[k])
                acc += weights_[k];
        }
        return acc;
    }

    // Locations of point-mass atoms (degenerate components).
    std::vector<double> atoms() const {
        std::vector<double> a;
        for (std::size_t k = 0; k < weights_.size(); ++k)
            if (sds_[k] == 0.0 && weights_[k] > 0.0) a.push_back(means_[k]);
        return a;
    }

    bool continuous() const { return atoms().empty(); }

    std::pair<double, double> support_hint() const {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < weights_.size(); ++k) {
            lo = std::min(lo, means_[k] - 10.0 * sds_[k]);
            hi = std::max(hi, means_[k] + 10.0 * sds_[k]);
        }
        return {lo, hi};
    }

    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& means() const { return means_; }
    const std::vector<double>& sds() const { return sds_; }

private:
    std::vector<double> weights_, means_, sds_;
};

using UnivariateCdf = std::variant<EmpiricalCdf, MixtureCdf1d>;

inline double cdf_eval(const UnivariateCdf& f, double t) {
    return std::visit([t](const auto& c) { return c(t); }, f);
}

inline double cdf_left_limit(const UnivariateCdf& f, double t) {
    return std::visit([t](const auto& c) { return c.left_limit(t); }, f);
}

// Jump locations: sample values for an empirical CDF, atoms for a mixture.
inline std::vector<double> cdf_jump_points(const UnivariateCdf& f) {
    if (const auto* e = std::get_if<EmpiricalCdf>(&f)) {
        std::vector<double> pts = e->sorted_values();
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        return pts;
    }
    auto a = std::get<MixtureCdf1d>(f).atoms();
    std::sort(a.begin(), a.end());
    return a;
}

inline bool cdf_has_continuous_part(const UnivariateCdf& f) {
    if (const auto* m = std::get_if<MixtureCdf1d>(&f)) {
        for (double s : m->sds())
            if (s > 0.0) return true;
    }
    return false;
}

inline std::pair<double, double> cdf_support_hint(const UnivariateCdf& f) {
    if (const auto* e = std::get_if<EmpiricalCdf>(&f))
        return {e->sorted_values().front(), e->sorted_values().back()};
    return std::get<MixtureCdf1d>(f).support_hint();
}

// sup_t |f(t) - g(t)|. Exact when at least one side is a step function
// against a step or monotone-continuous other side: the supremum is then
// attained at a jump point, approached from the left or the right. When
// both sides have continuous parts the scan falls back to a dense grid
// over the combined support.
inline double ks_distance(const UnivariateCdf& f, const UnivariateCdf& g) {
    std::vector<double> candidates = cdf_jump_points(f);
    {
        auto jg = cdf_jump_points(g);
        candidates.insert(candidates.end(), jg.begin(), jg.end());
    }
    if (cdf_has_continuous_part(f) && cdf_has_continuous_part(g)) {
        const auto [lo_f, hi_f] = cdf_support_hint(f);
        const auto [lo_g, hi_g] = cdf_support_hint(g);
        const double lo = std::min(lo_f, lo_g);
        const double hi = std::max(hi_f, hi_g);
        constexpr int kGrid = 4096;
        for (int i = 0; i <= kGrid; ++i)
            candidates.push_back(lo + (hi - lo) * i / kGrid);
    }
    double sup = 0.0;
    for (double t : candidates) {
        sup = std::max(sup, std::abs(cdf_eval(f, t) - cdf_eval(g, t)));
        sup = std::max(sup, std::abs(cdf_left_limit(f, t) - cdf_left_limit(g, t)));
    }
    return sup;
}

struct QuadratureNode {
    double x;
    double weight; // interval length (or generic quadrature weight)
};

// Midpoints between consecutive merged jump points, weighted by interval
// length. Exact for ∫ c|f-g| when f, g are step functions and c is
// piecewise constant between consecutive jump points.
inline std::vector<QuadratureNode> midpoint_quadrature(const UnivariateCdf& f,
                                                       const UnivariateCdf& g) {
    std::vector<double> pts = cdf_jump_points(f);
    {
        auto jg = cdf_jump_points(g);
        pts.insert(pts.end(), jg.begin(), jg.end());
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<QuadratureNode> quad;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        quad.push_back({0.5 * (pts[i] + pts[i + 1]), pts[i + 1] - pts[i]});
    if (quad.empty() && !pts.empty())
        quad.push_back({pts.front(), 0.0});
    return quad;
}

// Quadrature approximation of ∫ c(x)|f(x) - g(x)| dx.
inline double weighted_l1_distance(const UnivariateCdf& f, const UnivariateCdf& g,
                                   const std::function<double(double)>& density,
                                   std::span<const QuadratureNode> quadrature) {
    if (quadrature.empty())
        throw std::invalid_argument("weighted_l1_distance: quadrature must be nonempty");
    double acc = 0.0;
    for (const auto& node : quadrature) {
        if (!std::isfinite(node.x))
            throw std::invalid_argument("weighted_l1_distance: quadrature nodes must be finite");
        acc += node.weight * density(node.x) *
               std::abs(cdf_eval(f, node.x) - cdf_eval(g, node.x));
    }
    return acc;
}

// Slice discrepancy kinds: the KS sup-difference, or a weighted L1 integral
// evaluated on a fixed quadrature. A fixed quadrature keeps the weighted L1
// kind an exact pseudometric (triangle inequality holds per node).
struct KolmogorovSmirnov {};

struct WeightedL1 {
    std::function<double(double)> density;
    std::vector<QuadratureNode> quadrature;
};

using SliceDiscrepancy = std::variant<KolmogorovSmirnov, WeightedL1>;

inline double discrepancy(const SliceDiscrepancy& d, const UnivariateCdf& f,
                          const UnivariateCdf& g) {
    if (std::holds_alternative<KolmogorovSmirnov>(d)) return ks_distance(f, g);
    const auto& w = std::get<WeightedL1>(d);
    return weighted_l1_distance(f, g, w.density, w.quadrature);
}

} // namespace slicedist
