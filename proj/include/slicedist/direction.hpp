#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "slicedist/rng.hpp"
#include "slicedist/sample_set.hpp"

namespace slicedist {

// A unit-norm projection direction on the sphere.
class Direction {
public:
    explicit Direction(Eigen::VectorXd coords) : coords_(std::move(coords)) {
        if (coords_.size() < 1)
            throw std::invalid_argument("Direction: dimension must be >= 1");
        const double norm = coords_.norm();
        if (std::abs(norm - 1.0) > 1e-12)
            throw std::invalid_argument("Direction: vector must have unit norm");
    }

    // Normalizes an arbitrary nonzero vector onto the sphere.
    static Direction normalized(Eigen::VectorXd v) {
        const double norm = v.norm();
        if (!(norm > 0.0) || !std::isfinite(norm))
            throw std::invalid_argument("Direction: cannot normalize zero or non-finite vector");
        v /= norm;
        // Renormalize once more so the unit-norm invariant holds to 1e-12.
        v /= v.norm();
        return Direction(std::move(v));
    }

    Eigen::Index dimension() const { return coords_.size(); }
    const Eigen::VectorXd& coords() const { return coords_; }

    double dot(const Eigen::VectorXd& x) const { return coords_.dot(x); }

private:
    Eigen::VectorXd coords_;
};

// Uniform draw on the unit sphere: normalized i.i.d. standard Gaussian vector.
inline Direction sample_direction(RngStream& rng, Eigen::Index n) {
    if (n < 1) throw std::invalid_argument("sample_direction: dimension must be >= 1");
    Eigen::VectorXd v(n);
    double norm_sq = 0.0;
    do {
        for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
        norm_sq = v.squaredNorm();
    } while (!(norm_sq > 0.0));
    return Direction::normalized(std::move(v));
}

// Projects every sample onto the direction: output[i] = q . x_i.
inline std::vector<double> project(const SampleSet& samples, const Direction& q) {
    if (samples.dimension() != q.dimension())
        throw std::invalid_argument("project: sample dimension does not match direction");
    const Eigen::VectorXd p = samples.points() * q.coords();
    return std::vector<double>(p.data(), p.data() + p.size());
}

} // namespace slicedist
