#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace slicedist {

// A finite set of points in R^n representing an empirical distribution.
// Stored row-major: one point per row.
class SampleSet {
public:
    SampleSet(Eigen::MatrixXd points) : points_(std::move(points)) {
        if (points_.rows() < 1 || points_.cols() < 1)
            throw std::invalid_argument("SampleSet: need at least one point of dimension >= 1");
        if (!points_.allFinite())
            throw std::invalid_argument("SampleSet: all coordinates must be finite");
    }

    Eigen::Index size() const { return points_.rows(); }
    Eigen::Index dimension() const { return points_.cols(); }

    const Eigen::MatrixXd& points() const { return points_; }
    Eigen::RowVectorXd point(Eigen::Index i) const { return points_.row(i); }

private:
    Eigen::MatrixXd points_;
};

} // namespace slicedist
