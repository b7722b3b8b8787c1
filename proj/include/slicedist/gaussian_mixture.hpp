#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "slicedist/cdf.hpp"
#include "slicedist/direction.hpp"
#include "slicedist/rng.hpp"
#include "slicedist/sample_set.hpp"

namespace slicedist {

struct GaussianComponent {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

// Weighted Gaussian mixture used as an analytic target distribution.
// Projections onto any direction have closed-form CDFs, which is what the
// half-space probabilities in the distance algorithm rely on.
class GaussianMixture {
public:
    GaussianMixture(std::vector<GaussianComponent> components, std::vector<double> weights)
        : components_(std::move(components)), weights_(std::move(weights)) {
        if (components_.empty() || components_.size() != weights_.size())
            throw std::invalid_argument("GaussianMixture: need matching nonempty components and weights");
        const Eigen::Index n = components_[0].mean.size();
        double wsum = 0.0;
        for (double w : weights_) {
            if (w < 0.0) throw std::invalid_argument("GaussianMixture: weights must be nonnegative");
            wsum += w;
        }
        if (std::abs(wsum - 1.0) > 1e-10)
            throw std::invalid_argument("GaussianMixture: weights must sum to 1");
        for (const auto& c : components_) {
            if (c.mean.size() != n || c.covariance.rows() != n || c.covariance.cols() != n)
                throw std::invalid_argument("GaussianMixture: components must share dimension");
            if ((c.covariance - c.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-10)
                throw std::invalid_argument("GaussianMixture: covariance must be symmetric");
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.covariance);
            if (es.eigenvalues().minCoeff() < -1e-10)
                throw std::invalid_argument("GaussianMixture: covariance must be positive semidefinite");
        }
    }

    static GaussianMixture single(Eigen::VectorXd mean, Eigen::MatrixXd covariance) {
        std::vector<GaussianComponent> c;
        c.push_back({std::move(mean), std::move(covariance)});
        return GaussianMixture(std::move(c), {1.0});
    }

    Eigen::Index dimension() const { return components_[0].mean.size(); }
    const std::vector<GaussianComponent>& components() const { return components_; }
    const std::vector<double>& weights() const { return weights_; }

private:
    std::vector<GaussianComponent> components_;
    std::vector<double> weights_;
};

// P(q'Y + b >= 0) for Y ~ gmm. Per component this is P(r >= 0) with
// r ~ N(q'ybar + b, q'Sigma q); degenerate variance collapses to the
// indicator of the mean's sign. Note the sign convention: P(q'Y >= b0) is
// obtained with b = -b0.
inline double halfspace_probability(const GaussianMixture& gmm, const Direction& q,
                                    double b) {
    if (gmm.dimension() != q.dimension())
        throw std::invalid_argument("halfspace_probability: dimension mismatch");
    double acc = 0.0;
    for (std::size_t k = 0; k < gmm.components().size(); ++k) {
        const auto& c = gmm.components()[k];
        const double m = q.coords().dot(c.mean) + b;
        const double var = q.coords().dot(c.covariance * q.coords());
        if (var < -1e-10)
            throw std::invalid_argument("halfspace_probability: negative projected variance");
        double p;
        if (var <= 0.0)
            p = m >= 0.0 ? 1.0 : 0.0;
        else
            p = standard_normal_cdf(m / std::sqrt(var));
        acc += gmm.weights()[k] * p;
    }
    return acc;
}

// CDF of q'Y as a one-dimensional Gaussian mixture.
inline MixtureCdf1d projected_cdf(const GaussianMixture& gmm, const Direction& q) {
    if (gmm.dimension() != q.dimension())
        throw std::invalid_argument("projected_cdf: dimension mismatch");
    std::vector<double> means, sds;
    for (const auto& c : gmm.components()) {
        means.push_back(q.coords().dot(c.mean));
        const double var = q.coords().dot(c.covariance * q.coords());
        if (var < -1e-10)
            throw std::invalid_argument("projected_cdf: negative projected variance");
        sds.push_back(var > 0.0 ? std::sqrt(var) : 0.0);
    }
    return MixtureCdf1d(gmm.weights(), std::move(means), std::move(sds));
}

// Quantile of the projected mixture by bracketing bisection on the analytic
// CDF. Requires nonzero projected variance for at least one component.
inline double projected_quantile(const GaussianMixture& gmm, const Direction& q, double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("projected_quantile: p must lie in (0, 1)");
    const MixtureCdf1d cdf = projected_cdf(gmm, q);
    double sd_max = 0.0, m_lo = cdf.means()[0], m_hi = cdf.means()[0];
    for (std::size_t k = 0; k < cdf.means().size(); ++k) {
        sd_max = std::max(sd_max, cdf.sds()[k]);
        m_lo = std::min(m_lo, cdf.means()[k]);
        m_hi = std::max(m_hi, cdf.means()[k]);
    }
    if (sd_max == 0.0)
        throw std::domain_error("projected_quantile: projected distribution is degenerate");
    double lo = m_lo - 10.0 * sd_max, hi = m_hi + 10.0 * sd_max;
    while (cdf(lo) > p) lo -= 10.0 * sd_max;
    while (cdf(hi) < p) hi += 10.0 * sd_max;
    for (int iter = 0; iter < 200 && hi - lo > 1e-12 * (1.0 + std::abs(lo)); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

namespace detail {

// Symmetric PSD square root factor; Cholesky with an eigendecomposition
// fallback for semidefinite inputs.
inline Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success)
        return Eigen::MatrixXd(llt.matrixL());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("psd_factor: eigendecomposition failed");
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] < -1e-10)
            throw std::runtime_error("psd_factor: covariance is not positive semidefinite");
        ev[i] = ev[i] > 0.0 ? std::sqrt(ev[i]) : 0.0;
    }
    return es.eigenvectors() * ev.asDiagonal();
}

} // namespace detail

// Draws `count` samples: categorical component choice, then a Gaussian draw
// through the component's PSD factor. Deterministic given the stream state.
inline SampleSet sample(const GaussianMixture& gmm, int count, RngStream& rng) {
    if (count < 1) throw std::invalid_argument("sample: count must be >= 1");
    const Eigen::Index n = gmm.dimension();
    std::vector<Eigen::MatrixXd> factors;
    factors.reserve(gmm.components().size());
    for (const auto& c : gmm.components()) factors.push_back(detail::psd_factor(c.covariance));

    Eigen::MatrixXd points(count, n);
    Eigen::VectorXd z(n);
    for (int i = 0; i < count; ++i) {
        const double u = rng.uniform();
        std::size_t k = 0;
        double acc = 0.0;
        for (; k + 1 < gmm.weights().size(); ++k) {
            acc += gmm.weights()[k];
            if (u < acc) break;
        }
        for (Eigen::Index j = 0; j < n; ++j) z[j] = rng.normal();
        points.row(i) = (gmm.components()[k].mean + factors[k] * z).transpose();
    }
    return SampleSet(std::move(points));
}

} // namespace slicedist
