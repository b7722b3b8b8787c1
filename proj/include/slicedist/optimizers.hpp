#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace slicedist {

// Plain gradient descent: params - rho * grads.
inline Eigen::VectorXd gd_step(const Eigen::VectorXd& params, const Eigen::VectorXd& grads,
                               double rho) {
    if (params.size() != grads.size())
        throw std::invalid_argument("gd_step: shape mismatch");
    if (!(rho > 0.0)) throw std::invalid_argument("gd_step: step size must be positive");
    return params - rho * grads;
}

// AdamW with decoupled weight decay. State owns the moment accumulators and
// the step counter; parameters are plain vectors.
class AdamW {
public:
    struct Params {
        double rho = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double epsilon = 1e-8;
        double weight_decay = 0.0;
    };

    AdamW(Eigen::Index parameter_count, Params params) : params_(params) {
        if (!(params.rho > 0.0)) throw std::invalid_argument("AdamW: step size must be positive");
        if (params.beta1 < 0.0 || params.beta1 >= 1.0 || params.beta2 < 0.0 || params.beta2 >= 1.0)
            throw std::invalid_argument("AdamW: betas must lie in [0, 1)");
        m_ = Eigen::VectorXd::Zero(parameter_count);
        v_ = Eigen::VectorXd::Zero(parameter_count);
    }

    Eigen::VectorXd step(const Eigen::VectorXd& parameters, const Eigen::VectorXd& grads) {
        if (parameters.size() != m_.size() || grads.size() != m_.size())
            throw std::invalid_argument("AdamW: shape mismatch");
        ++step_;
        m_ = params_.beta1 * m_ + (1.0 - params_.beta1) * grads;
        v_ = params_.beta2 * v_ + (1.0 - params_.beta2) * grads.cwiseProduct(grads);
        const double c1 = 1.0 - std::pow(params_.beta1, step_);
        const double c2 = 1.0 - std::pow(params_.beta2, step_);
        const Eigen::ArrayXd m_hat = m_.array() / c1;
        const Eigen::ArrayXd v_hat = v_.array() / c2;
        const Eigen::ArrayXd update = m_hat / (v_hat.sqrt() + params_.epsilon) +
                                      params_.weight_decay * parameters.array();
        return parameters - params_.rho * update.matrix();
    }

    int step_index() const { return step_; }

private:
    Params params_;
    Eigen::VectorXd m_, v_;
    int step_ = 0;
};

} // namespace slicedist
