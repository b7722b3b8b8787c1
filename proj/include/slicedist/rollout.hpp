#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "slicedist/parallel.hpp"
#include "slicedist/sample_set.hpp"

namespace slicedist {

// Discrete-time dynamics x+ = f(x, u) with analytic jacobians.
class DynamicsModel {
public:
    virtual ~DynamicsModel() = default;
    virtual Eigen::Index state_dimension() const = 0;
    virtual Eigen::Index control_dimension() const = 0;
    virtual Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const = 0;
    // Returns (df/dx, df/du).
    virtual std::pair<Eigen::MatrixXd, Eigen::MatrixXd>
    jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
        return finite_difference_jacobians(x, u);
    }

    std::pair<Eigen::MatrixXd, Eigen::MatrixXd>
    finite_difference_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                double h = 1e-6) const {
        Eigen::MatrixXd a(state_dimension(), state_dimension());
        Eigen::MatrixXd b(state_dimension(), control_dimension());
        for (Eigen::Index j = 0; j < state_dimension(); ++j) {
            Eigen::VectorXd xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            a.col(j) = (step(xp, u) - step(xm, u)) / (2.0 * h);
        }
        for (Eigen::Index j = 0; j < control_dimension(); ++j) {
            Eigen::VectorXd up = u, um = u;
            up[j] += h;
            um[j] -= h;
            b.col(j) = (step(x, up) - step(x, um)) / (2.0 * h);
        }
        return {std::move(a), std::move(b)};
    }
};

inline Eigen::Vector3d unicycle_step(const Eigen::Vector3d& state,
                                     const Eigen::Vector2d& control, double dt) {
    const double theta = state[2];
    return {state[0] + control[0] * dt * std::cos(theta),
            state[1] + control[0] * dt * std::sin(theta),
            state[2] + control[1] * dt};
}

// Unicycle: state (x position, y position, heading), controls (linear
// velocity, angular velocity). Heading stays unwrapped so rollouts remain
// smooth.
class UnicycleModel final : public DynamicsModel {
public:
    explicit UnicycleModel(double dt = 0.1) : dt_(dt) {
        if (!(dt > 0.0)) throw std::invalid_argument("UnicycleModel: dt must be positive");
    }

    Eigen::Index state_dimension() const override { return 3; }
    Eigen::Index control_dimension() const override { return 2; }

    Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override {
        return unicycle_step(x, u, dt_);
    }

    std::pair<Eigen::MatrixXd, Eigen::MatrixXd>
    jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override {
        const double c = std::cos(x[2]), s = std::sin(x[2]);
        Eigen::Matrix3d a = Eigen::Matrix3d::Identity();
        a(0, 2) = -u[0] * dt_ * s;
        a(1, 2) = u[0] * dt_ * c;
        Eigen::Matrix<double, 3, 2> b = Eigen::Matrix<double, 3, 2>::Zero();
        b(0, 0) = dt_ * c;
        b(1, 0) = dt_ * s;
        b(2, 1) = dt_;
        return {a, b};
    }

    double dt() const { return dt_; }

private:
    double dt_;
};

// Minimal test model x+ = x + dt u.
class SingleIntegratorModel final : public DynamicsModel {
public:
    explicit SingleIntegratorModel(Eigen::Index n, double dt = 1.0) : n_(n), dt_(dt) {
        if (n < 1) throw std::invalid_argument("SingleIntegratorModel: dimension must be >= 1");
        if (!(dt > 0.0)) throw std::invalid_argument("SingleIntegratorModel: dt must be positive");
    }

    Eigen::Index state_dimension() const override { return n_; }
    Eigen::Index control_dimension() const override { return n_; }

    Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override {
        return x + dt_ * u;
    }

    std::pair<Eigen::MatrixXd, Eigen::MatrixXd>
    jacobians(const Eigen::VectorXd&, const Eigen::VectorXd&) const override {
        return {Eigen::MatrixXd::Identity(n_, n_), dt_ * Eigen::MatrixXd::Identity(n_, n_)};
    }

private:
    Eigen::Index n_;
    double dt_;
};

// Affine state-feedback controller u = K x + b.
struct AffineController {
    Eigen::MatrixXd k_matrix; // n_u x n_x
    Eigen::VectorXd b_vector; // n_u

    static AffineController zero(Eigen::Index n_u, Eigen::Index n_x) {
        return {Eigen::MatrixXd::Zero(n_u, n_x), Eigen::VectorXd::Zero(n_u)};
    }

    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const {
        return k_matrix * x + b_vector;
    }
};

// Recorded forward trajectory: states[t] holds one row per sample at step t,
// controls[t] the controls applied between t and t+1.
struct RolloutTape {
    const DynamicsModel* model = nullptr;
    std::vector<Eigen::MatrixXd> states;   // (steps+1) entries, each N x n_x
    std::vector<Eigen::MatrixXd> controls; // steps entries, each N x n_u
};

namespace detail {

[[noreturn]] inline void throw_divergence(std::size_t step) {
    throw std::runtime_error("rollout diverged: non-finite state at step " +
                             std::to_string(step));
}

} // namespace detail

// Applies u = K x + b at every step with the same (K, b) for all samples.
inline RolloutTape rollout_closed_loop(const DynamicsModel& model,
                                       const AffineController& controller,
                                       const SampleSet& initial_states, int steps,
                                       int threads = 1) {
    if (steps < 1) throw std::invalid_argument("rollout_closed_loop: steps must be >= 1");
    if (initial_states.dimension() != model.state_dimension())
        throw std::invalid_argument("rollout_closed_loop: state dimension mismatch");
    if (controller.k_matrix.rows() != model.control_dimension() ||
        controller.k_matrix.cols() != model.state_dimension() ||
        controller.b_vector.size() != model.control_dimension())
        throw std::invalid_argument("rollout_closed_loop: controller shape mismatch");

    const Eigen::Index n_samples = initial_states.size();
    RolloutTape tape;
    tape.model = &model;
    tape.states.reserve(static_cast<std::size_t>(steps) + 1);
    tape.controls.reserve(static_cast<std::size_t>(steps));
    tape.states.push_back(initial_states.points());
    for (int t = 0; t < steps; ++t) {
        const Eigen::MatrixXd& cur = tape.states.back();
        Eigen::MatrixXd controls(n_samples, model.control_dimension());
        Eigen::MatrixXd next(n_samples, model.state_dimension());
        parallel_for(static_cast<std::size_t>(n_samples), threads, [&](std::size_t i) {
            const auto row = static_cast<Eigen::Index>(i);
            const Eigen::VectorXd x = cur.row(row);
            const Eigen::VectorXd u = controller(x);
            controls.row(row) = u.transpose();
            next.row(row) = model.step(x, u).transpose();
        });
        if (!next.allFinite()) detail::throw_divergence(static_cast<std::size_t>(t) + 1);
        tape.controls.push_back(std::move(controls));
        tape.states.push_back(std::move(next));
    }
    return tape;
}

// Open-loop rollout of a single trajectory under a given control sequence.
inline RolloutTape rollout_open_loop(const DynamicsModel& model,
                                     const std::vector<Eigen::VectorXd>& controls,
                                     const Eigen::VectorXd& initial_state) {
    if (controls.empty())
        throw std::invalid_argument("rollout_open_loop: need at least one control");
    if (initial_state.size() != model.state_dimension())
        throw std::invalid_argument("rollout_open_loop: state dimension mismatch");
    RolloutTape tape;
    tape.model = &model;
    tape.states.push_back(initial_state.transpose());
    for (std::size_t t = 0; t < controls.size(); ++t) {
        if (controls[t].size() != model.control_dimension())
            throw std::invalid_argument("rollout_open_loop: control dimension mismatch");
        const Eigen::VectorXd x = tape.states.back().row(0);
        const Eigen::VectorXd next = model.step(x, controls[t]);
        if (!next.allFinite()) detail::throw_divergence(t + 1);
        tape.controls.push_back(controls[t].transpose());
        tape.states.push_back(next.transpose());
    }
    return tape;
}

// Reverse pass through a closed-loop tape: accumulates the gradient of a
// scalar loss (given through its gradient at the final states) with respect
// to the shared controller (K, b). Gradients are summed over samples in
// index order.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd>
backward_controller(const RolloutTape& tape, const AffineController& controller,
                    const Eigen::MatrixXd& loss_grad_final_states, int threads = 1) {
    if (!tape.model || tape.states.size() < 2)
        throw std::invalid_argument("backward_controller: empty tape");
    const DynamicsModel& model = *tape.model;
    const Eigen::Index n_x = model.state_dimension();
    const Eigen::Index n_u = model.control_dimension();
    const Eigen::Index n_samples = tape.states[0].rows();
    if (loss_grad_final_states.rows() != n_samples || loss_grad_final_states.cols() != n_x)
        throw std::invalid_argument("backward_controller: gradient shape mismatch");
    const std::size_t steps = tape.controls.size();

    std::vector<Eigen::MatrixXd> grad_k(static_cast<std::size_t>(n_samples));
    std::vector<Eigen::VectorXd> grad_b(static_cast<std::size_t>(n_samples));
    parallel_for(static_cast<std::size_t>(n_samples), threads, [&](std::size_t i) {
        const auto row = static_cast<Eigen::Index>(i);
        Eigen::MatrixXd gk = Eigen::MatrixXd::Zero(n_u, n_x);
        Eigen::VectorXd gb = Eigen::VectorXd::Zero(n_u);
        Eigen::VectorXd lambda = loss_grad_final_states.row(row);
        for (std::size_t t = steps; t-- > 0;) {
            const Eigen::VectorXd x = tape.states[t].row(row);
            const Eigen::VectorXd u = tape.controls[t].row(row);
            const auto [a, b] = model.jacobians(x, u);
            const Eigen::VectorXd g_u = b.transpose() * lambda;
            gk += g_u * x.transpose();
            gb += g_u;
            lambda = (a + b * controller.k_matrix).transpose() * lambda;
        }
        grad_k[i] = std::move(gk);
        grad_b[i] = std::move(gb);
    });
    Eigen::MatrixXd gk = Eigen::MatrixXd::Zero(n_u, n_x);
    Eigen::VectorXd gb = Eigen::VectorXd::Zero(n_u);
    for (Eigen::Index i = 0; i < n_samples; ++i) {
        gk += grad_k[static_cast<std::size_t>(i)];
        gb += grad_b[static_cast<std::size_t>(i)];
    }
    return {std::move(gk), std::move(gb)};
}

// Backward-through-time pass over an open-loop tape: given per-step loss
// gradients for x_0..x_{T+1}, returns the gradient with respect to each
// control.
inline std::vector<Eigen::VectorXd>
backward_controls(const RolloutTape& tape,
                  const std::vector<Eigen::VectorXd>& loss_grads_states) {
    if (!tape.model || tape.states.size() < 2)
        throw std::invalid_argument("backward_controls: empty tape");
    const DynamicsModel& model = *tape.model;
    if (loss_grads_states.size() != tape.states.size())
        throw std::invalid_argument("backward_controls: need one gradient per state");
    for (const auto& g : loss_grads_states)
        if (g.size() != model.state_dimension())
            throw std::invalid_argument("backward_controls: gradient shape mismatch");

    const std::size_t steps = tape.controls.size();
    std::vector<Eigen::VectorXd> grad_u(steps);
    Eigen::VectorXd lambda = loss_grads_states.back();
    for (std::size_t t = steps; t-- > 0;) {
        const Eigen::VectorXd x = tape.states[t].row(0);
        const Eigen::VectorXd u = tape.controls[t].row(0);
        const auto [a, b] = model.jacobians(x, u);
        grad_u[t] = b.transpose() * lambda;
        lambda = loss_grads_states[t] + a.transpose() * lambda;
    }
    return grad_u;
}

} // namespace slicedist
