#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "slicedist/gaussian_mixture.hpp"
#include "slicedist/optimizers.hpp"
#include "slicedist/rng.hpp"
#include "slicedist/rollout.hpp"
#include "slicedist/sample_set.hpp"
#include "slicedist/slice_plan.hpp"
#include "slicedist/sliced_distance.hpp"

namespace slicedist {

// Selects the state coordinates whose distribution is being controlled
// (default: the Cartesian position, coordinates 0 and 1). The backward
// direction pads unselected coordinates with zeros.
struct ObservationMap {
    std::vector<Eigen::Index> indices = {0, 1};

    Eigen::Index output_dimension() const {
        return static_cast<Eigen::Index>(indices.size());
    }

    Eigen::MatrixXd observe(const Eigen::MatrixXd& states) const {
        Eigen::MatrixXd out(states.rows(), output_dimension());
        for (std::size_t j = 0; j < indices.size(); ++j)
            out.col(static_cast<Eigen::Index>(j)) = states.col(indices[j]);
        return out;
    }

    Eigen::MatrixXd lift_gradient(const Eigen::MatrixXd& grad_obs,
                                  Eigen::Index state_dimension) const {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(grad_obs.rows(), state_dimension);
        for (std::size_t j = 0; j < indices.size(); ++j)
            out.col(indices[j]) = grad_obs.col(static_cast<Eigen::Index>(j));
        return out;
    }
};

enum class OptimizerKind { GradientDescent, AdamW };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::GradientDescent;
    double rho = 0.05;
    AdamW::Params adamw; // rho below overrides adamw.rho when kind is AdamW
};

// Receding-horizon distribution steering configuration.
struct SteeringConfig {
    std::shared_ptr<const DynamicsModel> model;
    GaussianMixture mu_start;  // initial position distribution
    GaussianMixture mu_target; // target position distribution
    ObservationMap observation;
    int num_samples = 3000;
    int lookahead = 25;       // tau
    int replan_interval = 20; // controller update period in executed steps
    int total_steps = 200;
    int train_h = 50;
    int train_n_values = 30;
    int eval_h = 300;
    int eval_n_values = 100;
    int inner_iterations = 50;
    OptimizerConfig optimizer;
    SmoothingConfig smoothing;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct SteeringReport {
    std::vector<double> eval_distances;      // one per executed step, index 0 = initial
    std::vector<AffineController> controllers; // one per replan
    std::vector<Eigen::MatrixXd> states_history; // one N x n_x snapshot per step incl. initial
};

struct ErgodicConfig {
    std::shared_ptr<const DynamicsModel> model;
    Eigen::VectorXd initial_state;
    GaussianMixture mu_target;
    ObservationMap observation;
    int horizon = 5000; // T
    int iterations = 300;
    int train_h = 50;
    int train_n_values = 100;
    int eval_h = 400;
    int eval_n_values = 400;
    double init_control_sd = 0.01;
    OptimizerConfig optimizer;
    SmoothingConfig smoothing;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct ErgodicReport {
    std::vector<double> eval_distances; // one per iteration plus the final iterate
    std::vector<Eigen::VectorXd> controls;
    Eigen::MatrixXd trajectory; // (T+2) x n_x final states
};

namespace detail {

// Substream ids, fixed so each randomness consumer is independent.
constexpr std::uint64_t kStreamSampling = 1;
constexpr std::uint64_t kStreamTrainPlans = 2;
constexpr std::uint64_t kStreamEvalPlan = 3;
constexpr std::uint64_t kStreamPermutations = 4;
constexpr std::uint64_t kStreamControlsInit = 5;

inline Eigen::VectorXd flatten_controller(const AffineController& c) {
    Eigen::VectorXd out(c.k_matrix.size() + c.b_vector.size());
    out.head(c.k_matrix.size()) =
        Eigen::Map<const Eigen::VectorXd>(c.k_matrix.data(), c.k_matrix.size());
    out.tail(c.b_vector.size()) = c.b_vector;
    return out;
}

inline AffineController unflatten_controller(const Eigen::VectorXd& flat, Eigen::Index n_u,
                                             Eigen::Index n_x) {
    AffineController c = AffineController::zero(n_u, n_x);
    Eigen::Map<Eigen::VectorXd>(c.k_matrix.data(), c.k_matrix.size()) =
        flat.head(n_u * n_x);
    c.b_vector = flat.tail(n_u);
    return c;
}

} // namespace detail

// Receding-horizon steering: every replan_interval steps the affine
// controller is re-optimized on the sigmoid-relaxed distance of the
// tau-step lookahead positions to the target, then executed. A frozen,
// independently seeded plan scores every executed step.
inline SteeringReport steer(const SteeringConfig& config) {
    if (!config.model) throw std::invalid_argument("steer: model is required");
    const DynamicsModel& model = *config.model;
    if (config.lookahead < config.replan_interval || config.replan_interval < 1)
        throw std::invalid_argument("steer: need lookahead >= replan_interval >= 1");
    if (config.num_samples < 1 || config.total_steps < 1)
        throw std::invalid_argument("steer: need num_samples >= 1 and total_steps >= 1");
    const Eigen::Index n_x = model.state_dimension();
    const Eigen::Index n_u = model.control_dimension();
    const Eigen::Index n_obs = config.observation.output_dimension();
    if (config.mu_start.dimension() != n_obs || config.mu_target.dimension() != n_obs)
        throw std::invalid_argument("steer: distribution dimensions must match the observation map");

    RngStream rng_sampling =
        RngStream::substream(config.seed, detail::kStreamSampling);
    RngStream rng_train = RngStream::substream(config.seed, detail::kStreamTrainPlans);
    RngStream rng_eval = RngStream::substream(config.seed, detail::kStreamEvalPlan);

    // Initial states: sampled positions in the observed coordinates, zeros
    // (e.g. heading) elsewhere.
    const SampleSet positions0 = sample(config.mu_start, config.num_samples, rng_sampling);
    Eigen::MatrixXd states = Eigen::MatrixXd::Zero(config.num_samples, n_x);
    for (std::size_t j = 0; j < config.observation.indices.size(); ++j)
        states.col(config.observation.indices[j]) =
            positions0.points().col(static_cast<Eigen::Index>(j));

    const SlicePlan eval_plan =
        build_slice_plan(rng_eval, config.eval_h, config.eval_n_values,
                         ThresholdRule::TargetPercentileGrid, &config.mu_target, n_obs);

    SteeringReport report;
    report.states_history.push_back(states);
    report.eval_distances.push_back(hard_distance(
        SampleSet(config.observation.observe(states)), config.mu_target, eval_plan,
        config.threads));

    AffineController controller = AffineController::zero(n_u, n_x);
    for (int t = 0; t < config.total_steps; ++t) {
        if (t % config.replan_interval == 0) {
            // Fresh directions per replan make each update a stochastic
            // gradient step on the underlying distance.
            const SlicePlan train_plan = build_slice_plan(
                rng_train, config.train_h, config.train_n_values,
                ThresholdRule::TargetPercentileGrid, &config.mu_target, n_obs);
            AdamW adamw(n_u * n_x + n_u, [&] {
                AdamW::Params p = config.optimizer.adamw;
                p.rho = config.optimizer.rho;
                return p;
            }());
            for (int it = 0; it < config.inner_iterations; ++it) {
                const RolloutTape tape =
                    rollout_closed_loop(model, controller, SampleSet(states),
                                        config.lookahead, config.threads);
                const SampleSet final_positions(
                    config.observation.observe(tape.states.back()));
                const SmoothDistanceResult res = smooth_distance_gradient(
                    final_positions, config.mu_target, train_plan, config.smoothing,
                    config.threads);
                const Eigen::MatrixXd lifted =
                    config.observation.lift_gradient(res.gradient, n_x);
                const auto [grad_k, grad_b] =
                    backward_controller(tape, controller, lifted, config.threads);
                const Eigen::VectorXd flat = detail::flatten_controller(controller);
                const Eigen::VectorXd grad =
                    detail::flatten_controller({grad_k, grad_b});
                Eigen::VectorXd next;
                if (config.optimizer.kind == OptimizerKind::AdamW)
                    next = adamw.step(flat, grad);
                else
                    next = gd_step(flat, grad, config.optimizer.rho);
                controller = detail::unflatten_controller(next, n_u, n_x);
            }
            report.controllers.push_back(controller);
        }
        // Execute one real step under the current controller.
        Eigen::MatrixXd next(config.num_samples, n_x);
        parallel_for(static_cast<std::size_t>(config.num_samples), config.threads,
                     [&](std::size_t i) {
                         const auto row = static_cast<Eigen::Index>(i);
                         const Eigen::VectorXd x = states.row(row);
                         next.row(row) = model.step(x, controller(x)).transpose();
                     });
        if (!next.allFinite())
            throw std::runtime_error("steer: rollout diverged at step " + std::to_string(t + 1));
        states = std::move(next);
        report.states_history.push_back(states);
        report.eval_distances.push_back(hard_distance(
            SampleSet(config.observation.observe(states)), config.mu_target, eval_plan,
            config.threads));
    }
    return report;
}

// Ergodic control: the whole trajectory's observed positions form one
// sample set whose distance to the target is minimized over the open-loop
// control sequence.
inline ErgodicReport ergodic(const ErgodicConfig& config) {
    if (!config.model) throw std::invalid_argument("ergodic: model is required");
    const DynamicsModel& model = *config.model;
    if (config.horizon < 1 || config.iterations < 1)
        throw std::invalid_argument("ergodic: need horizon >= 1 and iterations >= 1");
    const Eigen::Index n_x = model.state_dimension();
    const Eigen::Index n_u = model.control_dimension();
    const Eigen::Index n_obs = config.observation.output_dimension();
    if (config.initial_state.size() != n_x)
        throw std::invalid_argument("ergodic: initial state dimension mismatch");
    if (config.mu_target.dimension() != n_obs)
        throw std::invalid_argument("ergodic: target dimension must match the observation map");

    RngStream rng_init = RngStream::substream(config.seed, detail::kStreamControlsInit);
    RngStream rng_train = RngStream::substream(config.seed, detail::kStreamTrainPlans);
    RngStream rng_eval = RngStream::substream(config.seed, detail::kStreamEvalPlan);

    // Small random initial controls break the symmetry of the degenerate
    // single-point trajectory.
    std::vector<Eigen::VectorXd> controls(static_cast<std::size_t>(config.horizon) + 1);
    for (auto& u : controls) {
        u.resize(n_u);
        for (Eigen::Index j = 0; j < n_u; ++j)
            u[j] = config.init_control_sd * rng_init.normal();
    }

    const SlicePlan eval_plan =
        build_slice_plan(rng_eval, config.eval_h, config.eval_n_values,
                         ThresholdRule::TargetPercentileGrid, &config.mu_target, n_obs);

    const Eigen::Index flat_size = static_cast<Eigen::Index>(controls.size()) * n_u;
    AdamW adamw(flat_size, [&] {
        AdamW::Params p = config.optimizer.adamw;
        p.rho = config.optimizer.rho;
        return p;
    }());

    ErgodicReport report;
    RolloutTape tape;
    auto gather_trajectory = [&](const RolloutTape& tp) {
        Eigen::MatrixXd traj(static_cast<Eigen::Index>(tp.states.size()), n_x);
        for (std::size_t t = 0; t < tp.states.size(); ++t)
            traj.row(static_cast<Eigen::Index>(t)) = tp.states[t].row(0);
        return traj;
    };

    for (int it = 0; it < config.iterations; ++it) {
        tape = rollout_open_loop(model, controls, config.initial_state);
        const Eigen::MatrixXd traj = gather_trajectory(tape);
        const SampleSet positions(config.observation.observe(traj));
        report.eval_distances.push_back(
            hard_distance(positions, config.mu_target, eval_plan, config.threads));

        const SlicePlan train_plan = build_slice_plan(
            rng_train, config.train_h, config.train_n_values,
            ThresholdRule::TargetPercentileGrid, &config.mu_target, n_obs);
        const SmoothDistanceResult res = smooth_distance_gradient(
            positions, config.mu_target, train_plan, config.smoothing, config.threads);
        const Eigen::MatrixXd lifted = config.observation.lift_gradient(res.gradient, n_x);
        std::vector<Eigen::VectorXd> state_grads(tape.states.size());
        for (std::size_t t = 0; t < tape.states.size(); ++t)
            state_grads[t] = lifted.row(static_cast<Eigen::Index>(t));
        const std::vector<Eigen::VectorXd> grad_u = backward_controls(tape, state_grads);

        Eigen::VectorXd flat(flat_size), grad(flat_size);
        for (std::size_t t = 0; t < controls.size(); ++t) {
            flat.segment(static_cast<Eigen::Index>(t) * n_u, n_u) = controls[t];
            grad.segment(static_cast<Eigen::Index>(t) * n_u, n_u) = grad_u[t];
        }
        Eigen::VectorXd next;
        if (config.optimizer.kind == OptimizerKind::AdamW)
            next = adamw.step(flat, grad);
        else
            next = gd_step(flat, grad, config.optimizer.rho);
        for (std::size_t t = 0; t < controls.size(); ++t)
            controls[t] = next.segment(static_cast<Eigen::Index>(t) * n_u, n_u);
    }

    tape = rollout_open_loop(model, controls, config.initial_state);
    report.trajectory = gather_trajectory(tape);
    report.eval_distances.push_back(
        hard_distance(SampleSet(config.observation.observe(report.trajectory)),
                      config.mu_target, eval_plan, config.threads));
    report.controls = std::move(controls);
    return report;
}

} // namespace slicedist
