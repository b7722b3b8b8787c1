// Command-line front end: distance evaluation, two-sample testing,
// distribution steering, and ergodic control, with JSON configs and flat
// CSV/JSON artifacts.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <sstream>
#include <string>

#include "slicedist/slicedist.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

constexpr int kExitBadInput = 2;
constexpr int kExitDimensionMismatch = 3;

struct CliError : std::runtime_error {
    int code;
    CliError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

json require_field(const json& j, const std::string& field, const std::string& context) {
    if (!j.contains(field))
        throw CliError(kExitBadInput, context + ": missing required field '" + field + "'");
    return j.at(field);
}

json load_config(const fs::path& path) {
    try {
        return json::parse(slicedist::detail::read_file(path));
    } catch (const json::exception& e) {
        throw CliError(kExitBadInput, path.string() + ": " + e.what());
    }
}

slicedist::GaussianMixture gmm_from_json(const json& j, const std::string& context) {
    try {
        std::vector<double> weights = require_field(j, "weights", context).get<std::vector<double>>();
        std::vector<slicedist::GaussianComponent> components;
        for (const auto& cj : require_field(j, "components", context)) {
            slicedist::GaussianComponent c;
            const auto mean = cj.at("mean").get<std::vector<double>>();
            c.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(),
                                                       static_cast<Eigen::Index>(mean.size()));
            const auto& cov = cj.at("cov");
            c.covariance.resize(static_cast<Eigen::Index>(cov.size()),
                                static_cast<Eigen::Index>(cov.size()));
            for (std::size_t r = 0; r < cov.size(); ++r)
                for (std::size_t s = 0; s < cov[r].size(); ++s)
                    c.covariance(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) =
                        cov[r][s].get<double>();
            components.push_back(std::move(c));
        }
        return slicedist::GaussianMixture(std::move(components), std::move(weights));
    } catch (const json::exception& e) {
        throw CliError(kExitBadInput, context + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw CliError(kExitBadInput, context + ": " + e.what());
    }
}

std::shared_ptr<const slicedist::DynamicsModel> make_model(const std::string& name, double dt,
                                                           int dimension) {
    if (name == "unicycle") return std::make_shared<slicedist::UnicycleModel>(dt);
    if (name == "single_integrator")
        return std::make_shared<slicedist::SingleIntegratorModel>(dimension, dt);
    throw CliError(kExitBadInput, "unknown dynamics model '" + name +
                                      "'; available models: unicycle, single_integrator");
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_manifest(const fs::path& dir, const std::string& command, const json& config,
                    std::uint64_t seed, double duration_seconds) {
    json m;
    m["command"] = command;
    m["config"] = config;
    m["seed"] = seed;
    m["tool_version"] = kToolVersion;
    m["output_dir"] = dir.string();
    m["duration_seconds"] = duration_seconds;
    slicedist::write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

void write_distances_csv(const fs::path& path, const std::vector<double>& values,
                         const std::string& index_name) {
    std::ostringstream out;
    out << index_name << ",value\n";
    for (std::size_t i = 0; i < values.size(); ++i)
        out << i << ',' << format_full(values[i]) << '\n';
    slicedist::write_file_atomic(path, out.str());
}

void write_trajectory_csv(const fs::path& path,
                          const std::vector<Eigen::MatrixXd>& states_history) {
    std::ostringstream out;
    out << "step,sample_id";
    if (!states_history.empty())
        for (Eigen::Index j = 0; j < states_history[0].cols(); ++j) out << ",x" << j;
    out << '\n';
    for (std::size_t t = 0; t < states_history.size(); ++t)
        for (Eigen::Index i = 0; i < states_history[t].rows(); ++i) {
            out << t << ',' << i;
            for (Eigen::Index j = 0; j < states_history[t].cols(); ++j)
                out << ',' << format_full(states_history[t](i, j));
            out << '\n';
        }
    slicedist::write_file_atomic(path, out.str());
}

struct DistanceArgs {
    std::string samples_path;
    std::string target_path;
    std::string samples_b_path;
    int h = 300;
    int n_values = 100;
    std::string threshold_rule = "sample-quantiles";
    bool smooth = false;
    double v = 100.0;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string output_path;
};

int run_distance(const DistanceArgs& args) {
    using namespace slicedist;
    if (args.target_path.empty() == args.samples_b_path.empty())
        throw CliError(kExitBadInput,
                       "distance: provide exactly one of --target or --samples-b");
    SampleSet samples = load_samples(args.samples_path);
    RngStream rng = RngStream::substream(args.seed, detail::kStreamEvalPlan);

    double value = 0.0;
    if (!args.target_path.empty()) {
        GaussianMixture target = load_gmm_json(args.target_path);
        if (target.dimension() != samples.dimension())
            throw CliError(kExitDimensionMismatch,
                           "dimension mismatch between " + args.samples_path + " and " +
                               args.target_path);
        const ThresholdRule rule = args.threshold_rule == "target-grid"
                                       ? ThresholdRule::TargetPercentileGrid
                                       : ThresholdRule::SampleQuantiles;
        const PlanContext context =
            rule == ThresholdRule::TargetPercentileGrid
                ? PlanContext(&target)
                : PlanContext(&samples);
        const SlicePlan plan = build_slice_plan(rng, args.h, args.n_values, rule, context,
                                                samples.dimension());
        value = args.smooth
                    ? smooth_distance(samples, target, plan, {args.v, true}, args.threads)
                    : hard_distance(samples, target, plan, args.threads);
    } else {
        SampleSet b = load_samples(args.samples_b_path);
        if (b.dimension() != samples.dimension())
            throw CliError(kExitDimensionMismatch,
                           "dimension mismatch between " + args.samples_path + " and " +
                               args.samples_b_path);
        const SlicePlan plan =
            build_slice_plan(rng, args.h, args.n_values, ThresholdRule::SampleQuantiles,
                             &samples, samples.dimension());
        value = hard_distance_two_sample(samples, b, plan, args.threads);
    }

    std::printf("%s\n", format_value(value).c_str());
    if (!args.output_path.empty()) {
        json out;
        out["value"] = value;
        out["H"] = args.h;
        out["n_values"] = args.n_values;
        out["seed"] = args.seed;
        out["smooth"] = args.smooth;
        out["v"] = args.v;
        slicedist::write_file_atomic(args.output_path, out.dump(2) + "\n");
    }
    return 0;
}

int run_two_sample_cmd(const std::string& config_path, const fs::path& out_dir,
                       std::uint64_t seed_override, bool seed_given, int threads) {
    using namespace slicedist;
    const json cfg = load_config(config_path);
    const std::string ctx = config_path;

    TwoSampleConfig config{
        gmm_from_json(require_field(cfg, "null", ctx), ctx + ": null"),
        gmm_from_json(require_field(cfg, "alternative", ctx), ctx + ": alternative"),
    };
    config.samples_per_set = require_field(cfg, "N", ctx).get<int>();
    config.h = require_field(cfg, "H", ctx).get<int>();
    config.n_values = require_field(cfg, "n_values", ctx).get<int>();
    config.trials = require_field(cfg, "trials", ctx).get<int>();
    config.seed = seed_given ? seed_override : cfg.value("seed", std::uint64_t{0});
    config.threads = threads;

    const auto start = std::chrono::steady_clock::now();
    TwoSampleReport report;
    try {
        report = run_two_sample(config);
    } catch (const std::invalid_argument& e) {
        throw CliError(kExitBadInput, std::string("two-sample: ") + e.what());
    }

    fs::create_directories(out_dir);
    json rj;
    for (const auto* arm : {&report.null_arm, &report.alternative_arm}) {
        json aj;
        aj["mean"] = arm->mean;
        aj["stddev"] = arm->stddev;
        aj["statistics"] = arm->statistics;
        rj[arm == &report.null_arm ? "null" : "alternative"] = aj;
    }
    write_file_atomic(out_dir / "report.json", rj.dump(2) + "\n");

    std::ostringstream hist;
    hist << "arm,bin_lo,bin_hi,count\n";
    for (const auto* arm : {&report.null_arm, &report.alternative_arm})
        for (const auto& b : arm->histogram)
            hist << (arm == &report.null_arm ? "null" : "alternative") << ','
                 << format_full(b.lo) << ',' << format_full(b.hi) << ',' << b.count << '\n';
    write_file_atomic(out_dir / "histogram.csv", hist.str());

    if (cfg.contains("permutations")) {
        RngStream rng = RngStream::substream(config.seed, detail::kStreamSampling);
        const SampleSet x = sample(config.null_distribution, config.samples_per_set, rng);
        const SampleSet y = sample(config.alternative, config.samples_per_set, rng);
        const double p = permutation_pvalue(x, y, config.seed, cfg["permutations"].get<int>(),
                                            config.h, config.n_values, threads);
        json pj;
        pj["p_value"] = p;
        pj["permutations"] = cfg["permutations"].get<int>();
        write_file_atomic(out_dir / "permutation.json", pj.dump(2) + "\n");
    }

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(out_dir, "two-sample", cfg, config.seed, secs);
    std::printf("null mean %s, alternative mean %s\n", format_value(report.null_arm.mean).c_str(),
                format_value(report.alternative_arm.mean).c_str());
    return 0;
}

slicedist::OptimizerConfig optimizer_from_json(const json& cfg) {
    slicedist::OptimizerConfig opt;
    const std::string kind = cfg.value("optimizer", "gd");
    if (kind == "adamw")
        opt.kind = slicedist::OptimizerKind::AdamW;
    else if (kind == "gd")
        opt.kind = slicedist::OptimizerKind::GradientDescent;
    else
        throw CliError(kExitBadInput, "unknown optimizer '" + kind + "'; available: gd, adamw");
    opt.rho = cfg.value("rho", opt.rho);
    opt.adamw.weight_decay = cfg.value("weight_decay", 0.0);
    return opt;
}

int run_steer_cmd(const std::string& config_path, const fs::path& out_dir,
                  std::uint64_t seed_override, bool seed_given, int threads) {
    using namespace slicedist;
    const json cfg = load_config(config_path);
    const std::string ctx = config_path;

    SteeringConfig config{
        nullptr,
        gmm_from_json(require_field(cfg, "mu_start", ctx), ctx + ": mu_start"),
        gmm_from_json(require_field(cfg, "mu_target", ctx), ctx + ": mu_target"),
    };
    const std::string model_name = require_field(cfg, "model", ctx).get<std::string>();
    config.model = make_model(model_name, cfg.value("dt", 0.1),
                              static_cast<int>(config.mu_start.dimension()));
    config.num_samples = require_field(cfg, "N", ctx).get<int>();
    config.lookahead = require_field(cfg, "tau", ctx).get<int>();
    config.replan_interval = require_field(cfg, "replan_interval", ctx).get<int>();
    config.total_steps = require_field(cfg, "total_steps", ctx).get<int>();
    config.train_h = require_field(cfg, "train_h", ctx).get<int>();
    config.train_n_values = require_field(cfg, "train_n_values", ctx).get<int>();
    config.eval_h = cfg.value("eval_h", 300);
    config.eval_n_values = cfg.value("eval_n_values", 100);
    config.inner_iterations = cfg.value("inner_iterations", 50);
    config.optimizer = optimizer_from_json(cfg);
    config.smoothing.v = cfg.value("v", 100.0);
    config.seed = seed_given ? seed_override : cfg.value("seed", std::uint64_t{0});
    config.threads = threads;

    const auto start = std::chrono::steady_clock::now();
    SteeringReport report;
    try {
        report = steer(config);
    } catch (const std::invalid_argument& e) {
        throw CliError(kExitBadInput, std::string("steer: ") + e.what());
    }

    fs::create_directories(out_dir);
    write_distances_csv(out_dir / "distances.csv", report.eval_distances, "step");
    write_trajectory_csv(out_dir / "trajectory.csv", report.states_history);
    json cj = json::array();
    for (const auto& c : report.controllers) {
        json e;
        e["K"] = json::array();
        for (Eigen::Index r = 0; r < c.k_matrix.rows(); ++r) {
            std::vector<double> row(static_cast<std::size_t>(c.k_matrix.cols()));
            for (Eigen::Index s = 0; s < c.k_matrix.cols(); ++s)
                row[static_cast<std::size_t>(s)] = c.k_matrix(r, s);
            e["K"].push_back(row);
        }
        e["b"] = std::vector<double>(c.b_vector.data(), c.b_vector.data() + c.b_vector.size());
        cj.push_back(e);
    }
    write_file_atomic(out_dir / "controller.json", cj.dump(2) + "\n");

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(out_dir, "steer", cfg, config.seed, secs);
    std::printf("initial distance %s, final distance %s\n",
                format_value(report.eval_distances.front()).c_str(),
                format_value(report.eval_distances.back()).c_str());
    return 0;
}

int run_ergodic_cmd(const std::string& config_path, const fs::path& out_dir,
                    std::uint64_t seed_override, bool seed_given, int threads) {
    using namespace slicedist;
    const json cfg = load_config(config_path);
    const std::string ctx = config_path;

    ErgodicConfig config{
        nullptr,
        Eigen::VectorXd(),
        gmm_from_json(require_field(cfg, "mu_target", ctx), ctx + ": mu_target"),
    };
    const std::string model_name = require_field(cfg, "model", ctx).get<std::string>();
    config.model = make_model(model_name, cfg.value("dt", 0.1),
                              static_cast<int>(config.mu_target.dimension()));
    const auto x0 = require_field(cfg, "x0", ctx).get<std::vector<double>>();
    config.initial_state =
        Eigen::Map<const Eigen::VectorXd>(x0.data(), static_cast<Eigen::Index>(x0.size()));
    config.horizon = require_field(cfg, "T", ctx).get<int>();
    config.iterations = require_field(cfg, "iterations", ctx).get<int>();
    config.train_h = require_field(cfg, "train_h", ctx).get<int>();
    config.train_n_values = require_field(cfg, "train_n_values", ctx).get<int>();
    config.eval_h = cfg.value("eval_h", 400);
    config.eval_n_values = cfg.value("eval_n_values", 400);
    config.optimizer = optimizer_from_json(cfg);
    if (!cfg.contains("optimizer")) config.optimizer.kind = OptimizerKind::AdamW;
    config.optimizer.rho = cfg.value("rho", 0.01);
    config.smoothing.v = cfg.value("v", 100.0);
    config.seed = seed_given ? seed_override : cfg.value("seed", std::uint64_t{0});
    config.threads = threads;

    const auto start = std::chrono::steady_clock::now();
    ErgodicReport report;
    try {
        report = ergodic(config);
    } catch (const std::invalid_argument& e) {
        throw CliError(kExitBadInput, std::string("ergodic: ") + e.what());
    }

    fs::create_directories(out_dir);
    write_distances_csv(out_dir / "distances.csv", report.eval_distances, "iteration");
    write_trajectory_csv(out_dir / "trajectory.csv", {report.trajectory});
    std::ostringstream controls;
    controls << "step";
    for (Eigen::Index j = 0; j < config.model->control_dimension(); ++j) controls << ",u" << j;
    controls << '\n';
    for (std::size_t t = 0; t < report.controls.size(); ++t) {
        controls << t;
        for (Eigen::Index j = 0; j < report.controls[t].size(); ++j)
            controls << ',' << format_full(report.controls[t][j]);
        controls << '\n';
    }
    write_file_atomic(out_dir / "controls.csv", controls.str());

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(out_dir, "ergodic", cfg, config.seed, secs);
    std::printf("initial distance %s, final distance %s\n",
                format_value(report.eval_distances.front()).c_str(),
                format_value(report.eval_distances.back()).c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Projection-averaged CDF distances between distributions, with "
                 "two-sample testing, distribution steering, and ergodic control"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    int threads = 1;
    std::string output_dir = ".";
    app.add_option("--seed", seed, "master seed")->capture_default_str();
    app.add_option("--threads", threads, "worker thread cap")->capture_default_str();
    app.add_option("--output-dir", output_dir, "output directory")->capture_default_str();

    DistanceArgs dargs;
    auto* dist = app.add_subcommand("distance", "evaluate the sliced distance");
    dist->add_option("--samples", dargs.samples_path, "sample CSV/JSON file")->required();
    dist->add_option("--target", dargs.target_path, "target GMM JSON file");
    dist->add_option("--samples-b", dargs.samples_b_path, "second sample file");
    dist->add_option("--H,--directions", dargs.h, "number of directions")
        ->capture_default_str();
    dist->add_option("--n-values", dargs.n_values, "thresholds per direction")
        ->capture_default_str();
    dist->add_option("--threshold-rule", dargs.threshold_rule,
                     "sample-quantiles or target-grid")
        ->capture_default_str();
    dist->add_flag("--smooth", dargs.smooth, "use the sigmoid-relaxed distance");
    dist->add_option("--v", dargs.v, "sigmoid sharpness")->capture_default_str();
    dist->add_option("--output", dargs.output_path, "result JSON path");

    std::string config_path;
    auto* two = app.add_subcommand("two-sample", "run the two-sample experiment");
    two->add_option("config", config_path, "config JSON file")->required();

    auto* steer_cmd = app.add_subcommand("steer", "run distribution steering");
    steer_cmd->add_option("config", config_path, "config JSON file")->required();

    auto* ergodic_cmd = app.add_subcommand("ergodic", "run ergodic control");
    ergodic_cmd->add_option("config", config_path, "config JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const bool seed_given = app.count("--seed") > 0;
        if (dist->parsed()) {
            dargs.seed = seed;
            dargs.threads = threads;
            return run_distance(dargs);
        }
        if (two->parsed())
            return run_two_sample_cmd(config_path, output_dir, seed, seed_given, threads);
        if (steer_cmd->parsed())
            return run_steer_cmd(config_path, output_dir, seed, seed_given, threads);
        if (ergodic_cmd->parsed())
            return run_ergodic_cmd(config_path, output_dir, seed, seed_given, threads);
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.code;
    } catch (const slicedist::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBadInput;
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        std::fprintf(stderr, "error: %s\n", msg.c_str());
        return msg.find("dimension") != std::string::npos ? kExitDimensionMismatch
                                                          : kExitBadInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
