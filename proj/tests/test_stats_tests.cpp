#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "slicedist/stats_tests.hpp"

using namespace slicedist;

namespace {

GaussianMixture standard_normal(Eigen::Index n) {
    return GaussianMixture::single(Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Identity(n, n));
}

GaussianMixture shifted_normal(Eigen::Index n, double shift) {
    return GaussianMixture::single(shift * Eigen::VectorXd::Ones(n),
                                   Eigen::MatrixXd::Identity(n, n));
}

} // namespace

TEST_CASE("run_two_sample validation") {
    TwoSampleConfig cfg{standard_normal(2), shifted_normal(2, 0.2)};
    cfg.trials = 1;
    REQUIRE_THROWS_AS(run_two_sample(cfg), std::invalid_argument);
    TwoSampleConfig bad{standard_normal(2), shifted_normal(3, 0.2)};
    REQUIRE_THROWS_AS(run_two_sample(bad), std::invalid_argument);
}

TEST_CASE("run_two_sample separates a mean shift at desk scale") {
    TwoSampleConfig cfg{standard_normal(2), shifted_normal(2, 0.2)};
    cfg.samples_per_set = 500;
    cfg.h = 100;
    cfg.n_values = 50;
    cfg.trials = 30;
    cfg.seed = 42;
    cfg.threads = 4;
    const TwoSampleReport report = run_two_sample(cfg);
    REQUIRE(report.alternative_arm.mean > report.null_arm.mean);
    REQUIRE(report.alternative_arm.mean - report.null_arm.mean >
            3.0 * report.null_arm.stddev);
    REQUIRE(report.null_arm.statistics.size() == 30);
    int hist_total = 0;
    for (const auto& b : report.null_arm.histogram) hist_total += b.count;
    REQUIRE(hist_total == 30);
}

TEST_CASE("run_two_sample with identical arms shows no separation") {
    TwoSampleConfig cfg{standard_normal(2), standard_normal(2)};
    cfg.samples_per_set = 400;
    cfg.h = 100;
    cfg.n_values = 50;
    cfg.trials = 40;
    cfg.seed = 7;
    cfg.threads = 4;
    const TwoSampleReport report = run_two_sample(cfg);
    const double se = std::sqrt(report.null_arm.stddev * report.null_arm.stddev / 40.0 +
                                report.alternative_arm.stddev *
                                    report.alternative_arm.stddev / 40.0);
    REQUIRE(std::abs(report.null_arm.mean - report.alternative_arm.mean) <= 3.0 * se);
}

TEST_CASE("run_two_sample reproducibility and thread invariance") {
    TwoSampleConfig cfg{standard_normal(2), shifted_normal(2, 0.3)};
    cfg.samples_per_set = 200;
    cfg.h = 50;
    cfg.n_values = 20;
    cfg.trials = 10;
    cfg.seed = 11;
    cfg.threads = 1;
    const TwoSampleReport a = run_two_sample(cfg);
    cfg.threads = 4;
    const TwoSampleReport b = run_two_sample(cfg);
    REQUIRE(a.null_arm.statistics == b.null_arm.statistics);
    REQUIRE(a.alternative_arm.statistics == b.alternative_arm.statistics);
}

TEST_CASE("permutation_pvalue") {
    RngStream rng(3);
    SECTION("strong separation is significant") {
        const SampleSet a = sample(standard_normal(2), 150, rng);
        const SampleSet b = sample(shifted_normal(2, 5.0), 150, rng);
        REQUIRE(permutation_pvalue(a, b, 1, 99, 50, 20, 4) <= 0.01);
    }
    SECTION("identical distributions give an unremarkable p-value") {
        const SampleSet a = sample(standard_normal(2), 150, rng);
        const SampleSet b = sample(standard_normal(2), 150, rng);
        const double p = permutation_pvalue(a, b, 2, 99, 50, 20, 4);
        REQUIRE(p > 0.0);
        REQUIRE(p <= 1.0);
    }
    SECTION("minimum permutation count enforced") {
        const SampleSet a = sample(standard_normal(2), 20, rng);
        REQUIRE_THROWS_AS(permutation_pvalue(a, a, 1, 18, 10, 5), std::invalid_argument);
    }
    SECTION("p-value calibration under the null", "[slow]") {
        // Fraction of p <= 0.05 over repetitions should be near 0.05.
        int rejections = 0;
        const int reps = 200;
        for (int r = 0; r < reps; ++r) {
            RngStream data_rng = RngStream::substream(900, 1, static_cast<std::uint64_t>(r));
            const SampleSet a = sample(standard_normal(1), 60, data_rng);
            const SampleSet b = sample(standard_normal(1), 60, data_rng);
            if (permutation_pvalue(a, b, 7000 + static_cast<std::uint64_t>(r), 39, 20, 10, 4) <=
                0.05)
                ++rejections;
        }
        const double frac = static_cast<double>(rejections) / reps;
        REQUIRE(frac >= 0.02 - 1e-12);
        REQUIRE(frac <= 0.08 + 1e-12);
    }
}
