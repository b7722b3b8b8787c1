#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "slicedist/gaussian_mixture.hpp"
#include "slicedist/slice_plan.hpp"
#include "slicedist/sliced_distance.hpp"

using namespace slicedist;

namespace {

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
    Eigen::MatrixXd m(rows.size(), rows.begin()->size());
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        Eigen::Index c = 0;
        for (double v : row) m(r, c++) = v;
        ++r;
    }
    return m;
}

GaussianMixture standard_normal(Eigen::Index n) {
    return GaussianMixture::single(Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Identity(n, n));
}

SlicePlan single_slice_plan(Eigen::VectorXd direction, std::vector<double> thresholds) {
    SlicePlan plan;
    plan.slices.push_back({Direction::normalized(std::move(direction)), std::move(thresholds)});
    return plan;
}

} // namespace

TEST_CASE("build_slice_plan") {
    SECTION("sample quantiles: median of three") {
        const SampleSet s(mat({{1.0}, {2.0}, {3.0}}));
        RngStream rng(1);
        const SlicePlan plan =
            build_slice_plan(rng, 1, 1, ThresholdRule::SampleQuantiles, &s, 1);
        // In 1-D the drawn direction is +-1; the median moves with it.
        const double sign = plan.slices[0].direction.coords()[0];
        REQUIRE(plan.slices[0].thresholds[0] == Catch::Approx(2.0 * sign).margin(1e-15));
    }
    SECTION("target percentile grid endpoints") {
        const GaussianMixture target = standard_normal(1);
        RngStream rng(2);
        const SlicePlan plan =
            build_slice_plan(rng, 1, 2, ThresholdRule::TargetPercentileGrid, &target, 1);
        REQUIRE(std::abs(plan.slices[0].thresholds[0]) == Catch::Approx(2.5758).margin(1e-3));
        REQUIRE(std::abs(plan.slices[0].thresholds[1]) == Catch::Approx(2.5758).margin(1e-3));
    }
    SECTION("thresholds are nondecreasing") {
        const GaussianMixture target = standard_normal(3);
        RngStream rng(3);
        const SlicePlan plan =
            build_slice_plan(rng, 10, 17, ThresholdRule::TargetPercentileGrid, &target, 3);
        for (const auto& s : plan.slices)
            for (std::size_t j = 1; j < s.thresholds.size(); ++j)
                REQUIRE(s.thresholds[j] >= s.thresholds[j - 1]);
    }
    SECTION("plan determinism") {
        const GaussianMixture target = standard_normal(2);
        RngStream a(7), b(7);
        const SlicePlan pa =
            build_slice_plan(a, 5, 4, ThresholdRule::TargetPercentileGrid, &target, 2);
        const SlicePlan pb =
            build_slice_plan(b, 5, 4, ThresholdRule::TargetPercentileGrid, &target, 2);
        for (std::size_t k = 0; k < pa.slices.size(); ++k) {
            REQUIRE(pa.slices[k].direction.coords() == pb.slices[k].direction.coords());
            REQUIRE(pa.slices[k].thresholds == pb.slices[k].thresholds);
        }
    }
}

TEST_CASE("hard_distance") {
    SECTION("balanced samples against a symmetric target") {
        const SampleSet s(mat({{1.0, 0.0}, {-1.0, 0.0}, {2.0, 0.0}, {-0.5, 0.0}}));
        const SlicePlan plan =
            single_slice_plan((Eigen::VectorXd(2) << 1.0, 0.0).finished(), {0.0});
        // Half the samples are at or above 0, and so is half the target mass.
        REQUIRE(hard_distance(s, standard_normal(2), plan) == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("identical distributions give a vanishing distance") {
        // Samples sit exactly on the mean of a near-point-mass target; with
        // thresholds spread away from the atom the distance vanishes.
        const GaussianMixture near_point = GaussianMixture::single(
            (Eigen::VectorXd(2) << 1.0, 1.0).finished(), 1e-12 * Eigen::MatrixXd::Identity(2, 2));
        const Eigen::MatrixXd pts = Eigen::MatrixXd::Ones(50, 2);
        RngStream rng(5);
        SlicePlan plan;
        for (int k = 0; k < 20; ++k)
            plan.slices.push_back({sample_direction(rng, 2), {-3.0, -1.5, 0.0, 0.5, 2.9}});
        REQUIRE(hard_distance(SampleSet(pts), near_point, plan) < 1e-6);
    }
    SECTION("bounded in [0, 1]") {
        RngStream rng(9);
        const GaussianMixture target = standard_normal(2);
        const SampleSet far(mat({{100.0, 100.0}, {101.0, 99.0}}));
        const SlicePlan plan =
            build_slice_plan(rng, 10, 5, ThresholdRule::TargetPercentileGrid, &target, 2);
        const double d = hard_distance(far, target, plan);
        REQUIRE(d >= 0.0);
        REQUIRE(d <= 1.0);
    }
    SECTION("self-distance decreases with sample size") {
        const GaussianMixture target = standard_normal(2);
        RngStream rng(11);
        double prev = 1.0;
        for (int n : {100, 1000, 10000}) {
            std::vector<double> vals;
            for (int rep = 0; rep < 5; ++rep) {
                const SampleSet s = sample(target, n, rng);
                const SlicePlan plan = build_slice_plan(
                    rng, 30, 20, ThresholdRule::TargetPercentileGrid, &target, 2);
                vals.push_back(hard_distance(s, target, plan));
            }
            std::sort(vals.begin(), vals.end());
            const double median = vals[vals.size() / 2];
            REQUIRE(median < prev);
            prev = median;
        }
    }
    SECTION("thread-count invariance") {
        const GaussianMixture target = standard_normal(3);
        RngStream data_rng(13), plan_rng(14);
        const SampleSet s = sample(target, 500, data_rng);
        const SlicePlan plan =
            build_slice_plan(plan_rng, 40, 10, ThresholdRule::TargetPercentileGrid, &target, 3);
        const double d1 = hard_distance(s, target, plan, 1);
        const double d4 = hard_distance(s, target, plan, 4);
        REQUIRE(d1 == d4);
    }
}

TEST_CASE("hard_distance_two_sample") {
    RngStream rng(15);
    const GaussianMixture base = standard_normal(2);
    const SampleSet a = sample(base, 200, rng);
    const SampleSet b = sample(base, 200, rng);
    const SlicePlan plan =
        build_slice_plan(rng, 20, 10, ThresholdRule::SampleQuantiles, &a, 2);

    SECTION("identical sets") {
        REQUIRE(hard_distance_two_sample(a, a, plan) == 0.0);
    }
    SECTION("symmetric in its sample arguments under a fixed plan") {
        REQUIRE(hard_distance_two_sample(a, b, plan) == hard_distance_two_sample(b, a, plan));
    }
    SECTION("mean shift separates from the null over repeated seeds") {
        GaussianMixture shifted = GaussianMixture::single(
            0.2 * Eigen::VectorXd::Ones(2), Eigen::MatrixXd::Identity(2, 2));
        int wins = 0;
        const int seeds = 50;
        for (int s = 0; s < seeds; ++s) {
            RngStream r(1000 + static_cast<std::uint64_t>(s));
            const SampleSet x = sample(base, 1000, r);
            const SampleSet y_alt = sample(shifted, 1000, r);
            const SampleSet y_null = sample(base, 1000, r);
            const SlicePlan p =
                build_slice_plan(r, 300, 100, ThresholdRule::SampleQuantiles, &x, 2);
            if (hard_distance_two_sample(x, y_alt, p) > hard_distance_two_sample(x, y_null, p))
                ++wins;
        }
        REQUIRE(wins == seeds);
    }
}

TEST_CASE("smooth_distance") {
    const GaussianMixture target = standard_normal(2);
    SECTION("sample on a threshold contributes half") {
        const SampleSet s(mat({{0.0, 0.0}}));
        const SlicePlan plan =
            single_slice_plan((Eigen::VectorXd(2) << 1.0, 0.0).finished(), {0.0});
        // smooth p_samples = sigmoid(0) = 0.5 = target halfspace probability
        REQUIRE(smooth_distance(s, target, plan, {100.0, true}) ==
                Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("sigmoid margin value") {
        REQUIRE(sigmoid(5.0) == Catch::Approx(0.993307).margin(1e-6));
    }
    SECTION("smooth-hard gap bounded by accumulated indicator error") {
        RngStream rng(17);
        const SampleSet s = sample(target, 50, rng);
        const SlicePlan plan =
            build_slice_plan(rng, 5, 5, ThresholdRule::TargetPercentileGrid, &target, 2);
        const double v = 10.0;
        const double gap =
            std::abs(smooth_distance(s, target, plan, {v, true}) - hard_distance(s, target, plan));
        double bound = 0.0;
        const double coef = 1.0 / (5.0 * 5.0 * 50.0);
        for (const auto& slice : plan.slices) {
            const auto proj = project(s, slice.direction);
            for (double b : slice.thresholds)
                for (double p : proj) {
                    const double m = p - b;
                    bound += coef * std::abs(sigmoid(v * m) - (m >= 0.0 ? 1.0 : 0.0));
                }
        }
        REQUIRE(gap <= bound + 1e-12);
    }
    SECTION("sharpness monotonicity away from thresholds") {
        RngStream rng(19);
        SampleSet s = sample(target, 40, rng);
        SlicePlan plan =
            build_slice_plan(rng, 8, 6, ThresholdRule::TargetPercentileGrid, &target, 2);
        // Push every sample margin away from all thresholds by at least 0.05.
        Eigen::MatrixXd pts = s.points();
        for (Eigen::Index i = 0; i < pts.rows(); ++i)
            for (auto& slice : plan.slices)
                for (auto& b : slice.thresholds) {
                    const double m = slice.direction.coords().dot(Eigen::VectorXd(pts.row(i))) - b;
                    if (std::abs(m) < 0.05) b += (m >= 0.0 ? -0.06 : 0.06);
                }
        const SampleSet pushed(pts);
        const double hard = hard_distance(pushed, target, plan);
        // The accumulated per-term indicator error bounds the gap and is
        // monotone in the sharpness when margins stay away from zero. The
        // raw gap itself can dip non-monotonically through cancellation.
        auto term_bound = [&](double v) {
            double bound = 0.0;
            const double coef = 1.0 / (static_cast<double>(plan.count()) *
                                       static_cast<double>(plan.values_per_slice()) *
                                       static_cast<double>(pushed.size()));
            for (const auto& slice : plan.slices) {
                const auto proj = project(pushed, slice.direction);
                for (double b : slice.thresholds)
                    for (double p : proj) {
                        const double m = p - b;
                        bound += coef * std::abs(sigmoid(v * m) - (m >= 0.0 ? 1.0 : 0.0));
                    }
            }
            return bound;
        };
        double prev_bound = 1e9;
        for (double v : {1.0, 10.0, 100.0, 1000.0}) {
            const double gap = std::abs(smooth_distance(pushed, target, plan, {v, true}) - hard);
            const double bound = term_bound(v);
            REQUIRE(gap <= bound + 1e-12);
            REQUIRE(bound <= prev_bound + 1e-12);
            prev_bound = bound;
        }
        REQUIRE(prev_bound < 1e-3);
    }
}

TEST_CASE("smooth_distance_gradient") {
    const GaussianMixture target = standard_normal(2);
    SECTION("value matches smooth_distance exactly") {
        RngStream rng(23);
        const SampleSet s = sample(target, 30, rng);
        const SlicePlan plan =
            build_slice_plan(rng, 6, 4, ThresholdRule::TargetPercentileGrid, &target, 2);
        const SmoothingConfig cfg{50.0, true};
        const auto res = smooth_distance_gradient(s, target, plan, cfg);
        REQUIRE(res.value == smooth_distance(s, target, plan, cfg));
    }
    SECTION("saturated margins give a vanishing gradient") {
        const SampleSet s(mat({{10.0, 0.0}, {-10.0, 0.0}}));
        const SlicePlan plan =
            single_slice_plan((Eigen::VectorXd(2) << 1.0, 0.0).finished(), {0.0});
        const auto res = smooth_distance_gradient(s, target, plan, {100.0, true});
        REQUIRE(res.gradient.cwiseAbs().maxCoeff() < 1e-20);
    }
    SECTION("finite difference agreement") {
        RngStream rng(29);
        for (int rep = 0; rep < 5; ++rep) {
            const SampleSet s = sample(target, 20, rng);
            const SlicePlan plan =
                build_slice_plan(rng, 5, 5, ThresholdRule::TargetPercentileGrid, &target, 2);
            const SmoothingConfig cfg{10.0, true};
            const auto res = smooth_distance_gradient(s, target, plan, cfg);
            const double h = 1e-5;
            for (Eigen::Index i = 0; i < s.size(); ++i)
                for (Eigen::Index j = 0; j < s.dimension(); ++j) {
                    Eigen::MatrixXd plus = s.points(), minus = s.points();
                    plus(i, j) += h;
                    minus(i, j) -= h;
                    const double fd = (smooth_distance(SampleSet(plus), target, plan, cfg) -
                                       smooth_distance(SampleSet(minus), target, plan, cfg)) /
                                      (2.0 * h);
                    const double scale = std::max(std::abs(fd), std::abs(res.gradient(i, j)));
                    if (scale > 1e-8)
                        REQUIRE(std::abs(res.gradient(i, j) - fd) / scale < 1e-4);
                }
        }
    }
    SECTION("single sample single slice matches the hand-derived form") {
        const double x = 0.3, b = 0.1, v = 10.0;
        const SampleSet s(mat({{x, 0.0}}));
        const SlicePlan plan =
            single_slice_plan((Eigen::VectorXd(2) << 1.0, 0.0).finished(), {b});
        const auto res = smooth_distance_gradient(s, target, plan, {v, true});
        // D = |sigmoid(v(x-b)) - p_t|; dD/dx = sign(.) v s(1-s)
        const double sg = sigmoid(v * (x - b));
        const double p_t = halfspace_probability(target, plan.slices[0].direction, -b);
        const double expected = (sg > p_t ? 1.0 : -1.0) * v * sg * (1.0 - sg);
        REQUIRE(res.gradient(0, 0) == Catch::Approx(expected).margin(1e-14));
        REQUIRE(res.gradient(0, 1) == Catch::Approx(0.0).margin(1e-14));
    }
    SECTION("thread-count invariance, bit exact") {
        RngStream rng(31);
        const SampleSet s = sample(target, 100, rng);
        const SlicePlan plan =
            build_slice_plan(rng, 16, 8, ThresholdRule::TargetPercentileGrid, &target, 2);
        const auto r1 = smooth_distance_gradient(s, target, plan, {100.0, true}, 1);
        const auto r4 = smooth_distance_gradient(s, target, plan, {100.0, true}, 4);
        REQUIRE(r1.value == r4.value);
        REQUIRE(r1.gradient == r4.gradient);
    }
}
