#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "slicedist/optimizers.hpp"

using namespace slicedist;

TEST_CASE("gd_step") {
    const Eigen::VectorXd params = Eigen::VectorXd::Ones(3);
    SECTION("zero gradient leaves parameters") {
        REQUIRE(gd_step(params, Eigen::VectorXd::Zero(3), 0.1) == params);
    }
    SECTION("arithmetic") {
        Eigen::VectorXd g = Eigen::VectorXd::Constant(3, 2.0);
        const Eigen::VectorXd next = gd_step(params, g, 0.1);
        REQUIRE(next[0] == Catch::Approx(0.8));
    }
    SECTION("two steps equal one step with summed scaled gradients") {
        Eigen::VectorXd g(3);
        g << 1.0, -2.0, 0.5;
        const Eigen::VectorXd twice = gd_step(gd_step(params, g, 0.1), g, 0.1);
        const Eigen::VectorXd once = gd_step(params, Eigen::VectorXd(2.0 * g), 0.1);
        REQUIRE((twice - once).cwiseAbs().maxCoeff() < 1e-15);
    }
    SECTION("shape mismatch") {
        REQUIRE_THROWS_AS(gd_step(params, Eigen::VectorXd::Zero(2), 0.1),
                          std::invalid_argument);
    }
}

TEST_CASE("adamw_step") {
    SECTION("first step with unit gradient moves by about rho") {
        AdamW opt(1, {.rho = 0.1});
        const Eigen::VectorXd next =
            opt.step(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1));
        // bias correction makes m_hat = v_hat = 1, so the update is
        // -rho / (1 + eps) up to epsilon
        REQUIRE(next[0] == Catch::Approx(-0.1).margin(1e-7));
    }
    SECTION("zero gradients and no decay keep parameters") {
        AdamW opt(2, {.rho = 0.1});
        Eigen::VectorXd p(2);
        p << 3.0, -1.0;
        for (int i = 0; i < 10; ++i) p = opt.step(p, Eigen::VectorXd::Zero(2));
        REQUIRE(p[0] == 3.0);
        REQUIRE(p[1] == -1.0);
    }
    SECTION("pure decay with zero gradients") {
        const double rho = 0.1, lambda = 0.5;
        AdamW opt(1, {.rho = rho, .weight_decay = lambda});
        Eigen::VectorXd p = Eigen::VectorXd::Ones(1);
        double expected = 1.0;
        for (int i = 0; i < 5; ++i) {
            p = opt.step(p, Eigen::VectorXd::Zero(1));
            expected *= 1.0 - rho * lambda;
            REQUIRE(p[0] == Catch::Approx(expected).margin(1e-12));
        }
    }
    SECTION("first step magnitude bound") {
        AdamW opt(3, {.rho = 0.05, .weight_decay = 0.1});
        Eigen::VectorXd p(3);
        p << 2.0, -3.0, 0.5;
        Eigen::VectorXd g(3);
        g << 10.0, -0.001, 4.0;
        const Eigen::VectorXd next = opt.step(p, g);
        const double bound = 0.05 * (1.0 + 0.1 * p.cwiseAbs().maxCoeff());
        REQUIRE((next - p).cwiseAbs().maxCoeff() <= bound + 1e-12);
    }
    SECTION("deterministic given state and gradients") {
        AdamW a(2, {.rho = 0.01}), b(2, {.rho = 0.01});
        Eigen::VectorXd pa = Eigen::VectorXd::Ones(2), pb = Eigen::VectorXd::Ones(2);
        Eigen::VectorXd g(2);
        g << 0.3, -0.7;
        for (int i = 0; i < 20; ++i) {
            pa = a.step(pa, g);
            pb = b.step(pb, g);
        }
        REQUIRE(pa == pb);
    }
}
