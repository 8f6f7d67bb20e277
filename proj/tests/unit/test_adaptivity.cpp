#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "sdtf/adaptivity.hpp"
#include "sdtf/mms.hpp"

using namespace sdtf;

namespace {

Vector scalar(double v) {
    Vector x(1);
    x[0] = v;
    return x;
}

StepHistory polynomial_history(const std::function<double(double)>& f, double k, int n) {
    StepHistory h(8);
    for (int i = 0; i < n; ++i) h.push(-k * (n - 1 - i), scalar(f(-k * (n - 1 - i))));
    return h;
}

}  // namespace

TEST_CASE("estimators vanish on identical states and on cubic data") {
    ScalarOde ode(-1.0);
    const auto constant = polynomial_history([](double) { return 0.7; }, 0.05, 4);
    const auto est = error_estimators(ode, scalar(0.7), 0.05, constant, 3);
    CHECK(est[0] == doctest::Approx(0.0));

    auto cubic = [](double t) { return 1.0 + t + t * t + t * t * t; };
    const auto hist = polynomial_history(cubic, 0.05, 4);
    const auto est_cubic = error_estimators(ode, scalar(cubic(0.05)), 0.05, hist, 3);
    CHECK(est_cubic[0] < 1e-12);
}

TEST_CASE("estimator of quartic data reproduces the eta scale") {
    // rho^4 of t^4 is exactly 1, so the unnormalized estimator is eta^4 =
    // 72 k^4 / 25; values stay below 1 so the relative norm changes nothing.
    ScalarOde ode(-1.0);
    const double k = 0.1;
    auto quartic = [](double t) { return t * t * t * t; };
    const auto hist = polynomial_history(quartic, k, 4);
    const auto est = error_estimators(ode, scalar(quartic(k)), k, hist, 3);
    CHECK(est[0] == doctest::Approx(72.0 * std::pow(k, 4) / 25.0).epsilon(1e-12));
}

TEST_CASE("controller branches follow the printed rules") {
    AdaptiveConfig config;
    config.k_max = 10.0;
    config.k_min = 1e-10;
    const double eps = 1e-3;

    SUBCASE("zero estimators grow at the cap") {
        const auto d = controller_decide(0.0, 0.0, eps, 0.1, config);
        CHECK(d.accepted);
        CHECK(d.theta == doctest::Approx(2.0));
        CHECK(d.k_next == doctest::Approx(0.2));
    }
    SUBCASE("estimators exactly at eps hold the step") {
        const auto d = controller_decide(eps, eps, eps, 0.1, config);
        CHECK(d.accepted);
        CHECK(d.theta == doctest::Approx(1.0));
        CHECK(d.k_next == doctest::Approx(0.1));
    }
    SUBCASE("either estimator above eps rejects and halves") {
        const auto d = controller_decide(2.0 * eps, 0.1 * eps, eps, 0.1, config);
        CHECK(!d.accepted);
        CHECK(d.k_next == doctest::Approx(0.05));
    }
    SUBCASE("mixed branch (min below eps/4, max above) holds conservatively") {
        const auto d = controller_decide(0.5 * eps, 0.1 * eps, eps, 0.1, config);
        CHECK(d.accepted);
        CHECK(d.theta <= 1.0 + 1e-14);
    }
    SUBCASE("clamps apply: k_max, tau cap, negative estimators rejected") {
        AdaptiveConfig capped = config;
        capped.k_max = 0.15;
        CHECK(controller_decide(0.0, 0.0, eps, 0.1, capped).k_next == doctest::Approx(0.15));
        capped.k_max = 10.0;
        capped.tau_cap = 1.0315;
        CHECK(controller_decide(0.0, 0.0, eps, 0.1, capped).k_next ==
              doctest::Approx(0.10315));
        CHECK_THROWS_AS(controller_decide(-1.0, 0.0, eps, 0.1, config), std::invalid_argument);
    }
}

TEST_CASE("growth stays below the safety cap and rejections contract") {
    AdaptiveConfig config;
    config.k_max = 100.0;
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> dist(0.0, 2e-3);
    for (int round = 0; round < 300; ++round) {
        const double eu = dist(rng);
        const double ep = dist(rng);
        const auto d = controller_decide(eu, ep, 1e-3, 0.2, config);
        if (d.accepted) {
            CHECK(d.k_next <= config.gamma_hat * 2.0 * 0.2 + 1e-15);
        } else {
            CHECK(d.k_next < 0.2);
        }
    }
}

TEST_CASE("adaptive driver accepts every step of a cubic problem and grows to the cap") {
    auto dq = [](double t) { return 3.0 * t * t - 2.0 * t; };
    auto q = [](double t) { return t * t * t - t * t + 0.5; };
    ScalarOde ode(0.0, dq);
    StepHistory seed(8);
    const double k0 = 0.01;
    for (int i = 0; i < 3; ++i) seed.push(k0 * i, scalar(q(k0 * i)));

    AdaptiveConfig config;
    config.eps = 1e-6;
    config.k_max = 0.25;
    const auto result = integrate_adaptive(ode, SchemeKind::bdf2_tf, config, 4.0, k0, seed);
    CHECK(result.n_rejected == 0);
    double max_k = 0.0;
    for (const auto& row : result.step_log) max_k = std::max(max_k, row.k);
    CHECK(max_k == doctest::Approx(config.k_max).epsilon(1e-12));
    CHECK(result.trajectory.back().t == doctest::Approx(4.0).epsilon(1e-12));
    // Estimator annihilates cubics, so the filtered solution tracks exactly.
    CHECK(result.trajectory.back().state[0] == doctest::Approx(q(4.0)).epsilon(1e-7));
}

TEST_CASE("accepted steps respect the tolerance on a stiff-forcing problem") {
    auto forcing = [](double t) { return std::sin(25.0 * t) * 20.0; };
    ScalarOde ode(-2.0, forcing);
    StepHistory seed(8);
    const double k0 = 0.01;
    for (int i = 0; i < 3; ++i) seed.push(k0 * i, scalar(1.0));

    AdaptiveConfig config;
    config.eps = 1e-5;
    config.k_max = 0.2;
    const auto result = integrate_adaptive(ode, SchemeKind::bdf2_tf, config, 2.0, k0, seed);
    for (const auto& row : result.step_log) {
        if (row.status == StepStatus::accepted) {
            CHECK(std::max(row.est_u, row.est_phi) <= config.eps * (1.0 + 1e-12));
        }
    }
    CHECK(result.n_accepted > 0);
    CHECK(result.trajectory.back().t == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("adaptive BDF3 honors the tolerance too") {
    auto forcing = [](double t) { return std::sin(25.0 * t) * 20.0; };
    ScalarOde ode(-2.0, forcing);
    StepHistory seed(8);
    for (int i = 0; i < 3; ++i) seed.push(0.01 * i, scalar(1.0));
    AdaptiveConfig config;
    config.eps = 1e-5;
    config.k_max = 0.2;
    const auto result = integrate_adaptive(ode, SchemeKind::bdf3, config, 2.0, 0.01, seed);
    for (const auto& row : result.step_log) {
        if (row.status == StepStatus::accepted) {
            CHECK(std::max(row.est_u, row.est_phi) <= config.eps * (1.0 + 1e-12));
        }
    }
    CHECK(result.trajectory.back().t == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("identical inputs give identical step sequences") {
    auto forcing = [](double t) { return std::cos(7.0 * t); };
    auto run = [&]() {
        ScalarOde ode(-1.0, forcing);
        StepHistory seed(8);
        for (int i = 0; i < 3; ++i) seed.push(0.02 * i, scalar(1.0 + 0.1 * i));
        AdaptiveConfig config;
        config.eps = 1e-6;
        config.k_max = 0.3;
        return integrate_adaptive(ode, SchemeKind::bdf2_tf, config, 1.5, 0.02, seed);
    };
    const auto a = run();
    const auto b = run();
    REQUIRE(a.step_log.size() == b.step_log.size());
    for (std::size_t i = 0; i < a.step_log.size(); ++i) {
        CHECK(a.step_log[i].k == b.step_log[i].k);          // bit-identical
        CHECK(a.step_log[i].est_u == b.step_log[i].est_u);  // bit-identical
        CHECK(a.step_log[i].status == b.step_log[i].status);
    }
}

TEST_CASE("warmup rows appear until the estimator has enough nodes") {
    ScalarOde ode(-1.0);
    StepHistory seed(8);
    for (int i = 0; i < 3; ++i) seed.push(0.05 * i, scalar(std::exp(-0.05 * i)));
    AdaptiveConfig config;
    config.eps = 1e-4;
    const auto result = integrate_adaptive(ode, SchemeKind::bdf2_tf, config, 1.0, 0.05, seed);
    REQUIRE(!result.step_log.empty());
    CHECK(result.step_log.front().status == StepStatus::warmup);
    CHECK(result.n_warmup == 1);  // one missing node for the 5-node estimator

    // Plain BDF2 uses the 4-node estimator, so no warmup is needed.
    ScalarOde ode2(-1.0);
    const auto result2 = integrate_adaptive(ode2, SchemeKind::bdf2, config, 1.0, 0.05, seed);
    CHECK(result2.n_warmup == 0);
}

TEST_CASE("a tight seed ring buffer is widened, not wedged in warmup") {
    ScalarOde ode(-1.0);
    StepHistory seed(3);  // smaller than the estimator's node count
    for (int i = 0; i < 3; ++i) seed.push(0.05 * i, scalar(std::exp(-0.05 * i)));
    AdaptiveConfig config;
    config.eps = 1e-4;
    const auto result = integrate_adaptive(ode, SchemeKind::bdf2_tf, config, 1.0, 0.05, seed);
    CHECK(result.n_warmup == 1);
    CHECK(result.trajectory.back().t == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("impossible tolerances abort instead of looping") {
    auto forcing = [](double t) { return std::sin(40.0 * t); };
    ScalarOde ode(-1.0, forcing);
    StepHistory seed(8);
    for (int i = 0; i < 3; ++i) seed.push(0.05 * i, scalar(1.0));
    AdaptiveConfig config;
    config.eps = 1e-300;
    config.k_min = 1e-3;
    CHECK_THROWS_AS(integrate_adaptive(ode, SchemeKind::bdf2_tf, config, 1.0, 0.05, seed),
                    std::runtime_error);
}

TEST_CASE("adaptive rejects the constant-step filtered BDF3 scheme") {
    ScalarOde ode(-1.0);
    StepHistory seed(8);
    for (int i = 0; i < 4; ++i) seed.push(0.05 * i, scalar(1.0));
    AdaptiveConfig config;
    CHECK_THROWS_AS(integrate_adaptive(ode, SchemeKind::bdf3_tf_const, config, 1.0, 0.05, seed),
                    std::invalid_argument);
}
