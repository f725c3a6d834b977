#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "piml/autodiff.hpp"

using namespace piml;

TEST_CASE("product rule on x*y") {
    Tape t;
    auto x = t.param();
    auto y = t.param();
    auto root = t.mul(x, y);
    auto r = t.evaluate_with_gradients(root, {3.0, 4.0});
    CHECK(r.value == doctest::Approx(12.0));
    CHECK(r.gradients[0] == doctest::Approx(4.0));
    CHECK(r.gradients[1] == doctest::Approx(3.0));
}

TEST_CASE("tanh at the origin") {
    Tape t;
    auto x = t.param();
    auto root = t.tanh(x);
    auto r = t.evaluate_with_gradients(root, {0.0});
    CHECK(r.value == doctest::Approx(0.0));
    CHECK(r.gradients[0] == doctest::Approx(1.0));
}

TEST_CASE("saturating-exponential hardening expression matches finite differences") {
    // sigma = sigma_y + a * (1 - exp(-b * (eps - eps_y))), summed at two strains
    Tape t;
    auto a = t.param();
    auto b = t.param();
    auto sigma_y = t.constant(30.0);
    auto eps_y = t.constant(0.02);
    auto one = t.constant(1.0);
    Tape::NodeId total = t.constant(0.0);
    for (double eps : {0.025, 0.05}) {
        auto de = t.sub(t.input(eps), eps_y);
        auto decay = t.exp(t.neg(t.mul(b, de)));
        auto sigma = t.add(sigma_y, t.mul(a, t.sub(one, decay)));
        total = t.add(total, sigma);
    }
    std::vector<double> bindings{10.0, 100.0};
    CHECK(grad_check(t, total, bindings, 1e-5) < 1e-6);

    // Frozen forward value: 30 + 10*(1-e^{-0.5}) + 30 + 10*(1-e^{-3}).
    double expect = 60.0 + 10.0 * (1.0 - std::exp(-0.5)) + 10.0 * (1.0 - std::exp(-3.0));
    CHECK(t.evaluate(total, bindings) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("central differences are exact for linear graphs") {
    Tape t;
    auto x = t.param();
    auto y = t.param();
    auto root = t.add(t.mul(t.constant(3.0), x), t.mul(t.constant(-2.0), y));
    CHECK(grad_check(t, root, {0.7, -1.3}, 1e-3) <= 1e-12);
}

TEST_CASE("every primitive survives a finite-difference check") {
    Tape t;
    std::vector<Tape::NodeId> p;
    for (int i = 0; i < 6; ++i) p.push_back(t.param());
    // Compose all op kinds; keep pow base and ln argument positive.
    auto safe = t.softplus(p[0]);                       // > 0
    auto powed = t.pow(safe, p[1]);                     // learnable exponent
    auto logd = t.ln(t.add(safe, t.constant(0.5)));
    auto ratio = t.div(p[2], t.add(t.square(p[3]), t.constant(1.0)));
    auto waves = t.add(t.tanh(p[4]), t.logistic(p[5]));
    auto root = t.add(t.add(powed, logd), t.sub(ratio, t.neg(waves)));
    std::vector<double> bindings{0.3, 1.7, -0.9, 0.4, 0.2, -1.1};
    CHECK(grad_check(t, root, bindings, 1e-5) < 1e-7);
}

TEST_CASE("parameters not reachable from the root get zero gradient") {
    Tape t;
    auto x = t.param();
    auto orphan = t.param();
    (void)orphan;
    auto root = t.square(x);
    auto r = t.evaluate_with_gradients(root, {3.0, 5.0});
    CHECK(r.gradients.size() == 2);
    CHECK(r.gradients[0] == doctest::Approx(6.0));
    CHECK(r.gradients[1] == 0.0);
}

TEST_CASE("shared subexpressions accumulate adjoints") {
    Tape t;
    auto x = t.param();
    auto root = t.mul(x, x);  // same operand twice
    auto r = t.evaluate_with_gradients(root, {5.0});
    CHECK(r.gradients[0] == doctest::Approx(10.0));
}

TEST_CASE("evaluation errors are loud and name the failure") {
    Tape t;
    auto x = t.param();
    auto root = t.ln(x);
    CHECK_THROWS_AS(t.evaluate(root, {-1.0}), NumericError);
    CHECK_THROWS_AS(t.evaluate(root, {}), DataError);  // unbound parameter

    Tape t2;
    auto base = t2.param();
    auto e = t2.param();
    auto powed = t2.pow(base, e);
    CHECK_THROWS_AS(t2.evaluate(powed, {-2.0, 0.5}), NumericError);
}

TEST_CASE("evaluation is deterministic and the tape is reusable after clear") {
    Tape t;
    auto x = t.param();
    auto root = t.exp(t.mul(x, t.constant(0.25)));
    double v1 = t.evaluate(root, {1.3});
    double v2 = t.evaluate(root, {1.3});
    CHECK(std::memcmp(&v1, &v2, sizeof v1) == 0);

    t.clear();
    CHECK(t.size() == 0);
    CHECK(t.num_params() == 0);
    auto y = t.param();
    auto root2 = t.add(y, t.constant(1.0));
    CHECK(t.evaluate(root2, {41.0}) == doctest::Approx(42.0));
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
    std::vector<double> params{1.0, -2.0};
    OptimizerState st;
    adam_step(params, {0.0, 0.0}, st);
    CHECK(st.step == 1);
    CHECK(params[0] == doctest::Approx(1.0));
    CHECK(params[1] == doctest::Approx(-2.0));
}

TEST_CASE("adam: first step is -lr * g / (|g| + eps) after bias correction") {
    std::vector<double> params{0.0};
    OptimizerState st;
    st.learning_rate = 0.01;
    adam_step(params, {0.5}, st);
    double expected = -0.01 * 0.5 / (0.5 + 1e-8);
    CHECK(params[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("adam: repeated identical gradients never grow the step size") {
    std::vector<double> params{0.0};
    OptimizerState st;
    double prev = params[0];
    double prev_step = 1e9;
    for (int i = 0; i < 5; ++i) {
        adam_step(params, {0.3}, st);
        double step = std::fabs(params[0] - prev);
        CHECK(step <= prev_step + 1e-12);
        prev_step = step;
        prev = params[0];
    }
}

TEST_CASE("adam rejects non-finite gradients") {
    std::vector<double> params{0.0};
    OptimizerState st;
    CHECK_THROWS_AS(adam_step(params, {std::nan("")}, st), NumericError);
}
