#include "islandguard/signals.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace islandguard;

TEST_CASE("synth_balanced basic values") {
    const ThreePhase x = synth_balanced(1.0, 60.0, 0.0, 0.0);
    CHECK(x.a == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(x.b == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(x.c == doctest::Approx(-0.5).epsilon(1e-12));

    const ThreePhase z = synth_balanced(0.0, 60.0, 0.0, 0.123);
    CHECK(z.a == 0.0);
    CHECK(z.b == 0.0);
    CHECK(z.c == 0.0);

    // Quarter period puts phase a at cos(90 deg).
    const ThreePhase q = synth_balanced(1.0, 60.0, 0.0, 1.0 / 240.0);
    CHECK(std::abs(q.a) < 1e-12);
}

TEST_CASE("synth_balanced rejects bad input") {
    CHECK_THROWS_AS(synth_balanced(1.0, 0.0, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(synth_balanced(1.0, -60.0, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(synth_balanced(std::nan(""), 60.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("balanced synthesis sums to zero") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> amp(0.1, 500.0), ph(0.0, two_pi), tt(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double a = amp(rng);
        const ThreePhase x = synth_balanced(a, 60.0, ph(rng), tt(rng));
        CHECK(std::abs(x.a + x.b + x.c) < 1e-9 * a);
    }
}

TEST_CASE("park aligned frame") {
    const DqVector v = park(synth_balanced(1.0, 60.0, 0.0, 0.0), 0.0);
    CHECK(v.d == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(v.q) < 1e-9);

    const DqVector z = park(ThreePhase{0, 0, 0}, 1.234);
    CHECK(z.d == 0.0);
    CHECK(z.q == 0.0);
}

TEST_CASE("park amplitude invariance") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> amp(0.1, 700.0), ph(0.0, two_pi);
    for (int i = 0; i < 200; ++i) {
        const double a = amp(rng);
        const DqVector v = park(synth_balanced(a, 60.0, ph(rng), 0.01), ph(rng));
        CHECK(v.magnitude() == doctest::Approx(a).epsilon(1e-9));
    }
}

TEST_CASE("park frame-shift rotates by minus delta") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> amp(0.1, 100.0), ang(-10.0, 10.0);
    for (int i = 0; i < 100; ++i) {
        const ThreePhase x = synth_balanced(amp(rng), 60.0, ang(rng), 0.004);
        const double theta = ang(rng), delta = ang(rng);
        const DqVector v0 = park(x, theta);
        const DqVector v1 = park(x, theta + delta);
        const double c = std::cos(-delta), s = std::sin(-delta);
        CHECK(v1.d == doctest::Approx(c * v0.d - s * v0.q).epsilon(1e-9));
        CHECK(v1.q == doctest::Approx(s * v0.d + c * v0.q).epsilon(1e-9));
    }
}

TEST_CASE("inverse_park basic values") {
    const ThreePhase x = inverse_park(DqVector{1.0, 0.0, 0.0});
    CHECK(x.a == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(x.b == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(x.c == doctest::Approx(-0.5).epsilon(1e-12));

    const ThreePhase z = inverse_park(DqVector{0.0, 0.0, 2.72});
    CHECK(z.a == 0.0);
    CHECK(z.b == 0.0);
    CHECK(z.c == 0.0);
}

TEST_CASE("transform round trips on balanced signals") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> amp(0.01, 800.0), ang(-20.0, 20.0), tt(0.0, 0.05);
    for (int i = 0; i < 1000; ++i) {
        const double a = amp(rng);
        const ThreePhase x = synth_balanced(a, 60.0, ang(rng), tt(rng));
        const double theta = ang(rng);

        DqVector v = park(x, theta);
        v.theta = theta;
        const ThreePhase back = inverse_park(v);
        CHECK(std::abs(back.a - x.a) < 1e-9 * std::max(1.0, a));
        CHECK(std::abs(back.b - x.b) < 1e-9 * std::max(1.0, a));
        CHECK(std::abs(back.c - x.c) < 1e-9 * std::max(1.0, a));

        const DqVector w{amp(rng), amp(rng), theta};
        const DqVector again = park(inverse_park(w), theta);
        CHECK(again.d == doctest::Approx(w.d).epsilon(1e-9));
        CHECK(again.q == doctest::Approx(w.q).epsilon(1e-9));
    }
}

TEST_CASE("abc power equals dq power") {
    std::mt19937 rng(19);
    std::uniform_real_distribution<double> amp(1.0, 400.0), ang(-5.0, 5.0);
    for (int i = 0; i < 100; ++i) {
        const double t = 0.001 * i;
        const ThreePhase v = synth_balanced(amp(rng), 60.0, ang(rng), t);
        const ThreePhase c = synth_balanced(amp(rng), 60.0, ang(rng), t);
        const double theta = ang(rng);
        const double p_abc = instantaneous_power(v, c);
        const double p_dq = instantaneous_power(park(v, theta), park(c, theta));
        CHECK(p_dq == doctest::Approx(p_abc).epsilon(1e-6));
    }
}
