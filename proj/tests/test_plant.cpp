#include "islandguard/plant.hpp"
#include "islandguard/scenarios.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

using namespace islandguard;

namespace {

GridParams rated_grid() { return GridParams{480.0, 60.0, 0.012, 0.3056e-3}; }

LoadParams rated_load() { return load_from_power_spec(100e3, 1.77, 480.0, 60.0); }

/// Peak amplitude of phase a over the trailing cycle of a sampled waveform.
double trailing_peak(const std::vector<double>& samples, std::size_t per_cycle) {
    double peak = 0.0;
    for (std::size_t i = samples.size() - per_cycle; i < samples.size(); ++i)
        peak = std::max(peak, std::abs(samples[i]));
    return peak;
}

} // namespace

TEST_CASE("load parameter identities") {
    const LoadParams load = rated_load();
    CHECK(load.q_f() == doctest::Approx(load.r * std::sqrt(load.c / load.l)).epsilon(1e-6));
    CHECK(load.f_0() == doctest::Approx(1.0 / (two_pi * std::sqrt(load.l * load.c))).epsilon(1e-6));
}

TEST_CASE("zero sources zero state stays zero") {
    Plant plant(rated_grid(), rated_load(), {2.1e-3});
    plant.state() = PlantState{};
    plant.state().i_inv.resize(1);
    plant.state().breaker_closed = false; // no grid emf either
    for (int i = 0; i < 100; ++i) plant.step({ThreePhase{}}, 50e-6);
    CHECK(plant.state().v_pcc.a == 0.0);
    CHECK(plant.state().i_load_l.a == 0.0);
    CHECK(plant.state().i_inv[0].a == 0.0);
}

TEST_CASE("step rejects bad dt and diverged state") {
    Plant plant(rated_grid(), rated_load(), {});
    CHECK_THROWS_AS(plant.step({}, 5e-7), std::invalid_argument);
    CHECK_THROWS_AS(plant.step({}, 3e-4), std::invalid_argument);

    plant.state().v_pcc.a = std::nan("");
    CHECK_THROWS_AS(plant.step({}, 50e-6), std::runtime_error);
}

TEST_CASE("parameter validation") {
    GridParams grid = rated_grid();
    grid.f_g = 25.0;
    CHECK_THROWS_AS(grid.validate(), std::invalid_argument);
    grid = rated_grid();
    grid.r_g = 0.0;
    CHECK_THROWS_AS(grid.validate(), std::invalid_argument);

    LoadParams load = rated_load();
    load.c = -1e-6;
    CHECK_THROWS_AS(load.validate(), std::invalid_argument);
}

TEST_CASE("islanded ringdown matches the analytic RLC transient") {
    // Charged capacitor discharging into the parallel RLC with no sources.
    // With v(0) = V0 and i_L(0) = 0 the node equation gives v'(0) = -2a V0:
    //   v(t) = V0 e^{-at} (cos wd t - a/wd sin wd t),  a = 1/(2RC)
    const LoadParams load = rated_load();
    Plant plant(rated_grid(), load, {});
    plant.apply_event({PlantEvent::Kind::island, {}});

    const double v0 = 391.9;
    plant.state().v_pcc = {v0, v0, v0}; // phases independent; same transient
    plant.state().i_load_l = {};

    const double a = 1.0 / (2.0 * load.r * load.c);
    const double w0 = two_pi * load.f_0();
    const double wd = std::sqrt(w0 * w0 - a * a);
    const double dt = 20e-6;

    double t = 0.0;
    for (int i = 0; i < 5000; ++i) { // 0.1 s
        plant.step({}, dt);
        t += dt;
        const double expect = v0 * std::exp(-a * t) * (std::cos(wd * t) - a / wd * std::sin(wd * t));
        // Compare against the decaying envelope within 2 percent.
        const double envelope = v0 * std::exp(-a * t) * std::sqrt(1.0 + (a / wd) * (a / wd));
        CHECK(std::abs(plant.state().v_pcc.a - expect) < 0.02 * envelope + 1e-9);
    }
}

TEST_CASE("energy accounting over one second") {
    // Grid driving the load from a zero initial state; every joule from the
    // source must show up as dissipation or stored field energy.
    Plant plant(rated_grid(), rated_load(), {});
    const double dt = 50e-6;
    const double e0 = plant.stored_energy();

    double e_source = 0.0, e_diss = 0.0;
    double p_diss_prev = plant.dissipated_power();
    for (int i = 0; i < 20000; ++i) { // 1 s
        const double p_src_a =
            instantaneous_power(plant.grid_emf(plant.state().t), plant.state().i_grid);
        plant.step({}, dt);
        const double p_src_b =
            instantaneous_power(plant.grid_emf(plant.state().t), plant.state().i_grid);
        const double p_diss_b = plant.dissipated_power();
        e_source += 0.5 * (p_src_a + p_src_b) * dt;
        e_diss += 0.5 * (p_diss_prev + p_diss_b) * dt;
        p_diss_prev = p_diss_b;
    }
    const double e_stored = plant.stored_energy() - e0;
    const double residual = std::abs(e_source - e_diss - e_stored);
    CHECK(residual < 0.005 * std::abs(e_source));
}

TEST_CASE("KCL residual at the PCC is numerically zero") {
    Plant plant(rated_grid(), rated_load(), {2.1e-3});
    const auto init = init_steady_state(rated_grid(), rated_load(), {2.1e-3}, {100e3});
    plant.state() = init.state;

    const double dt = 50e-6;
    const double i_rated = 2.0 * 100e3 / (3.0 * rated_grid().phase_peak());
    const std::vector<ThreePhase> v_inv = {
        synth_balanced(std::abs(init.v_inv[0]), 60.0, std::arg(init.v_inv[0]), 0.0)};
    for (int i = 0; i < 2000; ++i) {
        const PlantState prev = plant.state();
        const std::vector<ThreePhase> v = {
            synth_balanced(std::abs(init.v_inv[0]), 60.0, std::arg(init.v_inv[0]), prev.t)};
        plant.step(v, dt);
        CHECK(plant.kcl_residual(prev, plant.state(), v, dt, i_rated) < 1e-6);
    }
}

TEST_CASE("steady-state init hits rated voltage and power balance") {
    const GridParams grid = rated_grid();
    const LoadParams load = rated_load();

    SUBCASE("Table-I parameters give rated PCC voltage") {
        const auto init = init_steady_state(grid, load, {2.1e-3}, {100e3});
        CHECK(init.v_pcc_peak == doctest::Approx(480.0 * std::sqrt(2.0 / 3.0)).epsilon(0.01));
    }

    SUBCASE("zero DG power leaves the grid supplying the load") {
        const auto init = init_steady_state(grid, load, {2.1e-3}, {0.0});
        CHECK(std::abs(init.state.i_inv[0].a) < 1e-9);
        const double i_load_amp = init.v_pcc_peak / load.r;
        const double ig_amp = std::hypot(init.state.i_grid.a,
                                         (init.state.i_grid.b - init.state.i_grid.c) / std::sqrt(3.0));
        CHECK(ig_amp > 0.9 * i_load_amp);
    }

    SUBCASE("matched DG exports almost nothing to the grid") {
        const auto init = init_steady_state(grid, load, {2.1e-3}, {100e3});
        const double i_load_amp = init.v_pcc_peak / load.r;
        const double ig_amp = std::hypot(init.state.i_grid.a,
                                         (init.state.i_grid.b - init.state.i_grid.c) / std::sqrt(3.0));
        CHECK(ig_amp < 0.02 * i_load_amp);
    }

    SUBCASE("held at the phasor solution the plant stays put") {
        const auto init = init_steady_state(grid, load, {2.1e-3}, {100e3});
        Plant plant(grid, load, {2.1e-3});
        plant.state() = init.state;
        const double dt = 50e-6;
        std::vector<double> va;
        for (int i = 0; i < 20000; ++i) { // 1 s with the inverter emf held
            const std::vector<ThreePhase> v = {
                synth_balanced(std::abs(init.v_inv[0]), 60.0, std::arg(init.v_inv[0]),
                               plant.state().t)};
            plant.step(v, dt);
            va.push_back(plant.state().v_pcc.a);
        }
        const double peak = trailing_peak(va, 334);
        CHECK(peak == doctest::Approx(init.v_pcc_peak).epsilon(0.01));
    }
}

TEST_CASE("event errors") {
    Plant plant(rated_grid(), rated_load(), {});
    plant.apply_event({PlantEvent::Kind::island, {}});
    CHECK_THROWS_AS(plant.apply_event({PlantEvent::Kind::island, {}}), std::logic_error);
    CHECK_THROWS_AS(plant.apply_event({PlantEvent::Kind::disconnect_load, {}}), std::logic_error);
}

TEST_CASE("connecting a unity-pf load sags the PCC per the phasor divider") {
    using cplx = std::complex<double>;
    const GridParams grid = rated_grid();
    const LoadParams load = rated_load();

    Plant plant(grid, load, {});
    const auto init = init_steady_state(grid, load, {}, {});
    plant.state() = init.state;

    const double dt = 50e-6;
    for (int i = 0; i < 4000; ++i) plant.step({}, dt); // settle 0.2 s

    const AuxLoadParams aux = AuxLoadParams::from_power(100e3, 1.0, grid.v_ll, grid.f_g);
    CHECK(1.0 / aux.g == doctest::Approx(2.304).epsilon(1e-3));
    plant.apply_event({PlantEvent::Kind::connect_load, aux});

    std::vector<double> va;
    for (int i = 0; i < 8000; ++i) { // 0.4 s
        plant.step({}, dt);
        va.push_back(plant.state().v_pcc.a);
    }

    const double w = two_pi * grid.f_g;
    const cplx z_g(grid.r_g, w * grid.l_g);
    const cplx y_load = cplx(1.0 / load.r, 0.0) + 1.0 / cplx(0.0, w * load.l) + cplx(0.0, w * load.c);
    const cplx v_expect = cplx(grid.phase_peak(), 0.0) / z_g / (y_load + aux.g + 1.0 / z_g);

    const double peak = trailing_peak(va, 334);
    CHECK(peak == doctest::Approx(std::abs(v_expect)).epsilon(0.01));
}

TEST_CASE("halving dt changes the trajectory by less than 0.1 percent") {
    const GridParams grid = rated_grid();
    const LoadParams load = rated_load();

    auto run = [&](double dt) {
        Plant plant(grid, load, {});
        // Start mildly off-equilibrium so there is a transient to resolve.
        plant.state().v_pcc = {100.0, -50.0, -50.0};
        const long steps = std::lround(0.5 / dt);
        for (long i = 0; i < steps; ++i) plant.step({}, dt);
        return plant.state().v_pcc.a;
    };

    const double coarse = run(50e-6);
    const double fine = run(25e-6);
    CHECK(std::abs(coarse - fine) < 1e-3 * grid.phase_peak());
}
