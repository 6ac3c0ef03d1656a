#include <doctest.h>

#include <cmath>
#include <vector>

#include "ctsim/analytic_model.hpp"
#include "ctsim/experiment.hpp"
#include "ctsim/propagator.hpp"
#include "oracles.hpp"

using namespace ctsim;

namespace {

// Smallest absolute difference between two angles modulo 2 pi.
double wrapped_gap(double a, double b) {
    double d = std::fmod(a - b, two_pi);
    if (d < 0.0) d += two_pi;
    return std::min(d, two_pi - d);
}

}  // namespace

TEST_CASE("ee expectation reads the doublet coherence") {
    const LevelGraph g = default_experiment().graph;
    const auto n = static_cast<Eigen::Index>(g.levels.size());
    const int ip = g.require_index({{1, 0, 1}, Parity::plus});
    const int im = g.require_index({{1, 0, 1}, Parity::minus});

    QuantumState s;
    s.rho = Eigen::MatrixXcd::Zero(n, n);

    SUBCASE("handed superposition scores +1") {
        s.rho(ip, ip) = s.rho(im, im) = 0.5;
        s.rho(ip, im) = s.rho(im, ip) = 0.5;
        CHECK(ee_expectation(s, g) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("parity eigenstate scores 0") {
        s.rho(ip, ip) = 1.0;
        CHECK(ee_expectation(s, g) == 0.0);
    }
    SUBCASE("quadrature coherence scores 0") {
        s.rho(ip, ip) = s.rho(im, im) = 0.5;
        s.rho(ip, im) = cplx(0.0, 0.5);
        s.rho(im, ip) = cplx(0.0, -0.5);
        CHECK(ee_expectation(s, g) == 0.0);
    }
    SUBCASE("missing doublet and bad dimensions are refused") {
        EeObservable obs;
        obs.doublet = {9, 9, 9};
        CHECK_THROWS_WITH_AS(ee_expectation(s, g, obs),
                             doctest::Contains("missing a parity partner"), Error);
        QuantumState tiny;
        tiny.rho = Eigen::MatrixXcd::Zero(2, 2);
        CHECK_THROWS_WITH_AS(ee_expectation(tiny, g),
                             doctest::Contains("does not match the level graph"), Error);
    }
}

TEST_CASE("closed-form ee hits its pinned values") {
    AnalyticEeParams p;
    p.rabi_areas = {0.5 * pi, pi, pi};
    p.phases = {0.0, 0.0, 0.0};
    p.accumulated_phase = 0.0;
    p.tunneling_frequency_mhz = 0.82;

    // Full prefactor 1; a quarter period in, the sine is 1 and ee is -1.
    const double quarter = 0.25 / p.tunneling_frequency_mhz;
    CHECK(analytic_ee(p, quarter) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(analytic_ee(p, 0.0) == doctest::Approx(0.0).epsilon(1e-12));

    // A 2 pi second pulse kills the transfer entirely.
    AnalyticEeParams dead = p;
    dead.rabi_areas[1] = 2.0 * pi;
    for (double t : {0.0, 0.3, 0.7, 1.1}) CHECK(std::abs(analytic_ee(dead, t)) < 1e-12);

    CHECK_THROWS_WITH_AS(analytic_ee(AnalyticEeParams{.tunneling_frequency_mhz = 0.0}, 0.0),
                         doctest::Contains("positive tunneling frequency"), Error);
}

TEST_CASE("closed-form ee is periodic and flips at half period") {
    AnalyticEeParams p;
    p.phases = {0.4, 1.3, 2.9};
    p.accumulated_phase = 0.77;
    p.tunneling_frequency_mhz = 0.82;
    const double period = 1.0 / p.tunneling_frequency_mhz;
    for (double t : {0.05, 0.31, 0.92, 1.4}) {
        CHECK(analytic_ee(p, t + period) == doctest::Approx(analytic_ee(p, t)).epsilon(1e-12));
        CHECK(analytic_ee(p, t + 0.5 * period) ==
              doctest::Approx(-analytic_ee(p, t)).epsilon(1e-12));
    }
}

TEST_CASE("closed-form amplitude is odd in each pulse area factor") {
    AnalyticEeParams p;
    p.rabi_areas = {0.7, 1.9, 1.1};
    p.accumulated_phase = 0.3;
    const double t = 0.37;
    const double base = analytic_ee(p, t);
    CHECK(base != 0.0);

    for (int k = 0; k < 3; ++k) {
        AnalyticEeParams q = p;
        q.rabi_areas[k] = -q.rabi_areas[k];
        CHECK(analytic_ee(q, t) == doctest::Approx(-base).epsilon(1e-12));
    }
}

TEST_CASE("advancing the second carrier phase is a time shift") {
    AnalyticEeParams p;
    p.rabi_areas = {0.5 * pi, pi, 0.5 * pi};
    p.accumulated_phase = 1.1;
    p.tunneling_frequency_mhz = 0.82;
    const double delta = 0.83;
    AnalyticEeParams q = p;
    q.phases[1] += delta;
    const double shift = delta / (two_pi * p.tunneling_frequency_mhz);
    for (double t : {0.1, 0.52, 1.07})
        CHECK(analytic_ee(q, t) == doctest::Approx(analytic_ee(p, t - shift)).epsilon(1e-12));
}

TEST_CASE("accumulated-phase fit inverts the closed form") {
    AnalyticEeParams p;
    p.rabi_areas = {0.5 * pi, pi, 0.5 * pi};
    p.phases = {0.3, 1.1, 5.9};
    p.accumulated_phase = 1.0;
    p.tunneling_frequency_mhz = 0.82;

    std::vector<double> times, values;
    for (int i = 0; i < 40; ++i) {
        const double t = 3.0 + 0.08 * i;  // 3.12 us span, over two periods
        times.push_back(t);
        values.push_back(analytic_ee(p, t));
    }
    const PhaseFitReport r = fit_accumulated_phase(p, times, values);
    CHECK(wrapped_gap(r.accumulated_phase, 1.0) < 1e-6);
    CHECK(r.amplitude_scale == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.rms_residual < 1e-9);
    CHECK(r.n_samples == 40);

    // The fit result lands in [0, 2 pi) even for a phase wrapped on input.
    AnalyticEeParams w = p;
    w.accumulated_phase = 1.0 - 2.0 * two_pi;
    std::vector<double> wrapped;
    for (double t : times) wrapped.push_back(analytic_ee(w, t));
    const PhaseFitReport rw = fit_accumulated_phase(w, times, wrapped);
    CHECK(rw.accumulated_phase == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("accumulated-phase fit rejects unusable traces") {
    AnalyticEeParams p;
    p.tunneling_frequency_mhz = 0.82;
    const double period = 1.0 / p.tunneling_frequency_mhz;

    std::vector<double> times, values;
    for (int i = 0; i < 20; ++i) {
        times.push_back(0.1 * i);
        values.push_back(analytic_ee(p, 0.1 * i));
    }

    CHECK_THROWS_WITH_AS(fit_accumulated_phase(p, {0.0, 1.0}, {0.1, 0.2}),
                         doctest::Contains("at least 8 samples"), Error);
    CHECK_THROWS_WITH_AS(
        fit_accumulated_phase(p, std::vector<double>(times.begin(), times.begin() + 19),
                              values),
        doctest::Contains("matching time and value arrays"), Error);

    std::vector<double> short_times, short_values;
    for (int i = 0; i < 10; ++i) {
        short_times.push_back(0.05 * i);  // 0.45 us < 1.22 us period
        short_values.push_back(analytic_ee(p, 0.05 * i));
    }
    CHECK_THROWS_WITH_AS(fit_accumulated_phase(p, short_times, short_values),
                         doctest::Contains("spanning a full tunneling period"), Error);

    CHECK_THROWS_WITH_AS(fit_accumulated_phase(p, times, std::vector<double>(20, 0.25)),
                         doctest::Contains("flat trace"), Error);

    AnalyticEeParams dead = p;
    dead.rabi_areas[1] = 2.0 * pi;
    CHECK_THROWS_WITH_AS(fit_accumulated_phase(dead, times, values),
                         doctest::Contains("amplitude vanishes"), Error);

    // Samples spaced exactly one period apart collapse the fit basis.
    std::vector<double> aliased_times, ramp;
    for (int i = 0; i < 9; ++i) {
        aliased_times.push_back(period * i);
        ramp.push_back(0.1 * i);
    }
    CHECK_THROWS_WITH_AS(fit_accumulated_phase(p, aliased_times, ramp),
                         doctest::Contains("basis is degenerate"), Error);
}

TEST_CASE("rotating-frame pump cycle reproduces the closed form exactly") {
    const ExperimentConfig cfg = isolated_pump_cycle(default_experiment());
    const PulseSequence seq = build_sequence(cfg, 0.0);
    REQUIRE(seq.pulses.size() == 3);
    REQUIRE(seq.pulses[0].start_us == 0.0);

    AnalyticEeParams params;
    for (int k = 0; k < 3; ++k) {
        params.rabi_areas[k] = cfg.pulses[k].area_pi * pi;
        params.phases[k] = cfg.pulses[k].phase_rad;
    }
    params.tunneling_frequency_mhz = tunneling_splitting(cfg.graph, {1, 0, 1});

    // With the first pulse at t = 0, the envelope-referenced carriers of the
    // later pump pulses contribute 2 pi f_k t_k each to the accumulated phase.
    const double expected_phi =
        std::fmod(two_pi * (seq.pulses[1].carrier_mhz * seq.pulses[1].start_us +
                            seq.pulses[2].carrier_mhz * seq.pulses[2].start_us),
                  two_pi);
    params.accumulated_phase = expected_phi;

    QuantumState s = run_sequence(initial_state(cfg), cfg.graph, seq, Engine::rwa,
                                  cfg.engine_options)
                         .final_state();
    std::vector<double> times, values;
    for (int i = 0; i < 64; ++i) {
        times.push_back(s.time_us);
        values.push_back(ee_expectation(s, cfg.graph));
        CHECK(std::abs(values.back() - analytic_ee(params, s.time_us)) < 1e-6);
        s = propagate_free(s, cfg.graph, 0.05);
    }

    params.accumulated_phase = 0.0;
    const PhaseFitReport r = fit_accumulated_phase(params, times, values);
    CHECK(wrapped_gap(r.accumulated_phase, expected_phi) < 1e-6);
    CHECK(r.amplitude_scale == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.rms_residual < 1e-9);
}
