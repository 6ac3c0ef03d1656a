#include <doctest.h>

#include <cmath>

#include "ctsim/experiment.hpp"
#include "ctsim/pulse.hpp"

using namespace ctsim;

namespace {

const ExperimentConfig& cfg() {
    static ExperimentConfig c = default_experiment();
    return c;
}

PulseSequence sequence_at(double t_pp) {
    return build_pump_probe_sequence(cfg().graph, cfg().pulses, t_pp, cfg().guard_us,
                                     cfg().record.duration_us);
}

}  // namespace

TEST_CASE("pump-probe layout at zero delay") {
    const PulseSequence seq = sequence_at(0.0);
    REQUIRE(seq.pulses.size() == 5);

    CHECK(seq.pulses[0].label == "f1");
    CHECK(seq.pulses[1].label == "f2");
    CHECK(seq.pulses[2].label == "f3");
    CHECK(seq.pulses[3].label == "f4");
    CHECK(seq.pulses[4].label == "f5");

    // Shared-label pairs average to the mid frequency of the two legs.
    CHECK(seq.pulses[0].carrier_mhz == doctest::Approx(1850.1).epsilon(1e-12));
    CHECK(seq.pulses[1].carrier_mhz == doctest::Approx(749.279).epsilon(1e-12));
    CHECK(seq.pulses[2].carrier_mhz == doctest::Approx(1100.001).epsilon(1e-12));
    CHECK(seq.pulses[3].carrier_mhz == doctest::Approx(2200.0).epsilon(1e-12));
    CHECK(seq.pulses[4].carrier_mhz == doctest::Approx(4186.365).epsilon(1e-12));

    // Mutually orthogonal drive channels per dipole type.
    CHECK(seq.pulses[0].pol == LabPol::x);
    CHECK(seq.pulses[1].pol == LabPol::y);
    CHECK(seq.pulses[2].pol == LabPol::z);
    CHECK(seq.pulses[3].pol == LabPol::z);
    CHECK(seq.pulses[4].pol == LabPol::y);

    // Consecutive pulses separated by the guard; probe gap equals the guard
    // when t_pp = 0.
    for (size_t i = 1; i < seq.pulses.size(); ++i) {
        CHECK(seq.pulses[i].start_us ==
              doctest::Approx(seq.pulses[i - 1].end_us() + cfg().guard_us).epsilon(1e-12));
    }
    CHECK(seq.record_start_us ==
          doctest::Approx(seq.pulses.back().end_us() + cfg().guard_us).epsilon(1e-12));
    CHECK(seq.record_start_us == doctest::Approx(5.10).epsilon(1e-9));
    CHECK(validate_sequence(seq).ok());
}

TEST_CASE("probe block shifts rigidly with the pump-probe delay") {
    const PulseSequence base = sequence_at(0.0);
    const double deltas[] = {0.1, 0.7, 1.3};
    for (double d : deltas) {
        const PulseSequence moved = sequence_at(d);
        for (size_t i = 0; i < base.pulses.size(); ++i) {
            const double expect_shift = base.pulses[i].probe ? d : 0.0;
            CHECK(moved.pulses[i].start_us ==
                  doctest::Approx(base.pulses[i].start_us + expect_shift).epsilon(1e-12));
            CHECK(moved.pulses[i].duration_us == base.pulses[i].duration_us);
            CHECK(moved.pulses[i].phase_rad == base.pulses[i].phase_rad);
            CHECK(moved.pulses[i].carrier_mhz == base.pulses[i].carrier_mhz);
        }
        CHECK(moved.record_start_us == doctest::Approx(base.record_start_us + d).epsilon(1e-12));
    }
    CHECK_THROWS_WITH_AS(sequence_at(-0.1), doctest::Contains("delay must be >= 0"), Error);
}

TEST_CASE("rabi rate realizes the configured area") {
    const PulseSequence seq = sequence_at(0.0);
    for (size_t i = 0; i < seq.pulses.size(); ++i) {
        const PulseParams& pp = cfg().pulses[i];
        CHECK(seq.pulses[i].rabi_rad_per_us * seq.pulses[i].duration_us ==
              doctest::Approx(pp.area_pi * pi).epsilon(1e-12));
    }
}

TEST_CASE("pulse phases are stored wrapped to one turn") {
    std::vector<PulseParams> params = cfg().pulses;
    params[1].phase_rad = -0.5;
    params[2].phase_rad = 2.0 * two_pi + 0.25;
    const PulseSequence seq = build_pump_probe_sequence(cfg().graph, params, 0.0,
                                                        cfg().guard_us, 40.0);
    CHECK(seq.pulses[1].phase_rad == doctest::Approx(two_pi - 0.5).epsilon(1e-12));
    CHECK(seq.pulses[2].phase_rad == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("sequence validation flags overlap and early record start") {
    PulseSequence seq = sequence_at(0.0);
    seq.record_start_us = seq.pulses.back().end_us() - 0.1;
    ValidationReport r = validate_sequence(seq);
    REQUIRE_FALSE(r.ok());
    CHECK(r.joined().find("record starts before the last pulse ends") != std::string::npos);

    seq = sequence_at(0.0);
    seq.pulses[4].pol = seq.pulses[3].pol;
    seq.pulses[4].start_us = seq.pulses[3].start_us + 0.5 * seq.pulses[3].duration_us;
    r = validate_sequence(seq);
    REQUIRE_FALSE(r.ok());
    CHECK(r.joined().find("overlap on the same polarization channel") != std::string::npos);
}

TEST_CASE("builder rejects broken parameter tables") {
    std::vector<PulseParams> params = cfg().pulses;
    params[0].label = "f9";
    CHECK_THROWS_WITH_AS(build_pump_probe_sequence(cfg().graph, params, 0.0, 0.02, 40.0),
                         doctest::Contains("matches no graph transition"), Error);

    params = cfg().pulses;
    params[0].duration_us = 0.0;
    CHECK_THROWS_WITH_AS(build_pump_probe_sequence(cfg().graph, params, 0.0, 0.02, 40.0),
                         doctest::Contains("positive duration"), Error);

    // A pump pulse after the probe block breaks the rigid-shift contract.
    params = cfg().pulses;
    std::swap(params[2], params[3]);
    CHECK_THROWS_WITH_AS(build_pump_probe_sequence(cfg().graph, params, 0.0, 0.02, 40.0),
                         doctest::Contains("after the probe block started"), Error);
}

TEST_CASE("delay scan expands one sequence per value") {
    ScanContext ctx;
    ctx.graph = &cfg().graph;
    ctx.params = cfg().pulses;
    ctx.guard_us = cfg().guard_us;
    ctx.record_duration_us = cfg().record.duration_us;

    ScanSpec spec;
    spec.kind = ScanKind::delay;
    spec.values = default_delay_values();
    REQUIRE(spec.values.size() == 14);
    CHECK(spec.values.front() == 0.0);
    CHECK(spec.values.back() == doctest::Approx(1.3).epsilon(1e-12));

    const auto seqs = apply_scan(ctx, spec);
    REQUIRE(seqs.size() == 14);
    for (size_t i = 1; i < seqs.size(); ++i) {
        const double d = spec.values[i] - spec.values[0];
        for (size_t k = 0; k < seqs[i].pulses.size(); ++k) {
            const double expect = seqs[0].pulses[k].start_us +
                                  (seqs[0].pulses[k].probe ? d : 0.0);
            CHECK(seqs[i].pulses[k].start_us == doctest::Approx(expect).epsilon(1e-12));
        }
        CHECK(validate_sequence(seqs[i]).ok());
    }

    spec.values = {0.0, 0.2, 0.1};
    CHECK_THROWS_WITH_AS(apply_scan(ctx, spec),
                         doctest::Contains("strictly increasing"), Error);
}

TEST_CASE("phase scan touches only the target pulse") {
    ScanContext ctx;
    ctx.graph = &cfg().graph;
    ctx.params = cfg().pulses;
    ctx.guard_us = cfg().guard_us;
    ctx.record_duration_us = cfg().record.duration_us;

    ScanSpec spec;
    spec.kind = ScanKind::pulse_phase;
    spec.target = "f2";
    spec.values = default_phase_values();
    REQUIRE(spec.values.size() == 13);
    CHECK(spec.values.back() == doctest::Approx(two_pi).epsilon(1e-12));

    const auto seqs = apply_scan(ctx, spec);
    REQUIRE(seqs.size() == 13);
    for (size_t i = 0; i < seqs.size(); ++i) {
        for (size_t k = 0; k < seqs[i].pulses.size(); ++k) {
            const Pulse& p = seqs[i].pulses[k];
            CHECK(p.start_us == seqs[0].pulses[k].start_us);
            if (p.label == "f2") {
                const double wrapped = std::fmod(spec.values[i], two_pi);
                CHECK(p.phase_rad == doctest::Approx(wrapped).epsilon(1e-12));
            } else {
                CHECK(p.phase_rad == seqs[0].pulses[k].phase_rad);
            }
        }
    }

    spec.target = "f7";
    CHECK_THROWS_WITH_AS(apply_scan(ctx, spec),
                         doctest::Contains("'f7' is not a sequence pulse"), Error);
}

TEST_CASE("single-value scan reproduces the base sequence") {
    ScanContext ctx;
    ctx.graph = &cfg().graph;
    ctx.params = cfg().pulses;
    ctx.guard_us = cfg().guard_us;
    ctx.record_duration_us = cfg().record.duration_us;

    ScanSpec spec;
    spec.kind = ScanKind::delay;
    spec.values = {0.0};
    const auto seqs = apply_scan(ctx, spec);
    REQUIRE(seqs.size() == 1);
    CHECK(seqs[0].hash() == sequence_at(0.0).hash());
}

TEST_CASE("sequence hash tracks content") {
    const PulseSequence a = sequence_at(0.0);
    const PulseSequence b = sequence_at(0.0);
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 16);

    PulseSequence c = a;
    c.pulses[1].phase_rad += 1e-9;
    CHECK(c.hash() != a.hash());
}
