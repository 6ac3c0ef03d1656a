#pragma once

#include <string>
#include <vector>

#include "ctsim/level_system.hpp"

namespace ctsim {

// Per-label pulse parameters as they appear in a config: what to drive, how
// hard, and with what carrier phase.  The carrier frequency itself comes from
// the graph (mean frequency of the transitions sharing the label).
struct PulseParams {
    std::string label;
    double area_pi = 0.5;      // Rabi area in units of pi (Omega * tau = area_pi * pi)
    double duration_us = 1.0;
    double phase_rad = 0.0;
    bool probe = false;        // probe-block pulses shift rigidly with t_pp
    double carrier_override_mhz = 0.0;  // nonzero replaces the graph-derived carrier
};

// A fully resolved timed pulse.  The field is envelope-referenced:
//   E(t) = cos(2 pi carrier (t - start) + phase)
// so the carrier phase restarts at each pulse edge, which is what a
// trigger-locked source does.  All phase bookkeeping downstream relies on
// this convention.
struct Pulse {
    std::string label;
    double carrier_mhz = 0.0;
    double start_us = 0.0;
    double duration_us = 0.0;
    double phase_rad = 0.0;        // in [0, 2 pi)
    double rabi_rad_per_us = 0.0;  // peak on-resonance Rabi rate for coupling 1
    LabPol pol = LabPol::z;
    bool probe = false;

    double end_us() const { return start_us + duration_us; }
};

struct PulseSequence {
    std::vector<Pulse> pulses;     // time-ordered
    double record_start_us = 0.0;  // FID acquisition begins here
    double record_duration_us = 0.0;
    double t_pp_us = 0.0;          // pump-probe delay baked into the timing

    // Stable content hash for output metadata.
    std::string hash() const;
};

// Checks the sequence invariants: time ordering, no overlap of pulses that
// share a polarization channel, record start after the last pulse.
ValidationReport validate_sequence(const PulseSequence& seq);

// Lays out the pump block, a pump-probe delay, then the probe block, with
// `guard_us` between consecutive pulses and before the record start.  Pulse
// order follows `params`; all pump pulses must precede all probe pulses.
PulseSequence build_pump_probe_sequence(const LevelGraph& g,
                                        const std::vector<PulseParams>& params,
                                        double t_pp_us, double guard_us,
                                        double record_duration_us);

enum class ScanKind { delay, pulse_phase };

struct ScanSpec {
    ScanKind kind = ScanKind::delay;
    std::string target;          // pulse label, phase scans only
    std::vector<double> values;  // us for delay, radians for phase
};

struct ScanContext {
    const LevelGraph* graph = nullptr;
    std::vector<PulseParams> params;
    double guard_us = 0.02;
    double record_duration_us = 40.0;
    double base_t_pp_us = 0.0;
};

// One sequence per scan value.  Delay scans rebuild the timing with t_pp set
// to the value; phase scans rebuild with the target pulse's phase set to the
// value.  Everything else is bitwise-identical across points.
std::vector<PulseSequence> apply_scan(const ScanContext& ctx, const ScanSpec& spec);

}  // namespace ctsim
