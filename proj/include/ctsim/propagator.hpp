#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ctsim/pulse.hpp"

namespace ctsim {

// Density matrix over the graph's levels, indexed in g.levels order, plus the
// absolute sequence time it refers to.
struct QuantumState {
    Eigen::MatrixXcd rho;
    double time_us = 0.0;
};

struct ThermalSpec {
    double temperature_k = 1.0;
    std::vector<LevelId> populate;  // empty populates every level
};

QuantumState thermal_state(const LevelGraph& g, const ThermalSpec& spec);
QuantumState pure_state(const LevelGraph& g, const LevelId& id);

struct StateCheck {
    double trace_error = 0.0;     // |tr(rho) - 1|
    double hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;  // most negative population eigenvalue
};
StateCheck check_state(const QuantumState& s);

struct EngineOptions {
    // A pulse drives every matching-polarization transition within this
    // detuning of its carrier (rotating-frame engine only; the direct engine
    // couples all matching-polarization transitions).
    double rwa_cutoff_mhz = 20.0;
    // Auto-chosen direct step resolves the fastest level-pair or carrier
    // frequency into 1/direct_step_cycles steps per cycle.
    double direct_step_cycles = 0.002;
    // Treat a pulse that addresses nothing as free evolution instead of
    // failing.
    bool allow_unaddressed = false;
};

// Free evolution: rho_mn picks up exp(-i 2 pi (E_m - E_n) dt).
QuantumState propagate_free(const QuantumState& s, const LevelGraph& g, double duration_us);

// Piecewise-analytic rotating-frame propagation of one pulse.  Exact for any
// set of addressed transitions that admits a consistent photon ladder;
// unaddressed levels evolve freely.
QuantumState propagate_pulse_rwa(const QuantumState& s, const LevelGraph& g, const Pulse& p,
                                 const EngineOptions& opt = {});

// Fixed-step RK4 integration of d rho/dt = -i [H(t), rho] with the full
// oscillating drive term.  step_us <= 0 picks the step from the options;
// steps coarser than 0.05 cycles of the fastest frequency are refused.
QuantumState propagate_pulse_direct(const QuantumState& s, const LevelGraph& g, const Pulse& p,
                                    double step_us = 0.0, const EngineOptions& opt = {});

enum class Engine { rwa, direct };

struct Trajectory {
    // Initial state, the state after each pulse, then the state at
    // record_start: pulses + 2 entries.
    std::vector<QuantumState> boundaries;
    const QuantumState& final_state() const { return boundaries.back(); }
};

// Alternates free evolution and pulses along the sequence timeline, ending at
// record_start.  The engines process pulses serially; sequences with
// overlapping pulses (even on different polarization channels) are refused.
Trajectory run_sequence(const QuantumState& s0, const LevelGraph& g, const PulseSequence& seq,
                        Engine engine, const EngineOptions& opt = {});

}  // namespace ctsim
