#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "ctsim/common.hpp"
#include "ctsim/level_system.hpp"
#include "ctsim/propagator.hpp"

namespace ctsim {

// Enantiomeric-excess observable on a tunneling doublet: the handed
// superpositions are (|+> +- |->)/sqrt(2) and the operator reduces to
// |+><-| + |-><+| on the doublet subspace.
struct EeObservable {
    RotKey doublet{1, 0, 1};
};

// 2*Re rho(+,-) for the doublet; +1 on (|+> + |->)/sqrt(2), 0 on parity
// eigenstates.  Errors if either parity partner is missing from the graph.
double ee_expectation(const QuantumState& state, const LevelGraph& g,
                      const EeObservable& obs = {});

struct AnalyticEeParams {
    std::array<double, 3> rabi_areas{0.5 * pi, pi, 0.5 * pi};  // Omega_k * tau_k, radians
    std::array<double, 3> phases{0.0, 0.0, 0.0};         // carrier phases phi_k, radians
    double accumulated_phase = 0.0;                      // radians
    double tunneling_frequency_mhz = 0.818;
};

// Closed-form ee(t) after the three-pulse pump cycle:
//   -sin(a1) sin(a2/2) sin(a3/2) * sin(2 pi nu t + phi1 - phi2 - phi3 + Phi)
// with the proportionality constant fixed to 1.
double analytic_ee(const AnalyticEeParams& params, double t_us);

struct PhaseFitReport {
    double accumulated_phase = 0.0;  // Phi in [0, 2pi)
    double amplitude = 0.0;          // absolute sinusoid amplitude of the trace
    double amplitude_scale = 0.0;    // amplitude relative to the analytic prefactor
    double rms_residual = 0.0;
    std::size_t n_samples = 0;
};

// Least-squares fit of the closed form to a sampled ee(t) trace with the
// overall amplitude and the accumulated phase free; the areas, phases, and
// tunneling frequency are taken from params (params.accumulated_phase is
// ignored).  Requires at least 8 samples spanning a full tunneling period.
// Errors on a flat trace and when the analytic prefactor vanishes.
PhaseFitReport fit_accumulated_phase(const AnalyticEeParams& params,
                                     const std::vector<double>& times_us,
                                     const std::vector<double>& values);

std::string to_json(const PhaseFitReport& report);

}  // namespace ctsim
