#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctsim/config_file.hpp"
#include "ctsim/dsp.hpp"
#include "ctsim/level_system.hpp"
#include "ctsim/propagator.hpp"
#include "ctsim/pulse.hpp"
#include "ctsim/signal_synth.hpp"

namespace ctsim {

// Scan analysis settings.  Amplitude and phase per listen line come from the
// leakage-resolved projection of the raw record (spectral_extract_resolved).
// The filter and decimation settings serve the waterfall traces: those are
// down-mixed to a common LO between the two listen lines, decimated, and
// bandpass filtered per line before the slices are written out.
struct AnalysisSpec {
    RotKey doublet{1, 0, 1};
    std::vector<std::string> listen_labels;  // exactly two, first reported as "plus"
    double filter_bandwidth_khz = 60.0;
    int filter_order = 6;
    int decimation = 250;
};

struct ExperimentConfig {
    std::string name = "experiment";
    LevelGraph graph;
    std::vector<PulseParams> pulses;
    double guard_us = 0.02;
    ThermalSpec thermal;
    ReceiverSpec receiver;
    RecordSpec record;
    AnalysisSpec analysis;
    Engine engine = Engine::rwa;
    EngineOptions engine_options;
    std::uint64_t seed = 1;
};

// The embedded copy of configs/3fba_default.cfg; the shipped file and this
// string are kept byte-identical.
std::string default_config_text();

ExperimentConfig experiment_from_config(const ConfigFile& cf);
ExperimentConfig default_experiment();

// Reduced fixtures.  isolated_variant removes the counterpart excitation
// ladder (transitions tagged counterpart dropped, population restricted to
// the lower doublet member of the ground state).  isolated_pump_cycle
// additionally keeps only the pump pulses and the levels they touch, the
// single-parity system the closed-form ee(t) is exact on.
ExperimentConfig isolated_variant(const ExperimentConfig& cfg);
ExperimentConfig isolated_pump_cycle(const ExperimentConfig& cfg);

// Similarity transform: energies divided by `factor`, all durations and the
// record timing multiplied by it.  The dynamics are identical with time
// measured in units of factor microseconds, which makes the direct
// integrator affordable at full sequence length.
void scale_experiment(ExperimentConfig& cfg, double factor);

PulseSequence build_sequence(const ExperimentConfig& cfg, double t_pp_us);
QuantumState initial_state(const ExperimentConfig& cfg);

// Frequency of the single graph transition carrying `label`.
double listen_frequency(const ExperimentConfig& cfg, const std::string& label);

struct ScanPoint {
    double scan_value = 0.0;
    bool ok = false;
    std::string error;
    SpectralPoint plus;
    SpectralPoint minus;
    std::string sequence_hash;
    std::vector<double> waterfall;  // filled when waterfall traces are requested
};

struct ScanResult {
    ScanKind kind = ScanKind::delay;
    std::string scan_label;
    std::vector<std::string> listen_labels;
    std::vector<double> listen_freqs_mhz;
    bool counterpart_active = false;
    std::vector<ScanPoint> points;
    std::size_t n_failed = 0;
    bool ok = false;  // fits computed and at most 20% of points failed

    LinearFit fit_plus, fit_minus;  // unconstrained phase-vs-scan-value fits
    // Phase scans also carry the slope-pinned (+1/-1) fits the paper quotes.
    LinearFit constrained_plus, constrained_minus;
    double nu_fit_mhz = 0.0;         // delay scans: (|k+| + |k-|) / (4 pi)
    double nu_fit_stderr_mhz = 0.0;

    double waterfall_rate = 0.0;  // samples per us of the waterfall slices
    double waterfall_lo_mhz = 0.0;
};

struct ScanOptions {
    int workers = 0;  // 0 picks the hardware concurrency
    bool waterfall = false;
    double waterfall_window_us = 1.6;
};

ScanResult run_delay_scan(const ExperimentConfig& cfg, const std::vector<double>& delays_us,
                          const ScanOptions& opt = {});
ScanResult run_phase_scan(const ExperimentConfig& cfg, const std::string& target_label,
                          const std::vector<double>& phases_rad, const ScanOptions& opt = {});

// Fits, derived tunneling frequency, and the failure-aggregation rule, split
// out so they are testable on hand-built points.
void finalize_scan(ScanResult& result);

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// The pass/fail summary a scan run reports (and the CLI turns into its exit
// code): failure fraction, fit linearity, opposite slope signs, amplitude
// stability.
std::vector<CheckResult> evaluate_scan_checks(const ScanResult& result);

struct ReportPaths {
    std::string points_csv;     // empty entries are skipped
    std::string fits_json;
    std::string waterfall_csv;
};

void emit_report(const ScanResult& result, const ReportPaths& paths);

std::vector<double> default_delay_values();  // 0 to 1.3 us in 0.1 us steps
std::vector<double> default_phase_values();  // 0 to 2 pi in pi/6 steps

std::uint64_t point_seed(std::uint64_t base_seed, std::size_t point_index);

}  // namespace ctsim
