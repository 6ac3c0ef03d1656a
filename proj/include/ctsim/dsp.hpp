#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ctsim/common.hpp"
#include "ctsim/signal_synth.hpp"

namespace ctsim {

struct BandpassSpec {
    double center_mhz = 0.0;
    double bandwidth_khz = 60.0;
    int order = 6;
};

// One second-order section of the low-pass half of the design:
//   y[i] = b0 x[i] + b1 x[i-1] + b2 x[i-2] - a1 y[i-1] - a2 y[i-2]
struct BiquadCoeffs {
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

// The bandpass is realized by heterodyning the band center to DC, running a
// Butterworth low-pass at half the bandwidth (bilinear design, cutoff
// prewarped), and shifting back.  This keeps the prototype magnitude
//   |H(j delta)|^2 = 1 / (1 + (2 delta / B)^(2n))
// exact in the detuning delta, which a direct band transform at
// center/bandwidth ratios of order 10^4 does not.
struct BandpassDesign {
    BandpassSpec spec;
    double sample_rate = 0.0;          // samples per us of the record it applies to
    double lowpass_cutoff_mhz = 0.0;   // B/2
    double max_pole_radius = 0.0;
    std::vector<BiquadCoeffs> lowpass_biquads;
};

// Errors when the poles crowd the unit circle at this rate (narrow band at a
// high rate); the error text advises down-mixing first.
BandpassDesign design_bandpass(const BandpassSpec& spec, double sample_rate);

// Two-pass (forward-backward) amplitude response in dB at a detuning from
// the band center; 0 dB at center by construction.
double bandpass_gain_db(const BandpassDesign& design, double offset_mhz);

// Coefficient and response table for the filter-design CLI subcommand.
std::string design_report(const BandpassDesign& design);

// Zero-phase (forward-backward) bandpass.  Record edges carry a transient of
// roughly 1/(1 - max_pole_radius) samples that reflection padding only
// damps; gain figures are properties of the response function, asserted via
// bandpass_gain_db.  The complex overload takes center_mhz in lab frequency
// and filters around center - lo.
FidRecord butterworth_bandpass(const FidRecord& record, const BandpassSpec& spec);
ComplexRecord butterworth_bandpass(const ComplexRecord& record, const BandpassSpec& spec);

struct SpectralPoint {
    double frequency_mhz = 0.0;
    double amplitude = 0.0;
    double phase_rad = 0.0;  // in (-pi, pi]
    bool phase_defined = true;
};

struct SpectralExtraction {
    std::vector<SpectralPoint> points;
    std::vector<std::string> warnings;
};

// Direct single-frequency projection of the record, evaluated exactly at
// each requested frequency (no FFT grid scalloping).  Phases follow the
// cosine convention referenced to the first sample: a cos(2 pi f t + psi)
// yields amplitude a and phase psi, with t local to the record.  Pairs
// closer than 10/duration attach a resolvability warning.  The complex
// overload takes lab frequencies and projects at f - lo.
SpectralExtraction spectral_extract(const FidRecord& record,
                                    const std::vector<double>& frequencies_mhz);
SpectralExtraction spectral_extract(const ComplexRecord& record,
                                    const std::vector<double>& frequencies_mhz);

// Projection with the mutual leakage between the requested lines removed:
// the raw projections are related to the per-line amplitudes by a Gram
// matrix of sampled decaying exponentials (the record's own decay model),
// which is solved exactly.  Lines 1.63 MHz apart on a 20 us decay bias each
// other's plain projection by about 0.5%; the resolved extraction is exact
// for on-model records.  Amplitude and phase conventions match
// spectral_extract.  Errors when the Gram system is ill-conditioned (lines
// closer than roughly the record's linewidth).
SpectralExtraction spectral_extract_resolved(const FidRecord& record,
                                             const std::vector<double>& frequencies_mhz);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double slope_stderr = 0.0;
    std::vector<double> residuals;
};

// Removes 2 pi jumps between successive phases (input order is the scan
// order), then ordinary least squares.  Passing constrained_slope fits the
// intercept only, as the phase-phase scans are fitted with slope pinned to
// +-1; r_squared still reports 1 - SS_res/SS_tot of the constrained line.
LinearFit unwrap_and_fit(const std::vector<double>& x, const std::vector<double>& phases_rad,
                         std::optional<double> constrained_slope = std::nullopt);

struct BeatAnalysis {
    std::vector<double> envelope;        // analytic-signal magnitude per sample
    std::vector<double> node_times_us;   // local times of envelope minima
    std::vector<double> tone_freqs_mhz;  // dominant tones, ascending (1 or 2)
    double carrier_estimate_mhz = 0.0;   // mean of the dominant tone frequencies
    double fft_bin_mhz = 0.0;            // resolution of the padded spectrum
};

// Validates that the record holds one or two dominant tones (FFT peaks at or
// above 1/5 of the strongest), then returns the envelope and the node times
// refined by a parabola through each envelope-squared minimum.  A single
// tone legitimately has no nodes; zero or more than two dominant tones is an
// error.  The carrier estimate is the mean of the detected tone peaks, not
// any externally quoted value.
BeatAnalysis beat_envelope(const FidRecord& record);
BeatAnalysis beat_envelope(const ComplexRecord& record);

}  // namespace ctsim
