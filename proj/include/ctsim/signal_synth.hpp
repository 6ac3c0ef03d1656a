#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ctsim/common.hpp"
#include "ctsim/level_system.hpp"
#include "ctsim/propagator.hpp"

namespace ctsim {

// Sampled free-induction-decay record.  Times are local to the record: the
// first sample sits at the acquisition trigger and start_time_us only
// documents where that trigger fell in the sequence.  sample_rate is in
// samples per us (25 GSa/s = 25000).
struct FidRecord {
    std::vector<double> samples;
    double sample_rate = 25000.0;
    double start_time_us = 0.0;
    double duration_us = 40.0;
    double decay_time_us = 20.0;
    std::map<std::string, std::string> metadata;
    std::vector<std::string> warnings;

    double dt_us() const { return 1.0 / sample_rate; }
};

// Complex-envelope record produced by down_mix or by direct baseband
// synthesis.  Sample values are referenced to the local oscillator: a lab
// tone at f MHz appears at f - lo_frequency_mhz.
struct ComplexRecord {
    std::vector<cplx> samples;
    double sample_rate = 0.0;
    double start_time_us = 0.0;
    double duration_us = 0.0;
    double decay_time_us = 0.0;
    double lo_frequency_mhz = 0.0;
    std::map<std::string, std::string> metadata;
    std::vector<std::string> warnings;

    double dt_us() const { return 1.0 / sample_rate; }
};

struct ReceiverSpec {
    LabPol polarization = LabPol::x;
    double noise_rms = 0.0;
    double gain = 1.0;
};

struct RecordSpec {
    double sample_rate = 25000.0;  // samples per us
    double duration_us = 40.0;
    double decay_time_us = 20.0;
};

// Deterministic Gaussian source: explicit Box-Muller on mt19937_64 so that
// seeded runs are byte-identical regardless of the standard library's
// normal_distribution implementation.
class GaussianRng {
  public:
    explicit GaussianRng(std::uint64_t seed) : gen_(seed) {}
    double next();

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Emission in the stopped-clock approximation: the state at the acquisition
// trigger fixes each coherence, which then rings at its transition frequency
// under one shared exponential envelope,
//   s(t) = gain * exp(-t/T) * sum coupling * 2 Im(rho_ul exp(-i 2 pi f_ul t))
// over transitions matching the receiver polarization.  No match yields an
// all-zero record with a warning; a transition above the Nyquist limit is an
// error.
FidRecord synthesize_fid(const QuantumState& state, const LevelGraph& g, const ReceiverSpec& rx,
                         const RecordSpec& rec, std::uint64_t noise_seed = 0);

// Same emission model rendered directly as a complex envelope around
// lo_mhz at a reduced rate, for loops where the full-rate record is not
// needed.  Each quadrature receives independent noise of rx.noise_rms.
ComplexRecord synthesize_fid_baseband(const QuantumState& state, const LevelGraph& g,
                                      const ReceiverSpec& rx, const RecordSpec& rec,
                                      double lo_mhz, std::uint64_t noise_seed = 0);

// Heterodynes by lo_mhz, low-pass filters, and decimates.  Nonzero LO uses
// the complex-envelope convention (factor 2 after the image reject) so a lab
// cosine of amplitude a appears with |sample| = a; lo = 0 keeps the real
// convention.  The anti-alias chain is a linear-phase FIR evaluated centered
// on each output sample, so in-band phases carry no filter delay.
// bandwidth_of_interest_mhz = 0 picks a quarter of the decimated rate, the
// widest band the decimation can serve; wider requests are refused.
ComplexRecord down_mix(const FidRecord& record, double lo_mhz, int decimation,
                       double bandwidth_of_interest_mhz = 0.0);

// CSV rows are (time_us, amplitude); binary is the flat little-endian
// float64 sample array with a JSON sidecar carrying the header fields.
void write_fid_csv(const FidRecord& record, const std::string& path);
void write_fid_binary(const FidRecord& record, const std::string& data_path,
                      const std::string& sidecar_path);
FidRecord read_fid_binary(const std::string& data_path, const std::string& sidecar_path);

}  // namespace ctsim
