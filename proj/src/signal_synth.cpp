#include "ctsim/signal_synth.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <utility>

#include <json.hpp>

namespace ctsim {

static_assert(std::endian::native == std::endian::little,
              "binary FID records are documented as little-endian float64");

double GaussianRng::next() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller on explicit 53-bit uniforms; u1 is kept away from zero.
    const double u1 =
        (static_cast<double>(gen_() >> 11) + 1.0) / 9007199254740993.0;
    const double u2 = static_cast<double>(gen_() >> 11) / 9007199254740992.0;
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(two_pi * u2);
    have_spare_ = true;
    return r * std::cos(two_pi * u2);
}

namespace {

struct Emitter {
    double freq_mhz = 0.0;
    cplx amp;  // coupling * rho(upper, lower)
};

std::vector<Emitter> collect_emitters(const QuantumState& state, const LevelGraph& g,
                                      LabPol pol) {
    const auto n = static_cast<Eigen::Index>(g.levels.size());
    if (state.rho.rows() != n || state.rho.cols() != n)
        fail("state dimension does not match the level graph");
    std::vector<Emitter> out;
    for (const auto& t : g.transitions) {
        if (t.pol != pol) continue;
        int u = g.require_index(t.upper);
        int l = g.require_index(t.lower);
        out.push_back({g.frequency(t), t.coupling * state.rho(u, l)});
    }
    return out;
}

long sample_count(const RecordSpec& rec) {
    if (!(rec.sample_rate > 0.0)) fail("record sample rate must be positive");
    if (!(rec.duration_us > 0.0)) fail("record duration must be positive");
    if (!(rec.decay_time_us > 0.0)) fail("record decay time constant must be positive");
    return std::lround(rec.sample_rate * rec.duration_us);
}

// Tracks amp * exp(i w t) by incremental rotation, re-anchored to an exact
// polar evaluation every block so the drift over 1e6 samples stays at
// rounding level.
class Rotator {
  public:
    Rotator(cplx amp, double w_rad_per_us, double dt_us)
        : amp_(amp), w_(w_rad_per_us), dt_(dt_us), step_(std::polar(1.0, w_rad_per_us * dt_us)) {
        resync(0);
    }

    cplx value() const { return cur_; }

    void advance(long i_next) {
        if ((i_next & 0xffff) == 0) {
            resync(i_next);
        } else {
            cur_ *= step_;
        }
    }

  private:
    void resync(long i) { cur_ = amp_ * std::polar(1.0, w_ * dt_ * static_cast<double>(i)); }

    cplx amp_;
    double w_;
    double dt_;
    cplx step_;
    cplx cur_;
};

}  // namespace

FidRecord synthesize_fid(const QuantumState& state, const LevelGraph& g, const ReceiverSpec& rx,
                         const RecordSpec& rec, std::uint64_t noise_seed) {
    if (rx.noise_rms < 0.0) fail("receiver noise rms must be >= 0");
    const long n = sample_count(rec);

    FidRecord out;
    out.sample_rate = rec.sample_rate;
    out.start_time_us = state.time_us;
    out.duration_us = rec.duration_us;
    out.decay_time_us = rec.decay_time_us;
    out.samples.assign(static_cast<size_t>(n), 0.0);

    auto emitters = collect_emitters(state, g, rx.polarization);
    if (emitters.empty()) {
        out.warnings.push_back("no transition matches receiver polarization '" +
                               std::string(1, pol_char(rx.polarization)) +
                               "'; record is all zeros");
    }
    const double nyquist = 0.5 * rec.sample_rate;
    for (const auto& e : emitters) {
        if (e.freq_mhz >= nyquist)
            fail("emission at " + std::to_string(e.freq_mhz) +
                 " MHz exceeds the record Nyquist limit; raise the sample rate or "
                 "synthesize in the down-mixed frame");
    }

    const double dt = out.dt_us();
    std::vector<Rotator> rot;
    rot.reserve(emitters.size());
    for (const auto& e : emitters) rot.emplace_back(e.amp, -two_pi * e.freq_mhz, dt);

    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (auto& r : rot) {
            acc += 2.0 * r.value().imag();
            r.advance(i + 1);
        }
        out.samples[static_cast<size_t>(i)] =
            rx.gain * std::exp(-static_cast<double>(i) * dt / rec.decay_time_us) * acc;
    }

    if (rx.noise_rms > 0.0) {
        GaussianRng rng(noise_seed);
        for (auto& s : out.samples) s += rx.noise_rms * rng.next();
    }
    return out;
}

ComplexRecord synthesize_fid_baseband(const QuantumState& state, const LevelGraph& g,
                                      const ReceiverSpec& rx, const RecordSpec& rec,
                                      double lo_mhz, std::uint64_t noise_seed) {
    if (rx.noise_rms < 0.0) fail("receiver noise rms must be >= 0");
    const long n = sample_count(rec);

    ComplexRecord out;
    out.sample_rate = rec.sample_rate;
    out.start_time_us = state.time_us;
    out.duration_us = rec.duration_us;
    out.decay_time_us = rec.decay_time_us;
    out.lo_frequency_mhz = lo_mhz;
    out.samples.assign(static_cast<size_t>(n), cplx{});

    auto emitters = collect_emitters(state, g, rx.polarization);
    if (emitters.empty()) {
        out.warnings.push_back("no transition matches receiver polarization '" +
                               std::string(1, pol_char(rx.polarization)) +
                               "'; record is all zeros");
    }
    const double nyquist = 0.5 * rec.sample_rate;
    for (const auto& e : emitters) {
        if (std::abs(e.freq_mhz - lo_mhz) >= nyquist)
            fail("emission at " + std::to_string(e.freq_mhz) + " MHz lands " +
                 std::to_string(e.freq_mhz - lo_mhz) +
                 " MHz from the LO, beyond the baseband Nyquist limit");
    }

    // The analytic signal of 2 Im(rho e^{-i w t}) is 2i conj(rho) e^{+i w t};
    // referencing it to the LO leaves the envelope at f - lo.
    const double dt = out.dt_us();
    std::vector<Rotator> rot;
    rot.reserve(emitters.size());
    for (const auto& e : emitters)
        rot.emplace_back(2.0 * iu * std::conj(e.amp), two_pi * (e.freq_mhz - lo_mhz), dt);

    for (long i = 0; i < n; ++i) {
        cplx acc{};
        for (auto& r : rot) {
            acc += r.value();
            r.advance(i + 1);
        }
        out.samples[static_cast<size_t>(i)] =
            rx.gain * std::exp(-static_cast<double>(i) * dt / rec.decay_time_us) * acc;
    }

    if (rx.noise_rms > 0.0) {
        GaussianRng rng(noise_seed);
        for (auto& s : out.samples) s += cplx{rx.noise_rms * rng.next(), rx.noise_rms * rng.next()};
    }
    return out;
}

namespace {

// Blackman-windowed sinc low-pass, unity DC gain, odd length.
std::vector<double> windowed_sinc(double cutoff_cycles_per_sample, int taps) {
    std::vector<double> h(static_cast<size_t>(taps));
    const int mid = (taps - 1) / 2;
    double sum = 0.0;
    for (int k = 0; k < taps; ++k) {
        const double m = k - mid;
        const double x = two_pi * cutoff_cycles_per_sample * m;
        double v = m == 0.0 ? 2.0 * cutoff_cycles_per_sample
                            : std::sin(x) / (pi * m);
        const double w = 0.42 - 0.5 * std::cos(two_pi * k / (taps - 1)) +
                         0.08 * std::cos(2.0 * two_pi * k / (taps - 1));
        v *= w;
        h[static_cast<size_t>(k)] = v;
        sum += v;
    }
    for (auto& v : h) v /= sum;
    return h;
}

// Filter centered on each kept sample, then decimate; linear phase with the
// group delay compensated exactly by the centering.
std::vector<cplx> filter_decimate(const std::vector<cplx>& x, const std::vector<double>& h,
                                  int factor) {
    const long n = static_cast<long>(x.size());
    const long mid = (static_cast<long>(h.size()) - 1) / 2;
    const long n_out = (n + factor - 1) / factor;
    std::vector<cplx> y(static_cast<size_t>(n_out));
    for (long j = 0; j < n_out; ++j) {
        const long center = j * static_cast<long>(factor);
        const long k_lo = std::max(0L, center - mid) - (center - mid);
        const long k_hi = std::min(n - 1, center + mid) - (center - mid);
        cplx acc{};
        for (long k = k_lo; k <= k_hi; ++k)
            acc += h[static_cast<size_t>(k)] * x[static_cast<size_t>(center - mid + k)];
        y[static_cast<size_t>(j)] = acc;
    }
    return y;
}

std::vector<int> decimation_stages(int total) {
    std::vector<int> stages;
    int rem = total;
    while (rem > 1) {
        int pick = rem <= 64 ? rem : 0;
        if (pick == 0) {
            for (int d = 64; d >= 2; --d) {
                if (rem % d == 0) {
                    pick = d;
                    break;
                }
            }
        }
        if (pick == 0) pick = rem;  // prime factor above 64, take it whole
        stages.push_back(pick);
        rem /= pick;
    }
    return stages;
}

int taps_for(double rate, double pass_mhz, double stop_mhz) {
    // Blackman main-lobe transition width is about 5.5 input samples wide.
    int n = static_cast<int>(std::ceil(5.5 * rate / (stop_mhz - pass_mhz)));
    if (n < 5) n = 5;
    return n % 2 == 0 ? n + 1 : n;
}

}  // namespace

ComplexRecord down_mix(const FidRecord& record, double lo_mhz, int decimation,
                       double bandwidth_of_interest_mhz) {
    if (decimation < 1) fail("down-mix decimation must be >= 1");
    if (lo_mhz < 0.0) fail("down-mix LO frequency must be >= 0");
    if (record.samples.empty()) fail("down-mix needs a non-empty record");
    const double nyquist = 0.5 * record.sample_rate;
    if (lo_mhz >= nyquist) fail("down-mix LO lies beyond the record Nyquist limit");

    const double out_rate = record.sample_rate / decimation;
    double band = bandwidth_of_interest_mhz;
    if (band < 0.0) fail("bandwidth of interest must be >= 0");
    if (band == 0.0) band = 0.25 * out_rate;
    if (band > 0.25 * out_rate * (1.0 + 1e-12))
        fail("aliasing risk: the decimated rate " + std::to_string(out_rate) +
             " per us is below 4x the " + std::to_string(band) +
             " MHz band of interest; reduce the decimation or the band");
    if (lo_mhz > 0.0 && 2.0 * lo_mhz - band <= band)
        fail("the band of interest overlaps its own mixing image; raise the LO or "
             "narrow the band");

    ComplexRecord out;
    out.start_time_us = record.start_time_us;
    out.duration_us = record.duration_us;
    out.decay_time_us = record.decay_time_us;
    out.lo_frequency_mhz = lo_mhz;
    out.metadata = record.metadata;
    out.warnings = record.warnings;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", lo_mhz);
    out.metadata["down_mix_lo_mhz"] = buf;
    out.metadata["down_mix_decimation"] = std::to_string(decimation);

    std::vector<cplx> work(record.samples.size());
    if (lo_mhz == 0.0) {
        for (size_t i = 0; i < work.size(); ++i) work[i] = record.samples[i];
    } else {
        Rotator mix(1.0, -two_pi * lo_mhz, record.dt_us());
        for (size_t i = 0; i < work.size(); ++i) {
            work[i] = record.samples[i] * mix.value();
            mix.advance(static_cast<long>(i) + 1);
        }
    }

    double rate = record.sample_rate;
    bool first = true;
    for (int factor : decimation_stages(decimation)) {
        const double stage_out = rate / factor;
        double stop = stage_out - band;
        // The first stage also rejects the negative-frequency mixing image.
        if (first && lo_mhz > 0.0) stop = std::min(stop, 2.0 * lo_mhz - band);
        const auto h = windowed_sinc(0.5 * (band + stop) / rate, taps_for(rate, band, stop));
        work = filter_decimate(work, h, factor);
        rate = stage_out;
        first = false;
    }

    // Complex-envelope convention: with the image rejected, doubling restores
    // the lab cosine amplitude.  lo = 0 keeps the record as-is.
    if (lo_mhz > 0.0)
        for (auto& v : work) v *= 2.0;

    out.sample_rate = rate;
    out.samples = std::move(work);
    return out;
}

void write_fid_csv(const FidRecord& record, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) fail("cannot open '" + path + "' for writing");
    std::fputs("time_us,amplitude\n", f);
    const double dt = record.dt_us();
    for (size_t i = 0; i < record.samples.size(); ++i) {
        std::fprintf(f, "%.12g,%.12g\n", static_cast<double>(i) * dt, record.samples[i]);
    }
    if (std::fclose(f) != 0) fail("failed to write '" + path + "'");
}

namespace {

nlohmann::json sidecar_json(const FidRecord& record) {
    nlohmann::json j;
    j["format"] = "ctsim-fid-v1";
    j["dtype"] = "float64-le";
    j["n_samples"] = record.samples.size();
    j["sample_rate_per_us"] = record.sample_rate;
    j["start_time_us"] = record.start_time_us;
    j["duration_us"] = record.duration_us;
    j["decay_time_us"] = record.decay_time_us;
    j["metadata"] = record.metadata;
    j["warnings"] = record.warnings;
    return j;
}

}  // namespace

void write_fid_binary(const FidRecord& record, const std::string& data_path,
                      const std::string& sidecar_path) {
    std::ofstream data(data_path, std::ios::binary);
    if (!data) fail("cannot open '" + data_path + "' for writing");
    data.write(reinterpret_cast<const char*>(record.samples.data()),
               static_cast<std::streamsize>(record.samples.size() * sizeof(double)));
    if (!data) fail("failed to write '" + data_path + "'");
    data.close();

    std::ofstream side(sidecar_path);
    if (!side) fail("cannot open '" + sidecar_path + "' for writing");
    side << sidecar_json(record).dump(2) << "\n";
    if (!side) fail("failed to write '" + sidecar_path + "'");
}

FidRecord read_fid_binary(const std::string& data_path, const std::string& sidecar_path) {
    std::ifstream side(sidecar_path);
    if (!side) fail("cannot open '" + sidecar_path + "'");
    nlohmann::json j;
    try {
        side >> j;
    } catch (const std::exception& e) {
        fail("bad sidecar '" + sidecar_path + "': " + e.what());
    }

    FidRecord record;
    try {
        if (j.at("format").get<std::string>() != "ctsim-fid-v1")
            fail("unsupported format tag");
        record.sample_rate = j.at("sample_rate_per_us").get<double>();
        record.start_time_us = j.at("start_time_us").get<double>();
        record.duration_us = j.at("duration_us").get<double>();
        record.decay_time_us = j.at("decay_time_us").get<double>();
        if (j.contains("metadata"))
            record.metadata = j["metadata"].get<std::map<std::string, std::string>>();
        if (j.contains("warnings"))
            record.warnings = j["warnings"].get<std::vector<std::string>>();
        record.samples.resize(j.at("n_samples").get<size_t>());
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        fail("bad sidecar '" + sidecar_path + "': " + e.what());
    }

    std::ifstream data(data_path, std::ios::binary | std::ios::ate);
    if (!data) fail("cannot open '" + data_path + "'");
    const auto bytes = static_cast<size_t>(data.tellg());
    if (bytes != record.samples.size() * sizeof(double))
        fail("'" + data_path + "' holds " + std::to_string(bytes) +
             " bytes but the sidecar expects " +
             std::to_string(record.samples.size() * sizeof(double)));
    data.seekg(0);
    data.read(reinterpret_cast<char*>(record.samples.data()),
              static_cast<std::streamsize>(bytes));
    if (!data) fail("failed to read '" + data_path + "'");
    return record;
}

}  // namespace ctsim
