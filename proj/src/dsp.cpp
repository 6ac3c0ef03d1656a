#include "ctsim/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>

#include <Eigen/Dense>
#include <fftw3.h>

namespace ctsim {
namespace {

// FFTW plan creation and destruction are not thread-safe; execution is.
std::mutex& fftw_mutex() {
    static std::mutex mu;
    return mu;
}

void fft_inplace(std::vector<cplx>& v, int sign) {
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(v.size()),
                                reinterpret_cast<fftw_complex*>(v.data()),
                                reinterpret_cast<fftw_complex*>(v.data()), sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_destroy_plan(plan);
    }
}

// Hann weights. Tapering the record before the band mask keeps the
// truncation discontinuities at the record edges from leaking across the
// band: with a plain rectangular transform their spectral tails run through
// the whole mask, and chopping them rings an additive floor (~0.3% of peak
// here) into the time domain that drags the near-zero beat minima around.
double hann_weight(size_t i, size_t n) {
    return n < 2 ? 1.0 : 0.5 - 0.5 * std::cos(2.0 * pi * static_cast<double>(i) /
                                               static_cast<double>(n - 1));
}

// Analytic signal magnitude of the [f_lo, f_hi] band: zero the exact-N
// spectrum outside the band (the record may hold weak tones far from the
// beating pair whose cross terms would ripple the raw envelope), double the
// kept positive-frequency bins, inverse transform.
std::vector<double> analytic_envelope(const std::vector<double>& s, double rate, double f_lo,
                                      double f_hi, bool taper) {
    const size_t n = s.size();
    std::vector<cplx> v(n);
    for (size_t i = 0; i < n; ++i) v[i] = taper ? s[i] * hann_weight(i, n) : s[i];
    fft_inplace(v, FFTW_FORWARD);
    for (size_t k = 1; k < (n + 1) / 2; ++k) {
        const double f = rate * static_cast<double>(k) / static_cast<double>(n);
        v[k] = (f < f_lo || f > f_hi) ? cplx{} : 2.0 * v[k];
    }
    v[0] = 0.0;
    for (size_t k = n / 2; k < n; ++k) v[k] = 0.0;
    fft_inplace(v, FFTW_BACKWARD);
    std::vector<double> env(n);
    for (size_t i = 0; i < n; ++i) env[i] = std::abs(v[i]) / static_cast<double>(n);
    return env;
}

// Same band selection for an already-complex record; f_lo and f_hi are
// relative to the record's LO and may be negative.
std::vector<double> masked_envelope(const std::vector<cplx>& s, double rate, double f_lo,
                                    double f_hi, bool taper) {
    const size_t n = s.size();
    std::vector<cplx> v(n);
    for (size_t i = 0; i < n; ++i) v[i] = taper ? s[i] * hann_weight(i, n) : s[i];
    fft_inplace(v, FFTW_FORWARD);
    for (size_t k = 0; k < n; ++k) {
        double f = rate * static_cast<double>(k) / static_cast<double>(n);
        if (2 * k >= n) f -= rate;
        if (f < f_lo || f > f_hi) v[k] = 0.0;
    }
    fft_inplace(v, FFTW_BACKWARD);
    std::vector<double> env(n);
    for (size_t i = 0; i < n; ++i) env[i] = std::abs(v[i]) / static_cast<double>(n);
    return env;
}

}  // namespace

BandpassDesign design_bandpass(const BandpassSpec& spec, double sample_rate) {
    if (!(spec.bandwidth_khz > 0.0)) fail("bandpass bandwidth must be positive");
    if (spec.order < 2 || spec.order % 2 != 0)
        fail("bandpass order must be a positive even integer");
    if (!(sample_rate > 0.0)) fail("bandpass design needs a positive sample rate");

    BandpassDesign d;
    d.spec = spec;
    d.sample_rate = sample_rate;
    d.lowpass_cutoff_mhz = 0.5 * spec.bandwidth_khz * 1e-3;
    if (d.lowpass_cutoff_mhz >= 0.5 * sample_rate)
        fail("bandpass bandwidth exceeds the record Nyquist limit");

    const double warped = 2.0 * sample_rate * std::tan(pi * d.lowpass_cutoff_mhz / sample_rate);
    const int n = spec.order;
    for (int k = 0; k < n / 2; ++k) {
        const double angle = pi * (2.0 * k + n + 1.0) / (2.0 * n);
        const cplx p = warped * std::polar(1.0, angle);
        const cplx zp = (1.0 + p / (2.0 * sample_rate)) / (1.0 - p / (2.0 * sample_rate));
        BiquadCoeffs c;
        c.a1 = -2.0 * zp.real();
        c.a2 = std::norm(zp);
        const double gain = (1.0 + c.a1 + c.a2) / 4.0;
        c.b0 = gain;
        c.b1 = 2.0 * gain;
        c.b2 = gain;
        d.lowpass_biquads.push_back(c);
        d.max_pole_radius = std::max(d.max_pole_radius, std::abs(zp));
    }

    if (d.max_pole_radius > 1.0 - 1e-5) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "a %g kHz band at %g samples/us puts filter poles at radius %.8f; "
                      "down-mix and decimate the record first",
                      spec.bandwidth_khz, sample_rate, d.max_pole_radius);
        fail(buf);
    }
    return d;
}

double bandpass_gain_db(const BandpassDesign& design, double offset_mhz) {
    if (std::abs(offset_mhz) >= 0.5 * design.sample_rate)
        fail("response query lies beyond the Nyquist limit of the design rate");
    const cplx e = std::polar(1.0, -two_pi * offset_mhz / design.sample_rate);
    const cplx e2 = e * e;
    cplx h = 1.0;
    for (const auto& c : design.lowpass_biquads)
        h *= (c.b0 + c.b1 * e + c.b2 * e2) / (1.0 + c.a1 * e + c.a2 * e2);
    const double mag = std::abs(h);
    if (mag == 0.0) return -std::numeric_limits<double>::infinity();
    return 40.0 * std::log10(mag);  // forward-backward: amplitude gain |H|^2
}

std::string design_report(const BandpassDesign& d) {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof buf,
                  "butterworth bandpass: center %.12g MHz, bandwidth %.12g kHz, order %d\n",
                  d.spec.center_mhz, d.spec.bandwidth_khz, d.spec.order);
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "low-pass at %.12g MHz after heterodyne to DC, rate %.12g samples/us, "
                  "max pole radius %.12g\n",
                  d.lowpass_cutoff_mhz, d.sample_rate, d.max_pole_radius);
    out += buf;
    out += "section        b0              b1              b2              a1              a2\n";
    for (size_t i = 0; i < d.lowpass_biquads.size(); ++i) {
        const auto& c = d.lowpass_biquads[i];
        std::snprintf(buf, sizeof buf, "%7zu %15.8e %15.8e %15.8e %15.8e %15.8e\n", i + 1, c.b0,
                      c.b1, c.b2, c.a1, c.a2);
        out += buf;
    }
    out += "offset_khz   two_pass_gain_db\n";
    const double b = d.spec.bandwidth_khz;
    for (double mult : {0.0, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        const double offset_khz = mult * b;
        std::snprintf(buf, sizeof buf, "%10.6g %18.6f\n", offset_khz,
                      bandpass_gain_db(d, offset_khz * 1e-3));
        out += buf;
    }
    return out;
}

namespace {

void biquad_forward(std::vector<cplx>& x, const BiquadCoeffs& c) {
    cplx x1{}, x2{}, y1{}, y2{};
    for (auto& v : x) {
        const cplx x0 = v;
        const cplx y0 = c.b0 * x0 + c.b1 * x1 + c.b2 * x2 - c.a1 * y1 - c.a2 * y2;
        x2 = x1;
        x1 = x0;
        y2 = y1;
        y1 = y0;
        v = y0;
    }
}

void cascade(std::vector<cplx>& x, const std::vector<BiquadCoeffs>& sos) {
    for (const auto& c : sos) biquad_forward(x, c);
}

// Forward-backward filtering with odd-reflection padding to tame the edge
// transients of the zero initial state.
std::vector<cplx> filtfilt(const std::vector<cplx>& x, const BandpassDesign& d) {
    const long n = static_cast<long>(x.size());
    const long want = static_cast<long>(std::ceil(8.0 / (1.0 - d.max_pole_radius)));
    const long pad = std::min(n - 1, want);
    std::vector<cplx> work(static_cast<size_t>(n + 2 * pad));
    for (long j = 0; j < pad; ++j)
        work[static_cast<size_t>(j)] = 2.0 * x[0] - x[static_cast<size_t>(pad - j)];
    std::copy(x.begin(), x.end(), work.begin() + pad);
    for (long j = 0; j < pad; ++j)
        work[static_cast<size_t>(n + pad + j)] =
            2.0 * x[static_cast<size_t>(n - 1)] - x[static_cast<size_t>(n - 2 - j)];

    cascade(work, d.lowpass_biquads);
    std::reverse(work.begin(), work.end());
    cascade(work, d.lowpass_biquads);
    std::reverse(work.begin(), work.end());

    return {work.begin() + pad, work.begin() + pad + n};
}

}  // namespace

FidRecord butterworth_bandpass(const FidRecord& record, const BandpassSpec& spec) {
    if (record.samples.size() < 3) fail("bandpass needs at least 3 samples");
    BandpassDesign d = design_bandpass(spec, record.sample_rate);
    const double half_band = d.lowpass_cutoff_mhz;
    const double nyquist = 0.5 * record.sample_rate;
    if (spec.center_mhz + half_band >= nyquist || spec.center_mhz - half_band <= 0.0)
        fail("bandpass band extends beyond the record's usable range");
    if (spec.center_mhz < 2.0 * half_band)
        fail("bandpass center too close to DC for the heterodyne realization");

    const double w = two_pi * spec.center_mhz;
    const double dt = record.dt_us();
    std::vector<cplx> work(record.samples.size());
    for (size_t i = 0; i < work.size(); ++i)
        work[i] = record.samples[i] * std::polar(1.0, -w * static_cast<double>(i) * dt);
    work = filtfilt(work, d);

    FidRecord out = record;
    for (size_t i = 0; i < work.size(); ++i)
        out.samples[i] = 2.0 * (work[i] * std::polar(1.0, w * static_cast<double>(i) * dt)).real();
    return out;
}

ComplexRecord butterworth_bandpass(const ComplexRecord& record, const BandpassSpec& spec) {
    if (record.samples.size() < 3) fail("bandpass needs at least 3 samples");
    BandpassDesign d = design_bandpass(spec, record.sample_rate);
    const double offset = spec.center_mhz - record.lo_frequency_mhz;
    if (std::abs(offset) + d.lowpass_cutoff_mhz >= 0.5 * record.sample_rate)
        fail("bandpass band extends beyond the record's usable range");

    const double w = two_pi * offset;
    const double dt = record.dt_us();
    std::vector<cplx> work(record.samples.size());
    for (size_t i = 0; i < work.size(); ++i)
        work[i] = record.samples[i] * std::polar(1.0, -w * static_cast<double>(i) * dt);
    work = filtfilt(work, d);

    ComplexRecord out = record;
    for (size_t i = 0; i < work.size(); ++i)
        out.samples[i] = work[i] * std::polar(1.0, w * static_cast<double>(i) * dt);
    return out;
}

namespace {

void warn_unresolvable(const std::vector<double>& freqs, double duration,
                       std::vector<std::string>& warnings) {
    for (size_t i = 0; i < freqs.size(); ++i) {
        for (size_t j = i + 1; j < freqs.size(); ++j) {
            const double sep = std::abs(freqs[i] - freqs[j]);
            if (sep > 0.0 && duration < 10.0 / sep) {
                char buf[160];
                std::snprintf(buf, sizeof buf,
                              "frequencies %.12g and %.12g MHz are separated by less than "
                              "10/duration; extraction may be biased",
                              freqs[i], freqs[j]);
                warnings.push_back(buf);
            }
        }
    }
}

template <typename Sample>
cplx project_sum(const std::vector<Sample>& samples, double freq_offset_mhz, double dt) {
    const double w = -two_pi * freq_offset_mhz * dt;
    cplx acc{};
    cplx rot = 1.0;
    const cplx step = std::polar(1.0, w);
    for (size_t i = 0; i < samples.size(); ++i) {
        if ((i & 0xfff) == 0) rot = std::polar(1.0, w * static_cast<double>(i));
        acc += samples[i] * rot;
        rot *= step;
    }
    return acc / static_cast<double>(samples.size());
}

SpectralPoint point_from(const cplx& z, double scale) {
    SpectralPoint p;
    p.amplitude = std::abs(z);
    p.phase_defined = p.amplitude > 1e-12 * scale;
    p.phase_rad = p.phase_defined ? std::arg(z) : 0.0;
    return p;
}

template <typename Sample>
SpectralPoint project(const std::vector<Sample>& samples, double freq_offset_mhz, double dt,
                      double norm, double scale) {
    return point_from(norm * project_sum(samples, freq_offset_mhz, dt), scale);
}

}  // namespace

SpectralExtraction spectral_extract(const FidRecord& record,
                                    const std::vector<double>& frequencies_mhz) {
    if (record.samples.empty()) fail("spectral extraction needs a non-empty record");
    SpectralExtraction out;
    warn_unresolvable(frequencies_mhz, record.duration_us, out.warnings);
    double scale = 0.0;
    for (double s : record.samples) scale = std::max(scale, std::abs(s));
    for (double f : frequencies_mhz) {
        SpectralPoint p = project(record.samples, f, record.dt_us(), 2.0, scale);
        p.frequency_mhz = f;
        out.points.push_back(p);
    }
    return out;
}

SpectralExtraction spectral_extract(const ComplexRecord& record,
                                    const std::vector<double>& frequencies_mhz) {
    if (record.samples.empty()) fail("spectral extraction needs a non-empty record");
    SpectralExtraction out;
    warn_unresolvable(frequencies_mhz, record.duration_us, out.warnings);
    double scale = 0.0;
    for (const cplx& s : record.samples) scale = std::max(scale, std::abs(s));
    for (double f : frequencies_mhz) {
        SpectralPoint p =
            project(record.samples, f - record.lo_frequency_mhz, record.dt_us(), 1.0, scale);
        p.frequency_mhz = f;
        out.points.push_back(p);
    }
    return out;
}

SpectralExtraction spectral_extract_resolved(const FidRecord& record,
                                             const std::vector<double>& frequencies_mhz) {
    if (record.samples.empty()) fail("spectral extraction needs a non-empty record");
    if (!(record.decay_time_us > 0.0))
        fail("resolved extraction needs the record's decay time constant");

    // Projection of a unit decaying complex exponential onto one delta MHz
    // away, the exact geometric sum over the sample grid.
    const double dt = record.dt_us();
    const auto n = static_cast<double>(record.samples.size());
    auto off_diag = [&](double delta_mhz) {
        const cplx q = std::exp(cplx(-dt / record.decay_time_us, two_pi * delta_mhz * dt));
        return (1.0 - std::pow(q, n)) / (1.0 - q) / n;
    };

    const auto lines = static_cast<Eigen::Index>(frequencies_mhz.size());
    Eigen::MatrixXcd gram(lines, lines);
    Eigen::VectorXcd raw(lines);
    const double e0 = off_diag(0.0).real();
    for (Eigen::Index j = 0; j < lines; ++j) {
        raw(j) = 2.0 * project_sum(record.samples, frequencies_mhz[j], dt);
        for (Eigen::Index k = 0; k < lines; ++k) {
            const cplx g = off_diag(frequencies_mhz[k] - frequencies_mhz[j]);
            if (j != k && std::abs(g) > 0.5 * e0) {
                char buf[120];
                std::snprintf(buf, sizeof buf,
                              "lines %.12g and %.12g MHz are too close to resolve on this record",
                              frequencies_mhz[j], frequencies_mhz[k]);
                fail(buf);
            }
            gram(j, k) = g;
        }
    }
    const Eigen::VectorXcd c = lines > 0 ? gram.partialPivLu().solve(raw).eval()
                                         : Eigen::VectorXcd{};

    double scale = 0.0;
    for (double s : record.samples) scale = std::max(scale, std::abs(s));
    SpectralExtraction out;
    for (Eigen::Index j = 0; j < lines; ++j) {
        SpectralPoint p = point_from(c(j) * e0, scale);
        p.frequency_mhz = frequencies_mhz[static_cast<size_t>(j)];
        out.points.push_back(p);
    }
    return out;
}

LinearFit unwrap_and_fit(const std::vector<double>& x, const std::vector<double>& phases_rad,
                         std::optional<double> constrained_slope) {
    if (x.size() != phases_rad.size()) fail("phase fit needs matching arrays");
    const size_t n = x.size();
    if (n < 3) fail("phase fit needs at least 3 points");

    std::vector<double> u(n);
    u[0] = phases_rad[0];
    for (size_t i = 1; i < n; ++i) {
        double d = phases_rad[i] - phases_rad[i - 1];
        d -= two_pi * std::round(d / two_pi);
        u[i] = u[i - 1] + d;
    }

    double mx = 0.0, mu = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        mu += u[i];
    }
    mx /= static_cast<double>(n);
    mu /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, stot = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (u[i] - mu);
        stot += (u[i] - mu) * (u[i] - mu);
    }

    LinearFit fit;
    if (constrained_slope) {
        fit.slope = *constrained_slope;
        fit.intercept = mu - fit.slope * mx;
    } else {
        if (sxx <= 0.0) fail("phase fit needs at least two distinct x values");
        fit.slope = sxy / sxx;
        fit.intercept = mu - fit.slope * mx;
    }

    double sres = 0.0;
    fit.residuals.resize(n);
    for (size_t i = 0; i < n; ++i) {
        fit.residuals[i] = u[i] - (fit.slope * x[i] + fit.intercept);
        sres += fit.residuals[i] * fit.residuals[i];
    }
    if (stot > 1e-30) {
        fit.r_squared = 1.0 - sres / stot;
    } else {
        fit.r_squared = sres <= 1e-30 ? 1.0 : 0.0;
    }
    if (!constrained_slope && n > 2 && sxx > 0.0)
        fit.slope_stderr = std::sqrt(sres / static_cast<double>(n - 2) / sxx);
    return fit;
}

namespace {

struct ToneScan {
    std::vector<double> freqs_mhz;  // ascending
    double bin_mhz = 0.0;
};

size_t next_pow2(size_t n) {
    size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

// Dominant tones from a zero-padded power spectrum: strict local maxima at
// or above 1/5 of the strongest peak, de-duplicated within a few bins.
ToneScan scan_tones(std::vector<cplx> padded_input, size_t n_samples, double rate,
                    bool two_sided, double lo_mhz) {
    const size_t nfft = next_pow2(n_samples) * 2;
    padded_input.resize(nfft, cplx{});
    fft_inplace(padded_input, FFTW_FORWARD);

    const size_t k_max = two_sided ? nfft : nfft / 2 + 1;
    std::vector<double> amp(k_max);
    double peak = 0.0;
    for (size_t k = 0; k < k_max; ++k) {
        amp[k] = std::abs(padded_input[k]);
        peak = std::max(peak, amp[k]);
    }
    if (peak <= 0.0) fail("no dominant tone found in the record");

    ToneScan scan;
    scan.bin_mhz = rate / static_cast<double>(nfft);
    struct Peak {
        size_t k;
        double amp;
    };
    std::vector<Peak> peaks;
    for (size_t k = 0; k < k_max; ++k) {
        const double prev = amp[(k + k_max - 1) % k_max];
        const double next = amp[(k + 1) % k_max];
        if (!two_sided && (k == 0 || k + 1 == k_max)) continue;
        if (amp[k] > prev && amp[k] > next && amp[k] >= 0.2 * peak) peaks.push_back({k, amp[k]});
    }
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
        return a.amp > b.amp;
    });
    std::vector<Peak> kept;
    for (const auto& p : peaks) {
        bool dup = false;
        for (const auto& q : kept) {
            size_t d = p.k > q.k ? p.k - q.k : q.k - p.k;
            if (two_sided) d = std::min(d, nfft - d);
            if (d <= 8) dup = true;
        }
        if (!dup) kept.push_back(p);
    }

    if (kept.empty()) fail("no dominant tone found in the record");
    if (kept.size() > 2)
        fail("record holds " + std::to_string(kept.size()) +
             " dominant tones; beat analysis expects one or two");
    for (const auto& p : kept) {
        double f = static_cast<double>(p.k) * scan.bin_mhz;
        if (two_sided && p.k > nfft / 2) f -= rate;
        scan.freqs_mhz.push_back(f + lo_mhz);
    }
    std::sort(scan.freqs_mhz.begin(), scan.freqs_mhz.end());
    return scan;
}

// node_env is a Hann-tapered reanalysis of the same band, used only to place
// the nodes.  The taper is positive, so it cannot move an envelope zero; what
// it does is suppress the truncation-leakage floor that otherwise biases
// each near-zero minimum by tens of samples.  The wide margin skips the edge
// region where the taper itself starves the minima of signal.
BeatAnalysis beat_from_envelope(std::vector<double> env, const std::vector<double>& node_env,
                                const ToneScan& scan, double dt) {
    BeatAnalysis beat;
    beat.tone_freqs_mhz = scan.freqs_mhz;
    beat.fft_bin_mhz = scan.bin_mhz;
    double carrier = 0.0;
    for (double f : scan.freqs_mhz) carrier += f;
    beat.carrier_estimate_mhz = carrier / static_cast<double>(scan.freqs_mhz.size());

    if (scan.freqs_mhz.size() == 2) {
        // Depth guard: a true beat node sits far below the typical envelope,
        // while minima of residual in-band ripple do not.
        std::vector<double> sq(node_env.size());
        for (size_t i = 0; i < node_env.size(); ++i) sq[i] = node_env[i] * node_env[i];
        std::nth_element(sq.begin(), sq.begin() + sq.size() / 2, sq.end());
        const double depth_limit = 0.25 * sq[sq.size() / 2];

        const long n = static_cast<long>(node_env.size());
        const long margin = std::max(16L, n / 32);
        for (long i = margin; i + margin < n; ++i) {
            const double e0 = node_env[static_cast<size_t>(i - 1)] *
                              node_env[static_cast<size_t>(i - 1)];
            const double e1 = node_env[static_cast<size_t>(i)] * node_env[static_cast<size_t>(i)];
            const double e2 = node_env[static_cast<size_t>(i + 1)] *
                              node_env[static_cast<size_t>(i + 1)];
            if (e1 < e0 && e1 < e2 && e1 < depth_limit) {
                const double denom = e0 - 2.0 * e1 + e2;
                double delta = denom > 0.0 ? 0.5 * (e0 - e2) / denom : 0.0;
                delta = std::clamp(delta, -0.5, 0.5);
                beat.node_times_us.push_back((static_cast<double>(i) + delta) * dt);
            }
        }
    }
    beat.envelope = std::move(env);
    return beat;
}

}  // namespace

namespace {

// Envelope band around the detected tones: twice the separation past each
// tone for a pair (wide enough that the tapered tails near the mask edge are
// negligible), a few exact-N bins for a lone tone.
void tone_band(const ToneScan& scan, double bin_exact, double& f_lo, double& f_hi) {
    f_lo = scan.freqs_mhz.front();
    f_hi = scan.freqs_mhz.back();
    const double pad = std::max(2.0 * (f_hi - f_lo), 8.0 * bin_exact);
    f_lo -= pad;
    f_hi += pad;
}

}  // namespace

BeatAnalysis beat_envelope(const FidRecord& record) {
    if (record.samples.size() < 16) fail("beat analysis needs at least 16 samples");
    std::vector<cplx> v(record.samples.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = record.samples[i];
    ToneScan scan =
        scan_tones(std::move(v), record.samples.size(), record.sample_rate, false, 0.0);
    double f_lo, f_hi;
    tone_band(scan, record.sample_rate / static_cast<double>(record.samples.size()), f_lo, f_hi);
    std::vector<double> env = analytic_envelope(record.samples, record.sample_rate, f_lo, f_hi,
                                                false);
    std::vector<double> node_env;
    if (scan.freqs_mhz.size() == 2)
        node_env = analytic_envelope(record.samples, record.sample_rate, f_lo, f_hi, true);
    return beat_from_envelope(std::move(env), node_env, scan, record.dt_us());
}

BeatAnalysis beat_envelope(const ComplexRecord& record) {
    if (record.samples.size() < 16) fail("beat analysis needs at least 16 samples");
    ToneScan scan = scan_tones(record.samples, record.samples.size(), record.sample_rate, true,
                               record.lo_frequency_mhz);
    double f_lo, f_hi;
    tone_band(scan, record.sample_rate / static_cast<double>(record.samples.size()), f_lo, f_hi);
    const double lo = record.lo_frequency_mhz;
    std::vector<double> env =
        masked_envelope(record.samples, record.sample_rate, f_lo - lo, f_hi - lo, false);
    std::vector<double> node_env;
    if (scan.freqs_mhz.size() == 2)
        node_env = masked_envelope(record.samples, record.sample_rate, f_lo - lo, f_hi - lo, true);
    return beat_from_envelope(std::move(env), node_env, scan, record.dt_us());
}

}  // namespace ctsim
