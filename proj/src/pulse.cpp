#include "ctsim/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>

#include "ctsim/common.hpp"

namespace ctsim {
namespace {

double wrap_phase(double phi) {
    double p = std::fmod(phi, two_pi);
    if (p < 0.0) p += two_pi;
    return p;
}

void hash_bytes(uint64_t& h, const void* data, size_t n) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= 0x100000001b3ull;  // FNV-1a
    }
}

}  // namespace

std::string PulseSequence::hash() const {
    uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& p : pulses) {
        hash_bytes(h, p.label.data(), p.label.size());
        double fields[5] = {p.carrier_mhz, p.start_us, p.duration_us, p.phase_rad,
                            p.rabi_rad_per_us};
        hash_bytes(h, fields, sizeof fields);
        char pol = pol_char(p.pol);
        hash_bytes(h, &pol, 1);
    }
    double tail[3] = {record_start_us, record_duration_us, t_pp_us};
    hash_bytes(h, tail, sizeof tail);
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ValidationReport validate_sequence(const PulseSequence& seq) {
    ValidationReport r;
    double last_end = 0.0;
    for (size_t i = 0; i < seq.pulses.size(); ++i) {
        const Pulse& p = seq.pulses[i];
        if (!(p.duration_us > 0.0))
            r.issues.push_back("pulse '" + p.label + "' has non-positive duration");
        if (p.rabi_rad_per_us < 0.0)
            r.issues.push_back("pulse '" + p.label + "' has negative Rabi rate");
        if (i > 0 && p.start_us < seq.pulses[i - 1].start_us)
            r.issues.push_back("pulses are not time-ordered at '" + p.label + "'");
        for (size_t j = 0; j < i; ++j) {
            const Pulse& q = seq.pulses[j];
            bool overlap = p.start_us < q.end_us() && q.start_us < p.end_us();
            if (overlap && p.pol == q.pol) {
                r.issues.push_back("pulses '" + q.label + "' and '" + p.label +
                                   "' overlap on the same polarization channel");
            }
        }
        last_end = std::max(last_end, p.end_us());
    }
    if (seq.record_start_us < last_end)
        r.issues.push_back("record starts before the last pulse ends");
    return r;
}

PulseSequence build_pump_probe_sequence(const LevelGraph& g,
                                        const std::vector<PulseParams>& params,
                                        double t_pp_us, double guard_us,
                                        double record_duration_us) {
    if (t_pp_us < 0.0) fail("pump-probe delay must be >= 0");
    if (guard_us < 0.0) fail("guard time must be >= 0");
    if (params.empty()) fail("sequence has no pulses");

    PulseSequence seq;
    seq.t_pp_us = t_pp_us;
    seq.record_duration_us = record_duration_us;

    double t = 0.0;
    bool in_probe = false;
    for (const auto& pp : params) {
        if (!(pp.duration_us > 0.0))
            fail("pulse '" + pp.label + "' needs a positive duration");
        if (pp.area_pi < 0.0) fail("pulse '" + pp.label + "' needs a non-negative area");

        auto driven = g.with_label(pp.label);
        if (driven.empty()) fail("pulse label '" + pp.label + "' matches no graph transition");

        Pulse p;
        p.label = pp.label;
        p.pol = driven.front()->pol;  // validate_graph guarantees one pol per label
        double carrier = 0.0;
        for (const Transition* tr : driven) carrier += g.frequency(*tr);
        carrier /= static_cast<double>(driven.size());
        p.carrier_mhz = pp.carrier_override_mhz > 0.0 ? pp.carrier_override_mhz : carrier;
        p.duration_us = pp.duration_us;
        p.phase_rad = wrap_phase(pp.phase_rad);
        p.rabi_rad_per_us = pp.area_pi * pi / pp.duration_us;
        p.probe = pp.probe;

        if (pp.probe && !in_probe) {
            t += t_pp_us;  // the whole probe block shifts rigidly
            in_probe = true;
        } else if (!pp.probe && in_probe) {
            fail("pump pulse '" + pp.label + "' appears after the probe block started");
        }
        p.start_us = t;
        t = p.end_us() + guard_us;
        seq.pulses.push_back(p);
    }
    seq.record_start_us = t;

    ValidationReport r = validate_sequence(seq);
    if (!r.ok()) fail("invalid pulse sequence: " + r.joined());
    return seq;
}

std::vector<PulseSequence> apply_scan(const ScanContext& ctx, const ScanSpec& spec) {
    if (!ctx.graph) fail("scan context has no graph");
    if (spec.values.empty()) fail("scan has no values");

    std::vector<PulseSequence> out;
    out.reserve(spec.values.size());

    if (spec.kind == ScanKind::delay) {
        for (size_t i = 1; i < spec.values.size(); ++i) {
            if (!(spec.values[i] > spec.values[i - 1]))
                fail("delay scan values must be strictly increasing");
        }
        for (double v : spec.values) {
            out.push_back(build_pump_probe_sequence(*ctx.graph, ctx.params, v, ctx.guard_us,
                                                    ctx.record_duration_us));
        }
        return out;
    }

    bool found = false;
    for (const auto& pp : ctx.params) found = found || pp.label == spec.target;
    if (!found) fail("phase scan target '" + spec.target + "' is not a sequence pulse");

    for (double v : spec.values) {
        std::vector<PulseParams> mod = ctx.params;
        for (auto& pp : mod) {
            if (pp.label == spec.target) pp.phase_rad = v;
        }
        out.push_back(build_pump_probe_sequence(*ctx.graph, mod, ctx.base_t_pp_us, ctx.guard_us,
                                                ctx.record_duration_us));
    }
    return out;
}

}  // namespace ctsim
