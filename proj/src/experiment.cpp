#include "ctsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace ctsim {

std::string default_config_text() {
    return R"(# 3-fluorobenzyl alcohol tunneling doublets and the microwave loop driven by
# the pump-probe sequence.  Energies are E/h in MHz, times in us.

[experiment]
name = 3fba_default
engine = rwa
guard_us = 0.02
temperature_k = 1.0
populate = 0 0 0 +, 0 0 0 -
seed = 1
rwa_cutoff_mhz = 20

[receiver]
polarization = x
gain = 1
noise_rms = 0

[record]
sample_rate_per_us = 25000
duration_us = 40
decay_time_us = 20

[analysis]
doublet = 1 0 1
listen = fLpm fLmp
filter_bandwidth_khz = 60
filter_order = 6
decimation = 250

# Ground-state doublet; the 0.818 MHz splitting sets the pump interference.
[level]
id = 0 0 0 +
energy_mhz = 0

[level]
id = 0 0 0 -
energy_mhz = 0.818

# 1_01 doublet, the handedness carrier: ee lives on its +/- coherence and
# oscillates at the 0.82 MHz splitting.
[level]
id = 1 0 1 +
energy_mhz = 1100

[level]
id = 1 0 1 -
energy_mhz = 1100.82

[level]
id = 1 1 0 +
energy_mhz = 1849.278

[level]
id = 1 1 0 -
energy_mhz = 1850.1

[level]
id = 2 0 2 +
energy_mhz = 3300

[level]
id = 2 0 2 -
energy_mhz = 3300.82

[level]
id = 2 1 1 +
energy_mhz = 7486.37

[level]
id = 2 1 1 -
energy_mhz = 7487.18

# Pump loop.  The counterpart legs form the parallel ladder out of 0_00-;
# they ride along off-resonantly under the same pulses.
[transition]
lower = 0 0 0 +
upper = 1 1 0 -
axis = c
label = f1

[transition]
lower = 0 0 0 -
upper = 1 1 0 +
axis = c
label = f1_counterpart
cycle = counterpart

[transition]
lower = 1 0 1 -
upper = 1 1 0 -
axis = b
label = f2

[transition]
lower = 1 0 1 +
upper = 1 1 0 +
axis = b
label = f2
cycle = counterpart

[transition]
lower = 0 0 0 +
upper = 1 0 1 +
axis = a
label = f3

[transition]
lower = 0 0 0 -
upper = 1 0 1 -
axis = a
label = f3
cycle = counterpart

# Probe ladder out of both 1_01 members, and the two listen lines the loop
# closes on.
[transition]
lower = 1 0 1 +
upper = 2 0 2 +
axis = a
label = f4

[transition]
lower = 1 0 1 -
upper = 2 0 2 -
axis = a
label = f4

[transition]
lower = 2 0 2 +
upper = 2 1 1 +
axis = b
label = f5

[transition]
lower = 2 0 2 -
upper = 2 1 1 -
axis = b
label = f5

[transition]
lower = 1 0 1 -
upper = 2 1 1 +
axis = c
label = fLpm

[transition]
lower = 1 0 1 +
upper = 2 1 1 -
axis = c
label = fLmp

# Pulse table.  f3 is pi/2, not the ideal pi: its counterpart leg is driven
# at full strength, and a pi area would invert 1_01- into 0_00- and erase the
# doublet coherence the loop just built.
[pulse]
label = f1
area_pi = 0.5
duration_us = 1

[pulse]
label = f2
area_pi = 1
duration_us = 1

[pulse]
label = f3
area_pi = 0.5
duration_us = 1

[pulse]
label = f4
area_pi = 0.5
duration_us = 1
probe = true

[pulse]
label = f5
area_pi = 1
duration_us = 1
probe = true
)";
}

namespace {

RotKey rot_key_from_string(const std::string& text) {
    std::istringstream in(text);
    RotKey k;
    std::string extra;
    if (!(in >> k.j >> k.ka >> k.kc) || (in >> extra))
        fail("expected 'J Ka Kc', got '" + text + "'");
    return k;
}

std::vector<LevelId> parse_populate(const std::string& text) {
    std::vector<LevelId> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) fail("empty entry in populate list");
        const auto e = item.find_last_not_of(" \t");
        out.push_back(level_id_from_string(item.substr(b, e - b + 1)));
    }
    return out;
}

std::vector<std::string> split_words(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

}  // namespace

ExperimentConfig experiment_from_config(const ConfigFile& cf) {
    ExperimentConfig cfg;
    cfg.graph = level_graph_from_config(cf);

    if (const ConfigSection* s = cf.unique_section("experiment")) {
        cfg.name = s->get_string("name", cfg.name);
        const std::string engine = s->get_string("engine", "rwa");
        if (engine == "rwa") {
            cfg.engine = Engine::rwa;
        } else if (engine == "direct") {
            cfg.engine = Engine::direct;
        } else {
            s->fail_at("engine", "engine must be 'rwa' or 'direct'");
        }
        cfg.guard_us = s->get_double("guard_us", cfg.guard_us);
        if (cfg.guard_us < 0.0) s->fail_at("guard_us", "guard time must be >= 0");
        cfg.thermal.temperature_k = s->get_double("temperature_k", cfg.thermal.temperature_k);
        if (s->has("populate")) {
            try {
                cfg.thermal.populate = parse_populate(s->get_string("populate"));
            } catch (const Error& e) {
                s->fail_at("populate", e.what());
            }
        }
        const long seed = s->get_int("seed", 1);
        if (seed < 0) s->fail_at("seed", "seed must be >= 0");
        cfg.seed = static_cast<std::uint64_t>(seed);
        cfg.engine_options.rwa_cutoff_mhz =
            s->get_double("rwa_cutoff_mhz", cfg.engine_options.rwa_cutoff_mhz);
        cfg.engine_options.direct_step_cycles =
            s->get_double("direct_step_cycles", cfg.engine_options.direct_step_cycles);
    }

    if (const ConfigSection* s = cf.unique_section("receiver")) {
        try {
            cfg.receiver.polarization = pol_from_string(s->get_string("polarization", "x"));
        } catch (const Error& e) {
            s->fail_at("polarization", e.what());
        }
        cfg.receiver.gain = s->get_double("gain", cfg.receiver.gain);
        cfg.receiver.noise_rms = s->get_double("noise_rms", cfg.receiver.noise_rms);
        if (cfg.receiver.noise_rms < 0.0) s->fail_at("noise_rms", "noise rms must be >= 0");
    }

    if (const ConfigSection* s = cf.unique_section("record")) {
        cfg.record.sample_rate = s->get_double("sample_rate_per_us", cfg.record.sample_rate);
        cfg.record.duration_us = s->get_double("duration_us", cfg.record.duration_us);
        cfg.record.decay_time_us = s->get_double("decay_time_us", cfg.record.decay_time_us);
        if (!(cfg.record.sample_rate > 0.0))
            s->fail_at("sample_rate_per_us", "sample rate must be positive");
        if (!(cfg.record.duration_us > 0.0))
            s->fail_at("duration_us", "record duration must be positive");
        if (!(cfg.record.decay_time_us > 0.0))
            s->fail_at("decay_time_us", "decay time constant must be positive");
    }

    if (const ConfigSection* s = cf.unique_section("analysis")) {
        if (s->has("doublet")) {
            try {
                cfg.analysis.doublet = rot_key_from_string(s->get_string("doublet"));
            } catch (const Error& e) {
                s->fail_at("doublet", e.what());
            }
        }
        if (s->has("listen")) cfg.analysis.listen_labels = split_words(s->get_string("listen"));
        cfg.analysis.filter_bandwidth_khz =
            s->get_double("filter_bandwidth_khz", cfg.analysis.filter_bandwidth_khz);
        cfg.analysis.filter_order =
            static_cast<int>(s->get_int("filter_order", cfg.analysis.filter_order));
        cfg.analysis.decimation =
            static_cast<int>(s->get_int("decimation", cfg.analysis.decimation));
        if (cfg.analysis.decimation < 1) s->fail_at("decimation", "decimation must be >= 1");
    }

    for (const ConfigSection* s : cf.sections_named("pulse")) {
        PulseParams p;
        p.label = s->get_string("label");
        p.area_pi = s->get_double("area_pi", p.area_pi);
        p.duration_us = s->get_double("duration_us", p.duration_us);
        p.phase_rad = s->get_double("phase_rad", p.phase_rad);
        p.probe = s->get_bool("probe", false);
        p.carrier_override_mhz = s->get_double("carrier_mhz", 0.0);
        if (!(p.duration_us > 0.0)) s->fail_at("duration_us", "duration must be positive");
        if (p.area_pi < 0.0) s->fail_at("area_pi", "area must be >= 0");
        if (cfg.graph.with_label(p.label).empty())
            s->fail_at("label", "'" + p.label + "' matches no graph transition");
        cfg.pulses.push_back(p);
    }

    for (const auto& label : cfg.analysis.listen_labels) {
        const auto matches = cfg.graph.with_label(label);
        if (matches.size() != 1)
            fail(cf.source + ": listen label '" + label + "' must match exactly one transition");
    }
    if (cfg.graph.index_of({cfg.analysis.doublet, Parity::plus}) < 0 ||
        cfg.graph.index_of({cfg.analysis.doublet, Parity::minus}) < 0)
        fail(cf.source + ": analysis doublet " + cfg.analysis.doublet.str() +
             " is missing a parity partner");
    return cfg;
}

ExperimentConfig default_experiment() {
    return experiment_from_config(parse_config_text(default_config_text(), "<default config>"));
}

ExperimentConfig isolated_variant(const ExperimentConfig& cfg) {
    ExperimentConfig out = cfg;
    out.graph = drop_counterpart(cfg.graph);
    out.thermal.populate = {LevelId{{0, 0, 0}, Parity::plus}};
    return out;
}

ExperimentConfig isolated_pump_cycle(const ExperimentConfig& cfg) {
    ExperimentConfig out = isolated_variant(cfg);

    std::set<std::string> pump_labels;
    std::vector<PulseParams> pump_pulses;
    for (const auto& p : out.pulses) {
        if (p.probe) continue;
        pump_labels.insert(p.label);
        pump_pulses.push_back(p);
    }
    if (pump_pulses.empty()) fail("the pulse table has no pump pulses");

    LevelGraph trimmed;
    std::set<LevelId> keep;
    for (const auto& t : out.graph.transitions) {
        if (pump_labels.count(t.label)) {
            keep.insert(t.lower);
            keep.insert(t.upper);
        }
    }
    for (const auto& lv : out.graph.levels) {
        if (keep.count(lv.id)) trimmed.levels.push_back(lv);
    }
    for (const auto& t : out.graph.transitions) {
        if (pump_labels.count(t.label)) trimmed.transitions.push_back(t);
    }
    require_valid(trimmed);

    out.graph = std::move(trimmed);
    out.pulses = std::move(pump_pulses);
    out.analysis.listen_labels.clear();
    return out;
}

void scale_experiment(ExperimentConfig& cfg, double factor) {
    if (!(factor > 0.0)) fail("experiment scale factor must be positive");
    cfg.graph = scale_energies(cfg.graph, factor);
    for (auto& p : cfg.pulses) {
        p.duration_us *= factor;
        if (p.carrier_override_mhz > 0.0) p.carrier_override_mhz /= factor;
    }
    cfg.guard_us *= factor;
    cfg.record.sample_rate /= factor;
    cfg.record.duration_us *= factor;
    cfg.record.decay_time_us *= factor;
    cfg.engine_options.rwa_cutoff_mhz /= factor;
}

PulseSequence build_sequence(const ExperimentConfig& cfg, double t_pp_us) {
    return build_pump_probe_sequence(cfg.graph, cfg.pulses, t_pp_us, cfg.guard_us,
                                     cfg.record.duration_us);
}

QuantumState initial_state(const ExperimentConfig& cfg) {
    return thermal_state(cfg.graph, cfg.thermal);
}

double listen_frequency(const ExperimentConfig& cfg, const std::string& label) {
    const auto matches = cfg.graph.with_label(label);
    if (matches.size() != 1)
        fail("listen label '" + label + "' must match exactly one transition");
    return cfg.graph.frequency(*matches.front());
}

std::uint64_t point_seed(std::uint64_t base_seed, std::size_t point_index) {
    return base_seed ^ (0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(point_index) + 1));
}

std::vector<double> default_delay_values() {
    std::vector<double> v;
    for (int i = 0; i <= 13; ++i) v.push_back(0.1 * i);
    return v;
}

std::vector<double> default_phase_values() {
    std::vector<double> v;
    for (int i = 0; i <= 12; ++i) v.push_back(pi / 6.0 * i);
    return v;
}

namespace {

ScanResult run_scan(const ExperimentConfig& cfg, const ScanSpec& spec,
                    const std::string& scan_label, const ScanOptions& opt) {
    if (cfg.analysis.listen_labels.size() != 2)
        fail("scans need exactly two listen labels in the analysis section");

    ScanResult result;
    result.kind = spec.kind;
    result.scan_label = scan_label;
    result.listen_labels = cfg.analysis.listen_labels;
    for (const auto& label : cfg.analysis.listen_labels)
        result.listen_freqs_mhz.push_back(listen_frequency(cfg, label));
    for (const auto& t : cfg.graph.transitions)
        result.counterpart_active = result.counterpart_active || t.counterpart;

    ScanContext ctx;
    ctx.graph = &cfg.graph;
    ctx.params = cfg.pulses;
    ctx.guard_us = cfg.guard_us;
    ctx.record_duration_us = cfg.record.duration_us;
    const auto sequences = apply_scan(ctx, spec);
    const QuantumState s0 = initial_state(cfg);

    const double f_plus = result.listen_freqs_mhz[0];
    const double f_minus = result.listen_freqs_mhz[1];
    const double lo = 0.5 * (f_plus + f_minus);
    const double band = 0.75 * std::abs(f_plus - f_minus);
    result.waterfall_rate = cfg.record.sample_rate / cfg.analysis.decimation;
    result.waterfall_lo_mhz = lo;

    result.points.resize(sequences.size());
    std::atomic<std::size_t> next{0};

    auto run_point = [&](std::size_t i) {
        ScanPoint& point = result.points[i];
        point.scan_value = spec.values[i];
        try {
            const PulseSequence& seq = sequences[i];
            point.sequence_hash = seq.hash();
            Trajectory traj = run_sequence(s0, cfg.graph, seq, cfg.engine, cfg.engine_options);

            FidRecord fid = synthesize_fid(traj.final_state(), cfg.graph, cfg.receiver,
                                           cfg.record, point_seed(cfg.seed, i));
            fid.metadata["sequence_hash"] = point.sequence_hash;
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.12g", point.scan_value);
            fid.metadata["scan_value"] = buf;

            const auto extraction = spectral_extract_resolved(fid, result.listen_freqs_mhz);
            point.plus = extraction.points[0];
            point.minus = extraction.points[1];
            if (!point.plus.phase_defined || !point.minus.phase_defined) {
                point.error = "listen-line amplitude vanished; phase undefined";
            } else {
                point.ok = true;
            }

            if (opt.waterfall) {
                const ComplexRecord mixed = down_mix(fid, lo, cfg.analysis.decimation, band);
                BandpassSpec bp;
                bp.bandwidth_khz = cfg.analysis.filter_bandwidth_khz;
                bp.order = cfg.analysis.filter_order;
                bp.center_mhz = f_plus;
                const ComplexRecord a = butterworth_bandpass(mixed, bp);
                bp.center_mhz = f_minus;
                const ComplexRecord b = butterworth_bandpass(mixed, bp);
                const auto want = static_cast<std::size_t>(
                    std::lround(opt.waterfall_window_us * mixed.sample_rate));
                const std::size_t n = std::min(want, mixed.samples.size());
                point.waterfall.resize(n);
                for (std::size_t j = 0; j < n; ++j)
                    point.waterfall[j] = (a.samples[j] + b.samples[j]).real();
            }
        } catch (const std::exception& e) {
            point.ok = false;
            point.error = e.what();
        }
    };

    int workers = opt.workers > 0 ? opt.workers
                                  : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = std::min<int>(workers, static_cast<int>(sequences.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < sequences.size(); ++i) run_point(i);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < sequences.size(); i = next++) run_point(i);
            });
        }
        for (auto& th : pool) th.join();
    }

    finalize_scan(result);
    return result;
}

}  // namespace

ScanResult run_delay_scan(const ExperimentConfig& cfg, const std::vector<double>& delays_us,
                          const ScanOptions& opt) {
    ScanSpec spec;
    spec.kind = ScanKind::delay;
    spec.values = delays_us;
    return run_scan(cfg, spec, "t_pp_us", opt);
}

ScanResult run_phase_scan(const ExperimentConfig& cfg, const std::string& target_label,
                          const std::vector<double>& phases_rad, const ScanOptions& opt) {
    ScanSpec spec;
    spec.kind = ScanKind::pulse_phase;
    spec.target = target_label;
    spec.values = phases_rad;
    return run_scan(cfg, spec, "phi_" + target_label + "_rad", opt);
}

void finalize_scan(ScanResult& result) {
    result.n_failed = 0;
    std::vector<double> x, ph_plus, ph_minus;
    for (const auto& p : result.points) {
        if (!p.ok) {
            ++result.n_failed;
            continue;
        }
        x.push_back(p.scan_value);
        ph_plus.push_back(p.plus.phase_rad);
        ph_minus.push_back(p.minus.phase_rad);
    }

    const std::size_t n = result.points.size();
    result.ok = n > 0 && result.n_failed * 5 <= n && x.size() >= 3;
    if (x.size() < 3) return;

    result.fit_plus = unwrap_and_fit(x, ph_plus);
    result.fit_minus = unwrap_and_fit(x, ph_minus);
    if (result.kind == ScanKind::delay) {
        result.nu_fit_mhz =
            (std::abs(result.fit_plus.slope) + std::abs(result.fit_minus.slope)) / (2.0 * two_pi);
        result.nu_fit_stderr_mhz =
            std::hypot(result.fit_plus.slope_stderr, result.fit_minus.slope_stderr) /
            (2.0 * two_pi);
    } else {
        result.constrained_plus =
            unwrap_and_fit(x, ph_plus, result.fit_plus.slope >= 0.0 ? 1.0 : -1.0);
        result.constrained_minus =
            unwrap_and_fit(x, ph_minus, result.fit_minus.slope >= 0.0 ? 1.0 : -1.0);
    }
}

namespace {

std::string format_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void amplitude_spread(const ScanResult& result, double& spread, bool& any) {
    double lo = 0.0, hi = 0.0;
    any = false;
    for (const auto& p : result.points) {
        if (!p.ok) continue;
        for (double a : {p.plus.amplitude, p.minus.amplitude}) {
            if (!any) {
                lo = hi = a;
                any = true;
            } else {
                lo = std::min(lo, a);
                hi = std::max(hi, a);
            }
        }
    }
    spread = (any && lo > 0.0) ? hi / lo - 1.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

std::vector<CheckResult> evaluate_scan_checks(const ScanResult& result) {
    std::vector<CheckResult> checks;
    const std::size_t n = result.points.size();

    {
        CheckResult c;
        c.name = "point-failures";
        c.pass = n > 0 && result.n_failed * 5 <= n;
        c.detail = std::to_string(result.n_failed) + " of " + std::to_string(n) +
                   " points failed (limit 20%)";
        checks.push_back(c);
    }

    const bool fitted = result.ok || (n - result.n_failed >= 3);
    for (int side = 0; side < 2; ++side) {
        const LinearFit& fit = side == 0 ? result.fit_plus : result.fit_minus;
        CheckResult c;
        c.name = side == 0 ? "linearity-plus" : "linearity-minus";
        if (!fitted) {
            c.detail = "not enough points to fit";
        } else {
            c.pass = fit.r_squared > 0.99;
            c.detail = "R^2 = " + format_g(fit.r_squared) + " (needs > 0.99)";
        }
        checks.push_back(c);
    }

    {
        CheckResult c;
        c.name = "opposite-slopes";
        if (!fitted) {
            c.detail = "not enough points to fit";
        } else {
            c.pass = result.fit_plus.slope * result.fit_minus.slope < 0.0;
            c.detail = "slopes " + format_g(result.fit_plus.slope) + " and " +
                       format_g(result.fit_minus.slope) + " rad per unit";
        }
        checks.push_back(c);
    }

    {
        CheckResult c;
        c.name = "amplitude-stability";
        double spread = 0.0;
        bool any = false;
        amplitude_spread(result, spread, any);
        if (result.kind == ScanKind::pulse_phase && result.counterpart_active) {
            c.pass = true;
            c.detail = "informational: spread " + format_g(spread) +
                       "; the counterpart ladder modulates phase-scan amplitudes";
        } else {
            const double limit = result.kind == ScanKind::delay ? 0.10 : 0.01;
            c.pass = any && spread <= limit;
            c.detail = "max/min - 1 = " + format_g(spread) + " (limit " + format_g(limit) + ")";
        }
        checks.push_back(c);
    }
    return checks;
}

void emit_report(const ScanResult& result, const ReportPaths& paths) {
    if (!paths.points_csv.empty()) {
        std::FILE* f = std::fopen(paths.points_csv.c_str(), "w");
        if (!f) fail("cannot open '" + paths.points_csv + "' for writing");
        std::fprintf(f, "%s,I_plus,phi_plus,I_minus,phi_minus\n", result.scan_label.c_str());
        for (const auto& p : result.points) {
            if (p.ok) {
                std::fprintf(f, "%.12g,%.12g,%.12g,%.12g,%.12g\n", p.scan_value,
                             p.plus.amplitude, p.plus.phase_rad, p.minus.amplitude,
                             p.minus.phase_rad);
            } else {
                std::fprintf(f, "%.12g,nan,nan,nan,nan\n", p.scan_value);
            }
        }
        if (std::fclose(f) != 0) fail("failed to write '" + paths.points_csv + "'");
    }

    if (!paths.fits_json.empty()) {
        nlohmann::json j;
        j["scan"] = result.scan_label;
        j["kind"] = result.kind == ScanKind::delay ? "delay" : "phase";
        j["ok"] = result.ok;
        j["n_points"] = result.points.size();
        j["n_failed"] = result.n_failed;
        j["counterpart_active"] = result.counterpart_active;
        for (int side = 0; side < 2; ++side) {
            nlohmann::json line;
            line["label"] = result.listen_labels[side];
            line["frequency_mhz"] = result.listen_freqs_mhz[side];
            const LinearFit& fit = side == 0 ? result.fit_plus : result.fit_minus;
            line["slope"] = fit.slope;
            line["intercept"] = fit.intercept;
            line["r_squared"] = fit.r_squared;
            line["slope_stderr"] = fit.slope_stderr;
            if (result.kind == ScanKind::pulse_phase) {
                const LinearFit& con =
                    side == 0 ? result.constrained_plus : result.constrained_minus;
                line["constrained_slope"] = con.slope;
                line["constrained_r_squared"] = con.r_squared;
            }
            j["listen"].push_back(line);
        }
        if (result.kind == ScanKind::delay) {
            j["nu_fit_mhz"] = result.nu_fit_mhz;
            j["nu_fit_stderr_mhz"] = result.nu_fit_stderr_mhz;
        }
        j["failures"] = nlohmann::json::array();
        for (std::size_t i = 0; i < result.points.size(); ++i) {
            if (result.points[i].ok) continue;
            nlohmann::json e;
            e["index"] = i;
            e["value"] = result.points[i].scan_value;
            e["error"] = result.points[i].error;
            j["failures"].push_back(e);
        }
        j["checks"] = nlohmann::json::array();
        for (const auto& c : evaluate_scan_checks(result)) {
            nlohmann::json e;
            e["name"] = c.name;
            e["pass"] = c.pass;
            e["detail"] = c.detail;
            j["checks"].push_back(e);
        }

        std::ofstream out(paths.fits_json);
        if (!out) fail("cannot open '" + paths.fits_json + "' for writing");
        out << j.dump(2) << "\n";
        if (!out) fail("failed to write '" + paths.fits_json + "'");
    }

    if (!paths.waterfall_csv.empty()) {
        std::size_t rows = 0;
        for (const auto& p : result.points) rows = std::max(rows, p.waterfall.size());
        std::FILE* f = std::fopen(paths.waterfall_csv.c_str(), "w");
        if (!f) fail("cannot open '" + paths.waterfall_csv + "' for writing");
        std::fputs("time_us", f);
        const char* prefix = result.kind == ScanKind::delay ? "tpp" : "phi";
        for (const auto& p : result.points)
            std::fprintf(f, ",%s_%.6g", prefix, p.scan_value);
        std::fputc('\n', f);
        const double dt = result.waterfall_rate > 0.0 ? 1.0 / result.waterfall_rate : 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
            std::fprintf(f, "%.12g", static_cast<double>(r) * dt);
            for (const auto& p : result.points) {
                if (r < p.waterfall.size()) {
                    std::fprintf(f, ",%.12g", p.waterfall[r]);
                } else {
                    std::fputs(",nan", f);
                }
            }
            std::fputc('\n', f);
        }
        if (std::fclose(f) != 0) fail("failed to write '" + paths.waterfall_csv + "'");
    }
}

}  // namespace ctsim
