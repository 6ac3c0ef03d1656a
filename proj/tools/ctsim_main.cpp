#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctsim/analytic_model.hpp"
#include "ctsim/dsp.hpp"
#include "ctsim/experiment.hpp"
#include "ctsim/signal_synth.hpp"

namespace {

using namespace ctsim;

struct CommonOpts {
    std::string config_path;
    std::string engine = "rwa";
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int workers = 0;
    double noise_rms = 0.0;
    double frequency_scale = 1.0;
    bool isolated = false;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("config", opts.config_path, "experiment config file (omit for the built-in 3FBA setup)")
        ->check(CLI::ExistingFile);
    sub->add_option("--engine", opts.engine, "propagation engine: rwa or direct");
    sub->add_option("--seed", opts.seed, "base noise seed");
    sub->add_option("--workers", opts.workers, "scan worker threads (0 = hardware)");
    sub->add_option("--out-dir", opts.out_dir, "directory for emitted files");
    sub->add_option("--noise", opts.noise_rms, "receiver noise rms (overrides config)");
    sub->add_option("--frequency-scale", opts.frequency_scale,
                    "divide energies and stretch times by this factor");
    sub->add_flag("--isolated", opts.isolated,
                  "drop counterpart transitions and populate only the lower ground level");
}

ExperimentConfig load_experiment(const CLI::App* sub, const CommonOpts& opts) {
    ExperimentConfig cfg = opts.config_path.empty()
                               ? default_experiment()
                               : experiment_from_config(load_config_file(opts.config_path));
    if (sub->count("--engine")) {
        if (opts.engine == "rwa") {
            cfg.engine = Engine::rwa;
        } else if (opts.engine == "direct") {
            cfg.engine = Engine::direct;
        } else {
            fail("unknown engine '" + opts.engine + "' (expected rwa or direct)");
        }
    }
    if (sub->count("--seed")) cfg.seed = opts.seed;
    if (sub->count("--noise")) cfg.receiver.noise_rms = opts.noise_rms;
    if (opts.isolated) cfg = isolated_variant(cfg);
    if (sub->count("--frequency-scale")) scale_experiment(cfg, opts.frequency_scale);
    return cfg;
}

std::string out_path(const CommonOpts& opts, const std::string& name) {
    std::filesystem::create_directories(opts.out_dir);
    return (std::filesystem::path(opts.out_dir) / name).string();
}

std::vector<double> parse_range(const std::string& text) {
    double a = 0.0, b = 0.0, s = 0.0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &a, &b, &s, &tail) != 3)
        fail("range '" + text + "' is not of the form start:stop:step");
    if (!(s > 0.0)) fail("range step must be positive");
    if (b < a) fail("range stop is before its start");
    const int n = static_cast<int>(std::floor((b - a) / s + 1e-9));
    std::vector<double> values;
    for (int i = 0; i <= n; ++i) values.push_back(a + s * i);
    return values;
}

int report_scan(const ScanResult& result, const CommonOpts& opts, const std::string& stem,
                bool waterfall) {
    ReportPaths paths;
    paths.points_csv = out_path(opts, stem + "_points.csv");
    paths.fits_json = out_path(opts, stem + "_fits.json");
    if (waterfall) paths.waterfall_csv = out_path(opts, stem + "_waterfall.csv");
    emit_report(result, paths);

    bool all_pass = true;
    for (const auto& c : evaluate_scan_checks(result)) {
        all_pass = all_pass && c.pass;
        std::printf("[%s] %s: %s\n", c.pass ? "pass" : "FAIL", c.name.c_str(), c.detail.c_str());
    }
    if (result.kind == ScanKind::delay)
        std::printf("nu_fit = %.6f +/- %.6f MHz\n", result.nu_fit_mhz, result.nu_fit_stderr_mhz);
    for (const std::string& p : {paths.points_csv, paths.fits_json, paths.waterfall_csv})
        if (!p.empty()) std::printf("wrote %s\n", p.c_str());
    return all_pass ? 0 : 1;
}

int cmd_validate(const CLI::App* sub, const CommonOpts& opts) {
    ExperimentConfig cfg = load_experiment(sub, opts);
    require_valid(cfg.graph);
    const PulseSequence seq = build_sequence(cfg, 0.0);
    std::printf("%s: %zu levels, %zu transitions, %zu pulses\n", cfg.name.c_str(),
                cfg.graph.levels.size(), cfg.graph.transitions.size(), cfg.pulses.size());
    for (const auto& p : seq.pulses)
        std::printf("  %-6s %11.4f MHz  area %.3g pi  t = %.3f..%.3f us\n", p.label.c_str(),
                    p.carrier_mhz, p.rabi_rad_per_us * p.duration_us / pi, p.start_us,
                    p.end_us());
    for (const auto& label : cfg.analysis.listen_labels)
        std::printf("  listen %-6s %11.4f MHz\n", label.c_str(), listen_frequency(cfg, label));
    std::printf("  record %.3f..%.3f us, doublet splitting %.6g MHz\n", seq.record_start_us,
                seq.record_start_us + seq.record_duration_us,
                tunneling_splitting(cfg.graph, cfg.analysis.doublet));
    std::puts("config ok");
    return 0;
}

int cmd_simulate(const CLI::App* sub, const CommonOpts& opts, double t_pp) {
    ExperimentConfig cfg = load_experiment(sub, opts);
    const PulseSequence seq = build_sequence(cfg, t_pp);
    const Trajectory traj =
        run_sequence(initial_state(cfg), cfg.graph, seq, cfg.engine, cfg.engine_options);

    EeObservable obs;
    obs.doublet = cfg.analysis.doublet;
    const std::string traj_path = out_path(opts, "trajectory.csv");
    std::FILE* f = std::fopen(traj_path.c_str(), "w");
    if (!f) fail("cannot open '" + traj_path + "' for writing");
    std::fputs("time_us", f);
    for (const auto& lv : cfg.graph.levels) std::fprintf(f, ",pop_%s", lv.id.str().c_str());
    std::fputs(",ee_re,ee_im\n", f);
    const int ip = cfg.graph.index_of({obs.doublet, Parity::plus});
    const int im = cfg.graph.index_of({obs.doublet, Parity::minus});
    for (const auto& state : traj.boundaries) {
        std::fprintf(f, "%.12g", state.time_us);
        for (int i = 0; i < state.rho.rows(); ++i)
            std::fprintf(f, ",%.12g", state.rho(i, i).real());
        const cplx c = ip >= 0 && im >= 0 ? cplx(state.rho(ip, im)) : cplx(0.0);
        std::fprintf(f, ",%.12g,%.12g\n", c.real(), c.imag());
    }
    if (std::fclose(f) != 0) fail("failed to write '" + traj_path + "'");

    FidRecord fid =
        synthesize_fid(traj.final_state(), cfg.graph, cfg.receiver, cfg.record, cfg.seed);
    write_fid_csv(fid, out_path(opts, "fid.csv"));
    write_fid_binary(fid, out_path(opts, "fid.f64"), out_path(opts, "fid.json"));

    std::printf("ee at record start = %.6g\n", ee_expectation(traj.final_state(), cfg.graph, obs));
    if (!cfg.analysis.listen_labels.empty()) {
        std::vector<double> freqs;
        for (const auto& label : cfg.analysis.listen_labels)
            freqs.push_back(listen_frequency(cfg, label));
        const auto ex = spectral_extract(fid, freqs);
        for (std::size_t i = 0; i < freqs.size(); ++i)
            std::printf("listen %-6s %11.4f MHz: amplitude %.6g, phase %.6f rad\n",
                        cfg.analysis.listen_labels[i].c_str(), freqs[i], ex.points[i].amplitude,
                        ex.points[i].phase_rad);
        for (const auto& w : ex.warnings) std::printf("warning: %s\n", w.c_str());
    }
    for (const auto& w : fid.warnings) std::printf("warning: %s\n", w.c_str());
    std::printf("wrote %s, fid.csv, fid.f64 (+ fid.json sidecar)\n", traj_path.c_str());
    return 0;
}

int cmd_analyze(const CLI::App* sub, const CommonOpts& opts, const std::string& data_path,
                const std::string& sidecar_path) {
    const FidRecord fid = read_fid_binary(data_path, sidecar_path);
    std::printf("record: %zu samples at %.6g per us, %.6g us\n", fid.samples.size(),
                fid.sample_rate, fid.duration_us);

    const BeatAnalysis beat = beat_envelope(fid);
    std::printf("tones:");
    for (double t : beat.tone_freqs_mhz) std::printf(" %.6f", t);
    std::printf(" MHz (fft bin %.6g MHz)\n", beat.fft_bin_mhz);
    std::printf("carrier estimate = %.6f MHz\n", beat.carrier_estimate_mhz);
    if (beat.node_times_us.empty()) {
        std::puts("no envelope nodes (single tone)");
    } else {
        std::printf("envelope nodes at:");
        for (double t : beat.node_times_us) std::printf(" %.5f", t);
        std::puts(" us");
    }

    ExperimentConfig cfg = load_experiment(sub, opts);
    std::vector<double> freqs;
    for (const auto& label : cfg.analysis.listen_labels)
        freqs.push_back(listen_frequency(cfg, label));
    if (!freqs.empty()) {
        const auto ex = spectral_extract(fid, freqs);
        for (std::size_t i = 0; i < freqs.size(); ++i)
            std::printf("listen %-6s %11.4f MHz: amplitude %.6g, phase %.6f rad\n",
                        cfg.analysis.listen_labels[i].c_str(), freqs[i], ex.points[i].amplitude,
                        ex.points[i].phase_rad);
        for (const auto& w : ex.warnings) std::printf("warning: %s\n", w.c_str());
    }

    if (sub->count("--out-dir")) {
        const std::string env_path = out_path(opts, "envelope.csv");
        std::FILE* f = std::fopen(env_path.c_str(), "w");
        if (!f) fail("cannot open '" + env_path + "' for writing");
        std::fputs("time_us,envelope\n", f);
        for (std::size_t i = 0; i < beat.envelope.size(); ++i)
            std::fprintf(f, "%.12g,%.12g\n", static_cast<double>(i) * fid.dt_us(),
                         beat.envelope[i]);
        if (std::fclose(f) != 0) fail("failed to write '" + env_path + "'");
        std::printf("wrote %s\n", env_path.c_str());
    }
    return 0;
}

int cmd_filter_design(double center, double bandwidth_khz, int order, double rate) {
    BandpassSpec spec;
    spec.center_mhz = center;
    spec.bandwidth_khz = bandwidth_khz;
    spec.order = order;
    std::fputs(design_report(design_bandpass(spec, rate)).c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coherent-tunneling pump-probe simulator"};
    app.require_subcommand(1);

    CommonOpts opts;
    double t_pp = 0.0;
    std::string delay_range = "0:1.3:0.1";
    double phase_step = pi / 6.0;
    std::string phase_target = "f2";
    bool waterfall = false;
    std::string fid_data, fid_sidecar;
    double filter_center = 6386.365, filter_rate = 100.0, filter_bandwidth = 60.0;
    int filter_order = 6;

    CLI::App* validate = app.add_subcommand("validate", "load and check a config");
    add_common(validate, opts);

    CLI::App* simulate = app.add_subcommand("simulate", "run one pump-probe sequence");
    add_common(simulate, opts);
    simulate->add_option("--t-pp", t_pp, "probe-block delay in us");

    CLI::App* scan_delay = app.add_subcommand("scan-delay", "scan the probe delay");
    add_common(scan_delay, opts);
    scan_delay->add_option("--delay-range", delay_range, "start:stop:step in us");
    scan_delay->add_flag("--waterfall", waterfall, "emit filtered listen-band traces");

    CLI::App* scan_phase = app.add_subcommand("scan-phase", "scan one pulse phase");
    add_common(scan_phase, opts);
    scan_phase->add_option("--target", phase_target, "pulse label to scan");
    scan_phase->add_option("--phase-step", phase_step, "step in rad (scan covers 0..2pi)");
    scan_phase->add_flag("--waterfall", waterfall, "emit filtered listen-band traces");

    CLI::App* analyze = app.add_subcommand("analyze", "re-analyze a stored FID");
    analyze->add_option("data", fid_data, "flat float64 sample file")
        ->required()
        ->check(CLI::ExistingFile);
    analyze->add_option("sidecar", fid_sidecar, "JSON sidecar path")
        ->required()
        ->check(CLI::ExistingFile);
    add_common(analyze, opts);

    CLI::App* filter = app.add_subcommand("filter-design", "print bandpass coefficients");
    filter->add_option("--center", filter_center, "band center in MHz");
    filter->add_option("--bandwidth-khz", filter_bandwidth, "bandwidth in kHz");
    filter->add_option("--order", filter_order, "filter order (positive even)");
    filter->add_option("--rate", filter_rate, "record sample rate per us");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate(validate, opts);
        if (simulate->parsed()) return cmd_simulate(simulate, opts, t_pp);
        if (scan_delay->parsed()) {
            ScanOptions so;
            so.workers = opts.workers;
            so.waterfall = waterfall;
            const ExperimentConfig cfg = load_experiment(scan_delay, opts);
            const ScanResult result = run_delay_scan(cfg, parse_range(delay_range), so);
            return report_scan(result, opts, "delay", waterfall);
        }
        if (scan_phase->parsed()) {
            if (!(phase_step > 0.0)) fail("phase step must be positive");
            std::vector<double> phases;
            const int n = static_cast<int>(std::floor(two_pi / phase_step + 1e-9));
            for (int i = 0; i <= n; ++i) phases.push_back(phase_step * i);
            ScanOptions so;
            so.workers = opts.workers;
            so.waterfall = waterfall;
            const ExperimentConfig cfg = load_experiment(scan_phase, opts);
            const ScanResult result = run_phase_scan(cfg, phase_target, phases, so);
            return report_scan(result, opts, "phase_" + phase_target, waterfall);
        }
        if (analyze->parsed()) return cmd_analyze(analyze, opts, fid_data, fid_sidecar);
        if (filter->parsed())
            return cmd_filter_design(filter_center, filter_bandwidth, filter_order, filter_rate);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
