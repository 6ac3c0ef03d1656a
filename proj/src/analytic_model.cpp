#include "ctsim/analytic_model.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ctsim/common.hpp"

namespace ctsim {

double ee_expectation(const QuantumState& state, const LevelGraph& g, const EeObservable& obs) {
    int ip = g.index_of({obs.doublet, Parity::plus});
    int im = g.index_of({obs.doublet, Parity::minus});
    if (ip < 0 || im < 0)
        fail("ee doublet " + obs.doublet.str() + " is missing a parity partner in the graph");
    const auto n = static_cast<Eigen::Index>(g.levels.size());
    if (state.rho.rows() != n || state.rho.cols() != n)
        fail("state dimension does not match the level graph");
    return 2.0 * state.rho(ip, im).real();
}

namespace {

double pump_prefactor(const AnalyticEeParams& p) {
    return std::sin(p.rabi_areas[0]) * std::sin(0.5 * p.rabi_areas[1]) *
           std::sin(0.5 * p.rabi_areas[2]);
}

double phase_offset(const AnalyticEeParams& p) {
    return p.phases[0] - p.phases[1] - p.phases[2];
}

}  // namespace

double analytic_ee(const AnalyticEeParams& params, double t_us) {
    if (!(params.tunneling_frequency_mhz > 0.0))
        fail("analytic ee requires a positive tunneling frequency");
    const double arg = two_pi * params.tunneling_frequency_mhz * t_us + phase_offset(params) +
                       params.accumulated_phase;
    return -pump_prefactor(params) * std::sin(arg);
}

PhaseFitReport fit_accumulated_phase(const AnalyticEeParams& params,
                                     const std::vector<double>& times_us,
                                     const std::vector<double>& values) {
    if (!(params.tunneling_frequency_mhz > 0.0))
        fail("accumulated-phase fit requires a positive tunneling frequency");
    if (times_us.size() != values.size())
        fail("accumulated-phase fit needs matching time and value arrays");
    if (times_us.size() < 8) fail("accumulated-phase fit needs at least 8 samples");

    const auto [t_min, t_max] = std::minmax_element(times_us.begin(), times_us.end());
    const double period = 1.0 / params.tunneling_frequency_mhz;
    if (*t_max - *t_min < period * (1.0 - 1e-9))
        fail("accumulated-phase fit needs samples spanning a full tunneling period");

    const auto [v_min, v_max] = std::minmax_element(values.begin(), values.end());
    if (*v_max - *v_min < 1e-13) fail("accumulated-phase fit got a flat trace");

    const double prefactor = pump_prefactor(params);
    if (std::abs(prefactor) < 1e-12)
        fail("the analytic amplitude vanishes for these pulse areas; the accumulated phase "
             "is undefined");

    // values ~ b1*cos(w t + dphi) + b2*sin(w t + dphi); matching the closed
    // form -A*|prefactor-signed| sin(w t + dphi + Phi) gives b1 = -S sin(Phi),
    // b2 = -S cos(Phi) with S the signed full amplitude.
    const double w = two_pi * params.tunneling_frequency_mhz;
    const double dphi = phase_offset(params);
    double scc = 0.0, sss = 0.0, scs = 0.0, scv = 0.0, ssv = 0.0;
    for (size_t i = 0; i < times_us.size(); ++i) {
        const double c = std::cos(w * times_us[i] + dphi);
        const double s = std::sin(w * times_us[i] + dphi);
        scc += c * c;
        sss += s * s;
        scs += c * s;
        scv += c * values[i];
        ssv += s * values[i];
    }
    const double det = scc * sss - scs * scs;
    if (std::abs(det) < 1e-12 * (scc + sss) * (scc + sss))
        fail("accumulated-phase fit basis is degenerate for this sampling");
    const double b1 = (sss * scv - scs * ssv) / det;
    const double b2 = (scc * ssv - scs * scv) / det;

    PhaseFitReport report;
    report.n_samples = times_us.size();
    report.amplitude = std::hypot(b1, b2);
    report.amplitude_scale = report.amplitude / std::abs(prefactor);

    double phi = std::atan2(b1, b2);
    if (prefactor > 0.0) phi -= pi;
    phi = std::fmod(phi, two_pi);
    if (phi < 0.0) phi += two_pi;
    report.accumulated_phase = phi;

    double ss_res = 0.0;
    for (size_t i = 0; i < times_us.size(); ++i) {
        const double model = b1 * std::cos(w * times_us[i] + dphi) +
                             b2 * std::sin(w * times_us[i] + dphi);
        const double r = values[i] - model;
        ss_res += r * r;
    }
    report.rms_residual = std::sqrt(ss_res / static_cast<double>(times_us.size()));
    return report;
}

std::string to_json(const PhaseFitReport& report) {
    nlohmann::json j;
    j["accumulated_phase_rad"] = report.accumulated_phase;
    j["amplitude"] = report.amplitude;
    j["amplitude_scale"] = report.amplitude_scale;
    j["rms_residual"] = report.rms_residual;
    j["n_samples"] = report.n_samples;
    return j.dump(2);
}

}  // namespace ctsim
