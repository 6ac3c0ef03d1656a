#include "ctsim/propagator.hpp"

#include <algorithm>
#include <cmath>

#include "ctsim/common.hpp"

namespace ctsim {
namespace {

struct DriveTerm {
    int upper = 0;
    int lower = 0;
    double strength = 0.0;  // coupling * Omega, rad/us (full oscillating amplitude)
};

std::vector<const Transition*> addressed_transitions(const LevelGraph& g, const Pulse& p,
                                                     double cutoff_mhz) {
    std::vector<const Transition*> out;
    for (const auto& t : g.transitions) {
        if (t.pol != p.pol) continue;
        if (std::abs(g.frequency(t) - p.carrier_mhz) <= cutoff_mhz) out.push_back(&t);
    }
    return out;
}

// n_upper = n_lower + 1 across every driven transition; one rotating frame
// per carrier photon absorbed.  Levels the pulse never reaches keep n = 0.
std::vector<int> photon_ladder(const LevelGraph& g, const Pulse& p,
                               const std::vector<const Transition*>& driven) {
    const int n = static_cast<int>(g.levels.size());
    std::vector<int> photon(n, 0);
    std::vector<bool> assigned(n, false);

    struct Edge {
        int other;
        int delta;
    };
    std::vector<std::vector<Edge>> adj(n);
    for (const Transition* t : driven) {
        int l = g.require_index(t->lower);
        int u = g.require_index(t->upper);
        adj[l].push_back({u, +1});
        adj[u].push_back({l, -1});
    }

    for (int root = 0; root < n; ++root) {
        if (assigned[root] || adj[root].empty()) continue;
        assigned[root] = true;
        photon[root] = 0;
        std::vector<int> stack{root};
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (const Edge& e : adj[v]) {
                int want = photon[v] + e.delta;
                if (!assigned[e.other]) {
                    assigned[e.other] = true;
                    photon[e.other] = want;
                    stack.push_back(e.other);
                } else if (photon[e.other] != want) {
                    fail("pulse '" + p.label +
                         "' drives a loop with an inconsistent photon count; no single "
                         "rotating frame exists");
                }
            }
        }
    }
    return photon;
}

void require_square(const QuantumState& s, const LevelGraph& g) {
    const auto n = static_cast<Eigen::Index>(g.levels.size());
    if (s.rho.rows() != n || s.rho.cols() != n)
        fail("state dimension does not match the level graph");
}

}  // namespace

QuantumState thermal_state(const LevelGraph& g, const ThermalSpec& spec) {
    std::vector<double> p = thermal_populations(g, spec.temperature_k, spec.populate);
    QuantumState s;
    s.rho = Eigen::MatrixXcd::Zero(p.size(), p.size());
    for (size_t i = 0; i < p.size(); ++i) s.rho(i, i) = p[i];
    return s;
}

QuantumState pure_state(const LevelGraph& g, const LevelId& id) {
    QuantumState s;
    const auto n = static_cast<Eigen::Index>(g.levels.size());
    s.rho = Eigen::MatrixXcd::Zero(n, n);
    int i = g.require_index(id);
    s.rho(i, i) = 1.0;
    return s;
}

StateCheck check_state(const QuantumState& s) {
    StateCheck c;
    c.trace_error = std::abs(s.rho.trace() - cplx(1.0, 0.0));
    c.hermiticity_error = (s.rho - s.rho.adjoint()).cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        0.5 * (s.rho + s.rho.adjoint()), Eigen::EigenvaluesOnly);
    c.min_eigenvalue = es.eigenvalues().minCoeff();
    return c;
}

QuantumState propagate_free(const QuantumState& s, const LevelGraph& g, double duration_us) {
    require_square(s, g);
    if (duration_us < 0.0) fail("free evolution duration must be >= 0");
    const auto n = s.rho.rows();
    Eigen::VectorXcd u(n);
    for (Eigen::Index m = 0; m < n; ++m)
        u(m) = std::polar(1.0, -two_pi * g.levels[m].energy_mhz * duration_us);
    QuantumState out;
    out.rho = u.asDiagonal() * s.rho * u.asDiagonal().toDenseMatrix().adjoint();
    out.time_us = s.time_us + duration_us;
    return out;
}

QuantumState propagate_pulse_rwa(const QuantumState& s, const LevelGraph& g, const Pulse& p,
                                 const EngineOptions& opt) {
    require_square(s, g);
    if (p.duration_us == 0.0) return s;

    auto driven = addressed_transitions(g, p, opt.rwa_cutoff_mhz);
    if (driven.empty()) {
        if (opt.allow_unaddressed) return propagate_free(s, g, p.duration_us);
        fail("pulse '" + p.label + "' addresses nothing within the detuning cutoff");
    }
    std::vector<int> photon = photon_ladder(g, p, driven);

    const auto n = s.rho.rows();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index m = 0; m < n; ++m)
        h(m, m) = two_pi * (g.levels[m].energy_mhz - photon[m] * p.carrier_mhz);
    for (const Transition* t : driven) {
        int l = g.require_index(t->lower);
        int u = g.require_index(t->upper);
        cplx coupling = 0.5 * t->coupling * p.rabi_rad_per_us * std::polar(1.0, -p.phase_rad);
        h(u, l) += coupling;
        h(l, u) += std::conj(coupling);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success) fail("rotating-frame Hamiltonian diagonalization failed");
    Eigen::VectorXcd phases(n);
    for (Eigen::Index m = 0; m < n; ++m)
        phases(m) = std::polar(1.0, -es.eigenvalues()(m) * p.duration_us);
    Eigen::MatrixXcd kernel =
        es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();

    // Undo the rotating frame at the pulse end; the frame was entered at the
    // pulse start where it equals the identity (envelope-referenced carrier).
    Eigen::VectorXcd back(n);
    for (Eigen::Index m = 0; m < n; ++m)
        back(m) = std::polar(1.0, -two_pi * p.carrier_mhz * photon[m] * p.duration_us);
    kernel = back.asDiagonal() * kernel;

    QuantumState out;
    out.rho = kernel * s.rho * kernel.adjoint();
    out.time_us = s.time_us + p.duration_us;
    return out;
}

QuantumState propagate_pulse_direct(const QuantumState& s, const LevelGraph& g, const Pulse& p,
                                    double step_us, const EngineOptions& opt) {
    require_square(s, g);
    if (p.duration_us == 0.0) return s;
    const auto n = s.rho.rows();

    double f_fast = p.carrier_mhz;
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a + 1; b < n; ++b) {
            f_fast = std::max(f_fast,
                              std::abs(g.levels[a].energy_mhz - g.levels[b].energy_mhz));
        }
    }
    if (f_fast <= 0.0) f_fast = 1.0;

    double h = step_us > 0.0 ? step_us : opt.direct_step_cycles / f_fast;
    if (h * f_fast > 0.05) {
        fail("direct integration step of " + std::to_string(h * f_fast) +
             " cycles is too coarse (limit 0.05); reduce the step or scale the energies");
    }
    const auto steps = static_cast<long>(std::ceil(p.duration_us / h));
    h = p.duration_us / static_cast<double>(steps);

    std::vector<DriveTerm> drive;
    for (const auto& t : g.transitions) {
        if (t.pol != p.pol) continue;
        drive.push_back({g.require_index(t.upper), g.require_index(t.lower),
                         t.coupling * p.rabi_rad_per_us});
    }
    if (drive.empty() && !opt.allow_unaddressed)
        fail("pulse '" + p.label + "' addresses nothing (no matching polarization)");

    Eigen::VectorXd d(n);
    for (Eigen::Index m = 0; m < n; ++m) d(m) = two_pi * g.levels[m].energy_mhz;

    const double w_carrier = two_pi * p.carrier_mhz;
    // drho/dt = -i [diag(d) + cos(w t + phi) W, rho] with W the sparse
    // symmetric drive matrix; the commutators are expanded term by term.
    auto derivative = [&](const Eigen::MatrixXcd& rho, double t_loc, Eigen::MatrixXcd& out) {
        for (Eigen::Index col = 0; col < n; ++col) {
            for (Eigen::Index row = 0; row < n; ++row) {
                out(row, col) = -iu * (d(row) - d(col)) * rho(row, col);
            }
        }
        const double field = std::cos(w_carrier * t_loc + p.phase_rad);
        for (const DriveTerm& dt : drive) {
            const cplx c = -iu * (field * dt.strength);
            out.row(dt.upper) += c * rho.row(dt.lower);
            out.row(dt.lower) += c * rho.row(dt.upper);
            out.col(dt.upper) -= c * rho.col(dt.lower);
            out.col(dt.lower) -= c * rho.col(dt.upper);
        }
    };

    Eigen::MatrixXcd rho = s.rho;
    Eigen::MatrixXcd k1(n, n), k2(n, n), k3(n, n), k4(n, n), tmp(n, n);
    for (long i = 0; i < steps; ++i) {
        const double t0 = static_cast<double>(i) * h;
        derivative(rho, t0, k1);
        tmp = rho + (0.5 * h) * k1;
        derivative(tmp, t0 + 0.5 * h, k2);
        tmp = rho + (0.5 * h) * k2;
        derivative(tmp, t0 + 0.5 * h, k3);
        tmp = rho + h * k3;
        derivative(tmp, t0 + h, k4);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    rho = 0.5 * (rho + rho.adjoint()).eval();

    QuantumState out;
    out.rho = std::move(rho);
    out.time_us = s.time_us + p.duration_us;
    return out;
}

Trajectory run_sequence(const QuantumState& s0, const LevelGraph& g, const PulseSequence& seq,
                        Engine engine, const EngineOptions& opt) {
    ValidationReport r = validate_sequence(seq);
    if (!r.ok()) fail("invalid pulse sequence: " + r.joined());

    Trajectory traj;
    QuantumState s = s0;
    traj.boundaries.push_back(s);
    for (const Pulse& p : seq.pulses) {
        if (p.start_us < s.time_us - 1e-12) {
            fail("pulse '" + p.label +
                 "' overlaps the previous pulse; the engines propagate pulses serially");
        }
        if (p.start_us > s.time_us) s = propagate_free(s, g, p.start_us - s.time_us);
        s = engine == Engine::rwa ? propagate_pulse_rwa(s, g, p, opt)
                                  : propagate_pulse_direct(s, g, p, 0.0, opt);
        traj.boundaries.push_back(s);
    }
    if (seq.record_start_us > s.time_us)
        s = propagate_free(s, g, seq.record_start_us - s.time_us);
    traj.boundaries.push_back(s);
    return traj;
}

}  // namespace ctsim
