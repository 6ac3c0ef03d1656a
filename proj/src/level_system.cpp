#include "ctsim/level_system.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "ctsim/common.hpp"

namespace ctsim {

char parity_char(Parity p) { return p == Parity::plus ? '+' : '-'; }

Parity parity_from_string(const std::string& s) {
    if (s == "+" || s == "plus") return Parity::plus;
    if (s == "-" || s == "minus") return Parity::minus;
    fail("bad parity token: '" + s + "' (expected '+' or '-')");
}

std::string RotKey::str() const {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%d_%d%d", j, ka, kc);
    return buf;
}

std::string LevelId::str() const { return rot.str() + parity_char(parity); }

char axis_char(DipoleAxis a) {
    switch (a) {
        case DipoleAxis::a: return 'a';
        case DipoleAxis::b: return 'b';
        case DipoleAxis::c: return 'c';
    }
    return '?';
}

char pol_char(LabPol p) {
    switch (p) {
        case LabPol::x: return 'x';
        case LabPol::y: return 'y';
        case LabPol::z: return 'z';
    }
    return '?';
}

DipoleAxis axis_from_string(const std::string& s) {
    if (s == "a") return DipoleAxis::a;
    if (s == "b") return DipoleAxis::b;
    if (s == "c") return DipoleAxis::c;
    fail("bad dipole axis: '" + s + "' (expected a, b, or c)");
}

LabPol pol_from_string(const std::string& s) {
    if (s == "x") return LabPol::x;
    if (s == "y") return LabPol::y;
    if (s == "z") return LabPol::z;
    fail("bad polarization: '" + s + "' (expected x, y, or z)");
}

LabPol pol_for_axis(DipoleAxis a) {
    switch (a) {
        case DipoleAxis::a: return LabPol::z;
        case DipoleAxis::b: return LabPol::y;
        case DipoleAxis::c: return LabPol::x;
    }
    return LabPol::z;
}

bool axis_flips_parity(DipoleAxis a) { return a == DipoleAxis::c; }

int LevelGraph::index_of(const LevelId& id) const {
    for (size_t i = 0; i < levels.size(); ++i) {
        if (levels[i].id == id) return static_cast<int>(i);
    }
    return -1;
}

int LevelGraph::require_index(const LevelId& id) const {
    int i = index_of(id);
    if (i < 0) fail("graph has no level " + id.str());
    return i;
}

const Level& LevelGraph::level(const LevelId& id) const { return levels[require_index(id)]; }

double LevelGraph::frequency(const Transition& t) const {
    return level(t.upper).energy_mhz - level(t.lower).energy_mhz;
}

std::vector<const Transition*> LevelGraph::with_label(const std::string& label) const {
    std::vector<const Transition*> out;
    for (const auto& t : transitions) {
        if (t.label == label) out.push_back(&t);
    }
    return out;
}

std::string ValidationReport::joined() const {
    std::ostringstream os;
    for (size_t i = 0; i < issues.size(); ++i) {
        if (i) os << "; ";
        os << issues[i];
    }
    return os.str();
}

ValidationReport validate_graph(const LevelGraph& g) {
    ValidationReport r;
    if (g.levels.empty()) {
        r.issues.push_back("graph has no levels");
        return r;
    }

    std::set<LevelId> seen;
    for (const auto& lv : g.levels) {
        if (!std::isfinite(lv.energy_mhz))
            r.issues.push_back("level " + lv.id.str() + " has non-finite energy");
        if (!seen.insert(lv.id).second)
            r.issues.push_back("duplicate level " + lv.id.str());
    }

    std::map<std::string, LabPol> label_pol;
    std::set<std::pair<LevelId, LevelId>> pairs;
    for (const auto& t : g.transitions) {
        std::string tag = "transition " + t.lower.str() + " -> " + t.upper.str();
        if (g.index_of(t.lower) < 0) {
            r.issues.push_back(tag + " references unknown level " + t.lower.str());
            continue;
        }
        if (g.index_of(t.upper) < 0) {
            r.issues.push_back(tag + " references unknown level " + t.upper.str());
            continue;
        }
        if (t.lower == t.upper) {
            r.issues.push_back(tag + " connects a level to itself");
            continue;
        }
        if (!pairs.insert({t.lower, t.upper}).second)
            r.issues.push_back("duplicate " + tag);
        if (g.frequency(t) <= 0.0)
            r.issues.push_back(tag + " has non-positive frequency (upper below lower)");
        bool flips = t.lower.parity != t.upper.parity;
        if (flips != axis_flips_parity(t.axis)) {
            r.issues.push_back(tag + " violates the " + std::string(1, axis_char(t.axis)) +
                               "-type parity rule");
        }
        if (!(t.coupling > 0.0) || !std::isfinite(t.coupling))
            r.issues.push_back(tag + " has non-positive coupling");
        if (t.label.empty()) {
            r.issues.push_back(tag + " has an empty label");
        } else {
            auto [it, fresh] = label_pol.try_emplace(t.label, t.pol);
            if (!fresh && it->second != t.pol)
                r.issues.push_back("label '" + t.label + "' mixes polarizations");
        }
    }
    return r;
}

void require_valid(const LevelGraph& g) {
    ValidationReport r = validate_graph(g);
    if (!r.ok()) fail("invalid level graph: " + r.joined());
}

double tunneling_splitting(const LevelGraph& g, const RotKey& rot) {
    double ep = g.level({rot, Parity::plus}).energy_mhz;
    double em = g.level({rot, Parity::minus}).energy_mhz;
    return em - ep;
}

double transfer_time_us(double splitting_mhz) {
    if (!(splitting_mhz > 0.0)) fail("transfer time needs a positive splitting");
    return 1.0 / (2.0 * splitting_mhz);
}

double interstate_doublet_spacing(const LevelGraph& g, const RotKey& lower_rot,
                                  const RotKey& upper_rot) {
    bool linked = false;
    for (const auto& t : g.transitions) {
        if (t.axis != DipoleAxis::c) continue;
        if ((t.lower.rot == lower_rot && t.upper.rot == upper_rot) ||
            (t.lower.rot == upper_rot && t.upper.rot == lower_rot)) {
            linked = true;
            break;
        }
    }
    if (!linked) {
        fail("doublets " + lower_rot.str() + " and " + upper_rot.str() +
             " are not connected by a c-type transition");
    }
    return tunneling_splitting(g, lower_rot) + tunneling_splitting(g, upper_rot);
}

LevelGraph drop_counterpart(const LevelGraph& g) {
    LevelGraph out;
    out.levels = g.levels;
    for (const auto& t : g.transitions) {
        if (!t.counterpart) out.transitions.push_back(t);
    }
    return out;
}

LevelGraph scale_energies(const LevelGraph& g, double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor)) fail("energy scale factor must be positive");
    LevelGraph out = g;
    for (auto& lv : out.levels) lv.energy_mhz /= factor;
    return out;
}

LevelGraph shift_energies(const LevelGraph& g, double delta_mhz) {
    LevelGraph out = g;
    for (auto& lv : out.levels) lv.energy_mhz += delta_mhz;
    return out;
}

std::vector<double> thermal_populations(const LevelGraph& g, double temperature_k,
                                        const std::vector<LevelId>& populate) {
    if (!(temperature_k > 0.0)) fail("temperature must be positive");
    std::vector<bool> active(g.levels.size(), populate.empty());
    for (const auto& id : populate) active[g.require_index(id)] = true;

    // Subtract the minimum active energy before exponentiating so a common
    // energy shift cannot change the result.
    double e_min = 0.0;
    bool first = true;
    for (size_t i = 0; i < g.levels.size(); ++i) {
        if (!active[i]) continue;
        if (first || g.levels[i].energy_mhz < e_min) e_min = g.levels[i].energy_mhz;
        first = false;
    }
    if (first) fail("thermal_populations: no levels selected");

    std::vector<double> p(g.levels.size(), 0.0);
    double total = 0.0;
    for (size_t i = 0; i < g.levels.size(); ++i) {
        if (!active[i]) continue;
        p[i] = g.levels[i].weight *
               std::exp(-boltzmann_k_per_mhz * (g.levels[i].energy_mhz - e_min) / temperature_k);
        total += p[i];
    }
    for (auto& v : p) v /= total;
    return p;
}

LevelId level_id_from_string(const std::string& text) {
    std::istringstream is(text);
    LevelId id;
    std::string parity;
    if (!(is >> id.rot.j >> id.rot.ka >> id.rot.kc >> parity))
        fail("bad level id '" + text + "' (expected 'J Ka Kc parity')");
    std::string rest;
    if (is >> rest) fail("bad level id '" + text + "' (trailing tokens)");
    if (id.rot.j < 0 || id.rot.ka < 0 || id.rot.kc < 0)
        fail("bad level id '" + text + "' (negative quantum number)");
    id.parity = parity_from_string(parity);
    return id;
}

LevelGraph level_graph_from_config(const ConfigFile& cf) {
    LevelGraph g;
    for (const ConfigSection* sec : cf.sections_named("level")) {
        Level lv;
        try {
            lv.id = level_id_from_string(sec->get_string("id"));
        } catch (const Error& e) {
            sec->fail_at("id", e.what());
        }
        lv.energy_mhz = sec->get_double("energy_mhz");
        lv.weight = sec->get_double("weight", 1.0);
        if (!(lv.weight > 0.0)) sec->fail_at("weight", "weight must be positive");
        g.levels.push_back(lv);
    }
    for (const ConfigSection* sec : cf.sections_named("transition")) {
        Transition t;
        try {
            t.lower = level_id_from_string(sec->get_string("lower"));
            t.upper = level_id_from_string(sec->get_string("upper"));
            t.axis = axis_from_string(sec->get_string("axis"));
            t.pol = sec->has("polarization")
                        ? pol_from_string(sec->get_string("polarization"))
                        : pol_for_axis(t.axis);
        } catch (const Error& e) {
            fail(cf.source + ":" + std::to_string(sec->line) + ": [transition] " + e.what());
        }
        t.coupling = sec->get_double("coupling", 1.0);
        t.label = sec->get_string("label");
        std::string cycle = sec->get_string("cycle", "main");
        if (cycle == "counterpart") {
            t.counterpart = true;
        } else if (cycle != "main") {
            sec->fail_at("cycle", "cycle must be 'main' or 'counterpart'");
        }
        g.transitions.push_back(t);
    }
    ValidationReport r = validate_graph(g);
    if (!r.ok()) fail(cf.source + ": invalid level graph: " + r.joined());
    return g;
}

}  // namespace ctsim
