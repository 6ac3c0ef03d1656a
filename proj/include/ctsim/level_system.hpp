#pragma once

#include <compare>
#include <string>
#include <vector>

#include "ctsim/config_file.hpp"

namespace ctsim {

// Rotational levels of a tunneling molecule.  Each rotational state J_KaKc
// is split into a tunneling doublet; the two members are labelled by parity
// (+ lower, - upper for a normal doublet).  Energies are E/h in MHz.

enum class Parity { plus, minus };
char parity_char(Parity p);
Parity parity_from_string(const std::string& s);

struct RotKey {
    int j = 0;
    int ka = 0;
    int kc = 0;
    auto operator<=>(const RotKey&) const = default;
    std::string str() const;  // "1_01"
};

struct LevelId {
    RotKey rot;
    Parity parity = Parity::plus;
    auto operator<=>(const LevelId&) const = default;
    std::string str() const;  // "1_01-"
};

// Molecule-frame dipole axis of a transition and the lab polarization that
// drives it in the standard mutually orthogonal three-axis arrangement.
enum class DipoleAxis { a, b, c };
enum class LabPol { x, y, z };

char axis_char(DipoleAxis a);
char pol_char(LabPol p);
DipoleAxis axis_from_string(const std::string& s);
LabPol pol_from_string(const std::string& s);
LabPol pol_for_axis(DipoleAxis a);      // a -> z, b -> y, c -> x
bool axis_flips_parity(DipoleAxis a);   // c-type connects + <-> -, a/b preserve

struct Level {
    LevelId id;
    double energy_mhz = 0.0;
    double weight = 1.0;  // degeneracy weight multiplying the thermal population
};

struct Transition {
    LevelId lower;
    LevelId upper;
    DipoleAxis axis = DipoleAxis::a;
    LabPol pol = LabPol::z;
    double coupling = 1.0;  // relative dipole matrix element, dimensionless
    std::string label;      // groups the transitions a named pulse drives
    // Marks the leg that belongs to the excitation ladder starting from the
    // other doublet member; the isolated-cycle fixture drops these.
    bool counterpart = false;
};

struct LevelGraph {
    std::vector<Level> levels;
    std::vector<Transition> transitions;

    int index_of(const LevelId& id) const;       // -1 when absent
    int require_index(const LevelId& id) const;  // throws when absent
    const Level& level(const LevelId& id) const;
    double frequency(const Transition& t) const;  // E(upper) - E(lower), MHz
    std::vector<const Transition*> with_label(const std::string& label) const;
};

struct ValidationReport {
    std::vector<std::string> issues;
    bool ok() const { return issues.empty(); }
    std::string joined() const;
};

// Structural checks: unique finite levels, transitions that reference real
// levels with positive frequency and coupling, and the parity selection rule
// for each dipole axis.
ValidationReport validate_graph(const LevelGraph& g);
void require_valid(const LevelGraph& g);

// E(-) - E(+) of one doublet, in MHz.
double tunneling_splitting(const LevelGraph& g, const RotKey& rot);

// Half-period of the enantiomer interconversion driven by a splitting:
// 1 / (2 nu), in us.
double transfer_time_us(double splitting_mhz);

// Frequency spacing between the two cross-parity lines connecting a pair of
// doublets: splitting(lower) + splitting(upper) for identically ordered
// doublets.  The doublets must actually be linked by at least one c-type
// transition.
double interstate_doublet_spacing(const LevelGraph& g, const RotKey& lower_rot,
                                  const RotKey& upper_rot);

// Copy of the graph without counterpart-tagged transitions.
LevelGraph drop_counterpart(const LevelGraph& g);

// Same graph with every energy divided by `factor` (splittings shrink with
// the rotational energies, keeping the graph self-consistent).
LevelGraph scale_energies(const LevelGraph& g, double factor);
// Same graph with `delta_mhz` added to every energy (gauge shift).
LevelGraph shift_energies(const LevelGraph& g, double delta_mhz);

// Boltzmann populations at temperature_k, aligned with g.levels and
// normalized to sum 1.  Only levels in `populate` receive weight; an empty
// list populates everything.
std::vector<double> thermal_populations(const LevelGraph& g, double temperature_k,
                                        const std::vector<LevelId>& populate = {});

// "J Ka Kc parity" with whitespace-separated tokens, e.g. "1 0 1 -".
LevelId level_id_from_string(const std::string& text);

// Builds a graph from the [level] and [transition] sections of a parsed
// config, then validates it.
LevelGraph level_graph_from_config(const ConfigFile& cf);

}  // namespace ctsim
