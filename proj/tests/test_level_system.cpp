#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ctsim/experiment.hpp"
#include "ctsim/level_system.hpp"
#include "oracles.hpp"

using namespace ctsim;

namespace {

const LevelGraph& default_graph() {
    static ExperimentConfig cfg = default_experiment();
    return cfg.graph;
}

}  // namespace

TEST_CASE("default graph satisfies every structural rule") {
    const ValidationReport r = validate_graph(default_graph());
    CHECK_MESSAGE(r.ok(), r.joined());
    CHECK(default_graph().levels.size() == 10);
    CHECK(default_graph().transitions.size() == 12);
}

TEST_CASE("validate_graph reports selection-rule and reference violations") {
    LevelGraph g;
    const RotKey a{0, 0, 0};
    const RotKey b{1, 1, 0};
    g.levels.push_back({{a, Parity::plus}, 0.0, 1.0});
    g.levels.push_back({{b, Parity::plus}, 1000.0, 1.0});

    // c-type must flip parity; this one does not.
    g.transitions.push_back(
        {{a, Parity::plus}, {b, Parity::plus}, DipoleAxis::c, LabPol::x, 1.0, "bad_c", false});
    ValidationReport r = validate_graph(g);
    REQUIRE_FALSE(r.ok());
    CHECK(r.joined().find("violates the c-type parity rule") != std::string::npos);

    g.transitions[0] = {{a, Parity::plus},          {b, Parity::minus}, DipoleAxis::c,
                        LabPol::x,                  1.0,                "dangling",
                        false};
    r = validate_graph(g);
    REQUIRE_FALSE(r.ok());
    CHECK(r.joined().find("references unknown level 1_10-") != std::string::npos);

    // a-type preserving parity across the pair is fine.
    g.levels.push_back({{b, Parity::minus}, 1001.0, 1.0});
    g.transitions[0].axis = DipoleAxis::a;
    g.transitions[0].pol = LabPol::z;
    r = validate_graph(g);
    CHECK(r.joined().find("violates the a-type parity rule") != std::string::npos);
}

TEST_CASE("tunneling splittings of the shipped system") {
    CHECK(tunneling_splitting(default_graph(), {0, 0, 0}) == doctest::Approx(0.818).epsilon(1e-12));
    CHECK(tunneling_splitting(default_graph(), {1, 0, 1}) == doctest::Approx(0.82).epsilon(1e-12));
    CHECK_THROWS_WITH_AS(tunneling_splitting(default_graph(), {9, 9, 9}),
                         doctest::Contains("graph has no level 9_99+"), Error);

    LevelGraph g;
    g.levels.push_back({{{2, 1, 1}, Parity::plus}, 50.0, 1.0});
    g.levels.push_back({{{2, 1, 1}, Parity::minus}, 50.0, 1.0});
    CHECK(tunneling_splitting(g, {2, 1, 1}) == 0.0);
}

TEST_CASE("transfer time is the half period of the splitting") {
    CHECK(transfer_time_us(0.818) == doctest::Approx(0.611).epsilon(1e-3));
    CHECK(transfer_time_us(0.818) == doctest::Approx(1.0 / (2.0 * 0.818)).epsilon(1e-12));
    CHECK(transfer_time_us(0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(transfer_time_us(0.815) == doctest::Approx(0.6135).epsilon(1e-4));
    CHECK_THROWS_AS(transfer_time_us(0.0), Error);
    CHECK_THROWS_AS(transfer_time_us(-1.0), Error);
}

TEST_CASE("interstate doublet spacings of the shipped system") {
    CHECK(interstate_doublet_spacing(default_graph(), {0, 0, 0}, {1, 1, 0}) ==
          doctest::Approx(1.64).epsilon(1e-9));
    CHECK(interstate_doublet_spacing(default_graph(), {1, 0, 1}, {2, 1, 1}) ==
          doctest::Approx(1.63).epsilon(1e-9));
    // 0_00 and 2_02 are both present but share no c-type transition.
    CHECK_THROWS_WITH_AS(interstate_doublet_spacing(default_graph(), {0, 0, 0}, {2, 0, 2}),
                         doctest::Contains("not connected by a c-type transition"), Error);
}

TEST_CASE("interstate spacing equals the sum of the splittings on random graphs") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const LevelGraph g = oracle::random_doublet_pair(rng);
        REQUIRE(validate_graph(g).ok());
        const double sum =
            tunneling_splitting(g, {0, 0, 0}) + tunneling_splitting(g, {1, 1, 0});
        CHECK(interstate_doublet_spacing(g, {0, 0, 0}, {1, 1, 0}) ==
              doctest::Approx(sum).epsilon(1e-12));
    }
}

TEST_CASE("two zero-splitting doublets have zero interstate spacing") {
    std::mt19937_64 rng(11);
    LevelGraph g = oracle::random_doublet_pair(rng);
    g.levels[1].energy_mhz = g.levels[0].energy_mhz;
    g.levels[3].energy_mhz = g.levels[2].energy_mhz;
    CHECK(interstate_doublet_spacing(g, {0, 0, 0}, {1, 1, 0}) == doctest::Approx(0.0));
}

TEST_CASE("scaling divides every transition frequency, shifting changes none") {
    const LevelGraph& g = default_graph();
    const LevelGraph halved = scale_energies(g, 2.0);
    const LevelGraph shifted = shift_energies(g, 123.456);
    for (size_t i = 0; i < g.transitions.size(); ++i) {
        const double f = g.frequency(g.transitions[i]);
        CHECK(halved.frequency(halved.transitions[i]) == doctest::Approx(f / 2.0).epsilon(1e-12));
        CHECK(shifted.frequency(shifted.transitions[i]) == doctest::Approx(f).epsilon(1e-12));
    }
    CHECK_THROWS_AS(scale_energies(g, 0.0), Error);
}

TEST_CASE("drop_counterpart removes exactly the tagged ladder") {
    const LevelGraph& g = default_graph();
    const LevelGraph trimmed = drop_counterpart(g);
    size_t tagged = 0;
    for (const auto& t : g.transitions) tagged += t.counterpart ? 1 : 0;
    CHECK(tagged == 3);
    CHECK(trimmed.transitions.size() == g.transitions.size() - tagged);
    for (const auto& t : trimmed.transitions) CHECK_FALSE(t.counterpart);
    CHECK(trimmed.levels.size() == g.levels.size());
}

TEST_CASE("thermal populations follow the Boltzmann weights") {
    const LevelGraph& g = default_graph();
    const std::vector<LevelId> doublet{{{0, 0, 0}, Parity::plus}, {{0, 0, 0}, Parity::minus}};

    const auto p = thermal_populations(g, 1.0, doublet);
    double total = 0.0;
    for (double v : p) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    const int ip = g.require_index(doublet[0]);
    const int im = g.require_index(doublet[1]);
    // hv/kT = 3.9e-5 at 0.818 MHz and 1 K, so the pair is equal to that order.
    CHECK(std::abs(p[ip] / p[im] - 1.0) < 4e-5);
    CHECK(p[ip] > p[im]);
    CHECK(p[ip] / p[im] ==
          doctest::Approx(oracle::boltzmann_weight(-0.818, 1.0)).epsilon(1e-12));

    const auto single = thermal_populations(g, 1.0, {doublet[0]});
    CHECK(single[ip] == doctest::Approx(1.0).epsilon(1e-15));

    const auto uniform =
        thermal_populations(g, std::numeric_limits<double>::infinity(), doublet);
    CHECK(uniform[ip] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(uniform[im] == doctest::Approx(0.5).epsilon(1e-15));

    CHECK_THROWS_AS(thermal_populations(g, 0.0, doublet), Error);
    CHECK_THROWS_AS(thermal_populations(g, -1.0, doublet), Error);
}

TEST_CASE("level ids parse and print round-trip") {
    const LevelId id = level_id_from_string("2 1 1 -");
    CHECK(id.rot.j == 2);
    CHECK(id.rot.ka == 1);
    CHECK(id.rot.kc == 1);
    CHECK(id.parity == Parity::minus);
    CHECK(id.str() == "2_11-");
    CHECK(level_id_from_string("0 0 0 +").str() == "0_00+");

    CHECK_THROWS_AS(level_id_from_string("1 0 1"), Error);
    CHECK_THROWS_AS(level_id_from_string("1 0 1 - extra"), Error);
    CHECK_THROWS_AS(level_id_from_string("1 0 1 x"), Error);
    CHECK_THROWS_AS(level_id_from_string("-1 0 1 +"), Error);
}

TEST_CASE("with_label and frequency accessors") {
    const LevelGraph& g = default_graph();
    // f2 names both ladder legs so the pulse carrier lands on their mean;
    // the f1 counterpart leg has its own label, keeping f1 on 1850.1 exactly.
    CHECK(g.with_label("f1").size() == 1);
    CHECK(g.with_label("f1_counterpart").size() == 1);
    CHECK(g.with_label("f2").size() == 2);
    CHECK(g.with_label("fLpm").size() == 1);
    CHECK(g.with_label("nothing").empty());
    const Transition* listen = g.with_label("fLpm").front();
    CHECK(g.frequency(*listen) == doctest::Approx(6385.55).epsilon(1e-12));
    CHECK(g.frequency(*g.with_label("fLmp").front()) == doctest::Approx(6387.18).epsilon(1e-12));
}

TEST_CASE("graph config loader points at the broken line") {
    const char* text =
        "[level]\n"
        "id = 0 0 0 +\n"
        "energy_mhz = 0\n"
        "[level]\n"
        "id = 1 1 0 -\n"
        "energy_mhz = 1000\n"
        "[transition]\n"
        "lower = 0 0 0 +\n"
        "upper = 1 1 0 -\n"
        "axis = q\n"
        "label = f1\n";
    CHECK_THROWS_WITH_AS(level_graph_from_config(parse_config_text(text, "bad.cfg")),
                         doctest::Contains("bad dipole axis"), Error);
}
