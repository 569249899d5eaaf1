#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "annealpde/ising.hpp"

using namespace annealpde;

namespace {

// H = s0 s1 + s0 - s1, ground state (-1, +1) at -3.
IsingModel toy_model() {
    IsingModel m(2);
    m.add_coupling(0, 1, 1.0);
    m.add_field(0, 1.0);
    m.add_field(1, -1.0);
    return m;
}

// H = s0 s1 + 2 s1 s2 - 3 s0 s2 + 4 s2 s3 - 5 s3 s4 - 6 s2 s4.
IsingModel frustrated5_model() {
    IsingModel m(5);
    m.add_coupling(0, 1, 1.0);
    m.add_coupling(1, 2, 2.0);
    m.add_coupling(0, 2, -3.0);
    m.add_coupling(2, 3, 4.0);
    m.add_coupling(3, 4, -5.0);
    m.add_coupling(2, 4, -6.0);
    return m;
}

IsingModel random_model(int n, std::uint64_t seed, double field_scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    IsingModel m(n);
    for (int i = 0; i < n; ++i) {
        m.add_field(i, field_scale * u(rng));
        for (int j = i + 1; j < n; ++j) m.add_coupling(i, j, u(rng));
    }
    return m;
}

SpinVector state_from_bits(int n, unsigned bits) {
    SpinVector s(n);
    for (int i = 0; i < n; ++i) s[i] = ((bits >> i) & 1u) ? 1 : -1;
    return s;
}

}  // namespace

TEST_CASE("energy matches hand-computed values") {
    IsingModel m = toy_model();
    CHECK(energy(m, SpinVector{-1, 1}) == doctest::Approx(-3.0));
    CHECK(energy(m, SpinVector{1, 1}) == doctest::Approx(1.0));

    IsingModel constant(3);
    constant.set_offset(5.0);
    CHECK(energy(constant, SpinVector{1, -1, 1}) == doctest::Approx(5.0));

    CHECK_THROWS_AS(energy(m, SpinVector{1}), DimensionError);
}

TEST_CASE("model construction rules") {
    IsingModel m(3);
    CHECK_THROWS_AS(m.add_coupling(1, 1, 2.0), DimensionError);
    CHECK_THROWS_AS(m.add_field(3, 1.0), DimensionError);
    m.add_coupling(2, 0, 1.5);  // stored under (0, 2)
    CHECK(m.coupling(0, 2) == doctest::Approx(1.5));
    CHECK(m.coupling(2, 0) == doctest::Approx(1.5));
    m.add_coupling(0, 2, -1.5);  // cancels to zero and is pruned
    CHECK(m.couplings().empty());
    CHECK(m.neighbors(0).empty());
}

TEST_CASE("delta_energy equals flip difference") {
    // Flipping the first spin takes (+1,+1) at energy +1 to (-1,+1) at -3.
    IsingModel m = toy_model();
    CHECK(delta_energy(m, SpinVector{1, 1}, 0) == doctest::Approx(-4.0));

    IsingModel zero(4);
    for (int k = 0; k < 4; ++k) CHECK(delta_energy(zero, SpinVector{1, -1, 1, -1}, k) == 0.0);

    CHECK_THROWS_AS(delta_energy(m, SpinVector{1, 1}, 2), DimensionError);

    // Exhaustive cross-check on a random 8-spin model: every state, every flip.
    IsingModel r = random_model(8, 1234);
    for (unsigned bits = 0; bits < 256; ++bits) {
        SpinVector s = state_from_bits(8, bits);
        const double base = energy(r, s);
        for (int k = 0; k < 8; ++k) {
            SpinVector flipped = s;
            flipped[k] = static_cast<std::int8_t>(-flipped[k]);
            const double expect = energy(r, flipped) - base;
            const double got = delta_energy(r, s, k);
            CHECK(got == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("global spin inversion is a symmetry when h = 0") {
    std::mt19937_64 rng(99);
    IsingModel m = random_model(7, 7, 0.0);
    for (int trial = 0; trial < 50; ++trial) {
        SpinVector s = state_from_bits(7, static_cast<unsigned>(rng() & 0x7f));
        SpinVector inv = s;
        for (auto& v : inv) v = static_cast<std::int8_t>(-v);
        CHECK(energy(m, s) == doctest::Approx(energy(m, inv)).epsilon(1e-12));
    }
}

TEST_CASE("brute force ground state") {
    SUBCASE("toy model") {
        GroundState g = brute_force_ground_state(toy_model());
        CHECK(g.energy == doctest::Approx(-3.0));
        CHECK(g.state == SpinVector{-1, 1});
    }
    SUBCASE("single spin with positive field") {
        IsingModel m(1);
        m.add_field(0, 2.0);
        GroundState g = brute_force_ground_state(m);
        CHECK(g.energy == doctest::Approx(-2.0));
        CHECK(g.state == SpinVector{-1});
    }
    SUBCASE("frustrated 5-spin model vs independent enumeration") {
        // Oracle: direct evaluation of the six terms over all 32 states,
        // written and checked by hand before the solver existed.
        double best_e = 1e300;
        SpinVector best;
        for (unsigned bits = 0; bits < 32; ++bits) {
            SpinVector s = state_from_bits(5, bits);
            const double e = 1.0 * s[0] * s[1] + 2.0 * s[1] * s[2] - 3.0 * s[0] * s[2] +
                             4.0 * s[2] * s[3] - 5.0 * s[3] * s[4] - 6.0 * s[2] * s[4];
            if (e < best_e) {
                best_e = e;
                best = s;
            }
        }
        GroundState g = brute_force_ground_state(frustrated5_model());
        CHECK(g.energy == doctest::Approx(best_e));
        CHECK(energy(frustrated5_model(), g.state) == doctest::Approx(best_e));
    }
    SUBCASE("never beaten by an enumerated state") {
        IsingModel m = random_model(10, 42);
        GroundState g = brute_force_ground_state(m);
        for (unsigned bits = 0; bits < 1024; ++bits) {
            CHECK(g.energy <= energy(m, state_from_bits(10, bits)) + 1e-12);
        }
    }
    SUBCASE("deterministic tie-break picks the lexicographically smallest state") {
        IsingModel m(3);
        m.add_coupling(0, 1, 1.0);  // Z2-symmetric: every state tied with its inverse
        GroundState g = brute_force_ground_state(m);
        CHECK(g.energy == doctest::Approx(-1.0));
        CHECK(g.state == SpinVector{-1, 1, -1});
    }
    SUBCASE("honors the capacity cap") {
        CHECK_THROWS_AS(brute_force_ground_state(IsingModel(10), 8), CapacityError);
    }
}

TEST_CASE("text serialization round trip") {
    IsingModel m = frustrated5_model();
    m.add_field(2, -0.75);
    m.set_offset(1.25);
    std::stringstream ss;
    write_model(ss, m);
    IsingModel back = read_model(ss);
    CHECK(back.n_spins() == m.n_spins());
    CHECK(back.offset() == doctest::Approx(m.offset()));
    for (unsigned bits = 0; bits < 32; ++bits) {
        SpinVector s = state_from_bits(5, bits);
        CHECK(energy(back, s) == doctest::Approx(energy(m, s)).epsilon(1e-15));
    }

    std::stringstream header;
    header << "2 0.0\n";
    IsingModel empty = read_model(header);
    CHECK(empty.n_spins() == 2);
    CHECK(empty.couplings().empty());
}
