#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "annealpde/encoding.hpp"

using namespace annealpde;

namespace {

SpinVector state_from_bits(int n, unsigned bits) {
    SpinVector s(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = ((bits >> i) & 1u) ? 1 : -1;
    return s;
}

RealCost random_quadratic_cost(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    Eigen::MatrixXd J(n, n);
    Eigen::VectorXd h(n);
    for (int i = 0; i < n; ++i) {
        h[i] = u(rng);
        for (int j = 0; j < n; ++j) J(i, j) = u(rng);
    }
    return RealCost::from_quadratic(J, h, u(rng));
}

}  // namespace

TEST_CASE("decode") {
    CHECK(decode({0.0, 1.0, 2}, SpinVector{1, 1}) == doctest::Approx(1.5));
    CHECK(decode({0.5, 0.25, 2}, SpinVector{-1, 1}) == doctest::Approx(0.375));
    CHECK(decode({0.7, 0.0, 3}, SpinVector{1, -1, 1}) == doctest::Approx(0.7));
    CHECK_THROWS_AS(decode({0.0, 1.0, 2}, SpinVector{1}), DimensionError);
    CHECK_THROWS_AS(decode({0.0, -1.0, 2}, SpinVector{1, 1}), DomainError);
    CHECK_THROWS_AS(decode({0.0, 1.0, 0}, SpinVector{}), DomainError);
}

TEST_CASE("substitute_encoding") {
    SUBCASE("one-variable squared loss") {
        // (w - 1)^2 with w = sigma: offset 2, field -2; ground state +1.
        Eigen::MatrixXd J(1, 1);
        J << 1.0;
        Eigen::VectorXd h(1);
        h << -2.0;
        RealCost cost = RealCost::from_quadratic(J, h, 1.0);
        SpinPolynomial poly = substitute_encoding(cost, {{0.0, 1.0, 1}});
        CHECK(poly.constant() == doctest::Approx(2.0));
        CHECK(poly.coefficient({0}) == doctest::Approx(-2.0));
        IsingModel model = ising_from_quadratic(poly);
        GroundState g = brute_force_ground_state(model);
        CHECK(g.state == SpinVector{1});
        CHECK(decode({0.0, 1.0, 1}, g.state) == doctest::Approx(1.0));
        CHECK(g.energy == doctest::Approx(0.0));
    }
    SUBCASE("zero scales give the constant cost at the centers") {
        RealCost cost = random_quadratic_cost(3, 4);
        std::vector<VariableEncoding> enc = {{0.3, 0.0, 2}, {-1.2, 0.0, 2}, {0.9, 0.0, 2}};
        SpinPolynomial poly = substitute_encoding(cost, enc);
        CHECK(poly.degree() == 0);
        Eigen::VectorXd centers(3);
        centers << 0.3, -1.2, 0.9;
        CHECK(poly.constant() == doctest::Approx(evaluate(cost, centers)));
    }
    SUBCASE("exhaustive energy-vs-cost agreement, quadratic") {
        RealCost cost = random_quadratic_cost(3, 17);
        std::vector<VariableEncoding> enc = {{0.1, 0.7, 2}, {-0.4, 1.3, 2}, {0.0, 1.0, 2}};
        SpinPolynomial poly = substitute_encoding(cost, enc);
        CHECK(poly.degree() <= 2);
        IsingModel model = ising_from_quadratic(poly);
        for (unsigned bits = 0; bits < 64; ++bits) {
            SpinVector s = state_from_bits(6, bits);
            const Eigen::VectorXd w = decode_all(enc, s);
            CHECK(energy(model, s) == doctest::Approx(evaluate(cost, w)).epsilon(1e-12));
        }
    }
    SUBCASE("exhaustive energy-vs-cost agreement, quartic") {
        RealCost cost(CostDegree::quartic, 2);
        cost.add_constant(0.5);
        cost.add_linear(0, -1.0);
        cost.add_quadratic_sym(0, 1, 0.75);
        cost.add_quartic({0, 0, 1, 1}, 1.25);
        cost.add_quartic({0, 1, 1, 1}, -0.5);
        std::vector<VariableEncoding> enc = {{0.2, 0.8, 2}, {-0.1, 1.1, 2}};
        SpinPolynomial poly = substitute_encoding(cost, enc);
        CHECK(poly.degree() <= 4);
        for (unsigned bits = 0; bits < 16; ++bits) {
            SpinVector s = state_from_bits(4, bits);
            const Eigen::VectorXd w = decode_all(enc, s);
            CHECK(evaluate(poly, Assignment(s.begin(), s.end())) ==
                  doctest::Approx(evaluate(cost, w)).epsilon(1e-12));
        }
    }
    SUBCASE("encoding count mismatch") {
        RealCost cost = random_quadratic_cost(3, 1);
        CHECK_THROWS_AS(substitute_encoding(cost, {{0.0, 1.0, 2}}), DimensionError);
    }
}

TEST_CASE("reduced quartic ground state decodes like the unreduced one") {
    RealCost cost(CostDegree::quartic, 2);
    cost.add_quartic({0, 0, 1, 1}, 1.0);  // stays quartic under sigma^2 = 1
    cost.add_quartic({0, 1, 1, 1}, -2.0);
    cost.add_quadratic_sym(0, 0, 0.5);
    cost.add_linear(1, 0.25);
    std::vector<VariableEncoding> enc = {{0.25, 1.0, 2}, {-0.5, 1.0, 2}};
    SpinPolynomial poly = substitute_encoding(cost, enc);
    REQUIRE(poly.degree() > 2);

    // Unreduced oracle: scan all 16 original spin states directly.
    double best_direct = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_w;
    for (unsigned bits = 0; bits < 16; ++bits) {
        const Eigen::VectorXd w = decode_all(enc, state_from_bits(4, bits));
        const double c = evaluate(cost, w);
        if (c < best_direct) {
            best_direct = c;
            best_w = w;
        }
    }

    ReductionResult reduced = reduce_to_quadratic(poly);
    IsingModel model = ising_from_quadratic(reduced.quadratic);
    GroundState g = brute_force_ground_state(model, 24);
    SpinVector original(g.state.begin(), g.state.begin() + 4);
    const Eigen::VectorXd w = decode_all(enc, original);
    CHECK(evaluate(cost, w) == doctest::Approx(best_direct).epsilon(1e-12));
    CHECK(g.energy == doctest::Approx(best_direct).epsilon(1e-12));
    CHECK((w - best_w).lpNorm<Eigen::Infinity>() == doctest::Approx(0.0));
}

TEST_CASE("zoom_update") {
    ZoomState state{0, {{0.0, 1.0, 2}, {0.0, 1.0, 2}}, 0.8, {}};
    Eigen::VectorXd w(2);
    w << 0.25, -0.5;
    ZoomState next = zoom_update(state, w, 1.5);
    CHECK(next.epoch == 1);
    CHECK(next.encodings[0].center == doctest::Approx(0.25));
    CHECK(next.encodings[1].center == doctest::Approx(-0.5));
    CHECK(next.encodings[0].scale == doctest::Approx(0.8));
    REQUIRE(next.history.size() == 1);
    CHECK(next.history[0].cost == doctest::Approx(1.5));

    SUBCASE("scales follow the geometric recursion") {
        ZoomState s = state;
        for (int i = 0; i < 7; ++i) s = zoom_update(s, w, 0.0);
        CHECK(s.encodings[0].scale == doctest::Approx(std::pow(0.8, 7)));
        CHECK(s.epoch == 7);
    }
    SUBCASE("S = 1 leaves scales unchanged") {
        ZoomState s{0, {{0.0, 2.0, 2}}, 1.0, {}};
        Eigen::VectorXd one(1);
        one << 0.5;
        CHECK(zoom_update(s, one, 0.0).encodings[0].scale == doctest::Approx(2.0));
    }
}

TEST_CASE("solve_iterative with the exact annealer") {
    SUBCASE("1-D quadratic converges inside the geometric envelope") {
        const double target = std::numbers::pi;
        Eigen::MatrixXd J(1, 1);
        J << 1.0;
        Eigen::VectorXd h(1);
        h << -2.0 * target;
        RealCost cost = RealCost::from_quadratic(J, h, target * target);  // (w - pi)^2

        IterativeParams params;
        params.zoom_factor = 0.8;
        params.n_spin = 2;
        params.epochs = 30;
        IterativeResult res = solve_iterative(cost, params, exact_annealer());
        CHECK(std::abs(res.best_w[0] - target) < 2.0 * std::pow(0.8, 29));
        CHECK(res.best_cost == doctest::Approx(evaluate(cost, res.best_w)));

        // best-so-far series never increases
        for (std::size_t i = 1; i < res.best_cost_series.size(); ++i) {
            CHECK(res.best_cost_series[i] <= res.best_cost_series[i - 1] + 1e-15);
        }
    }
    SUBCASE("epoch-0 solutions stay inside the representable range") {
        RealCost cost = random_quadratic_cost(3, 23);
        IterativeParams params;
        params.n_spin = 3;
        params.epochs = 1;
        IterativeResult res = solve_iterative(cost, params, exact_annealer());
        const double range = 2.0 - std::pow(2.0, 1 - params.n_spin);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(res.epoch_w[0][i]) <= range + 1e-12);
    }
    SUBCASE("annealer failure carries epoch context") {
        RealCost cost = random_quadratic_cost(2, 3);
        IterativeParams params;
        params.epochs = 2;
        AnnealerFn broken = [](const IsingModel&, const EpochContext&) -> SpinVector {
            throw NumericError("boom");
        };
        CHECK_THROWS_WITH_AS(solve_iterative(cost, params, broken),
                             doctest::Contains("epoch 0"), NumericError);
    }
    SUBCASE("parameter validation") {
        RealCost cost = random_quadratic_cost(2, 3);
        IterativeParams params;
        params.epochs = 0;
        CHECK_THROWS_AS(solve_iterative(cost, params, exact_annealer()), ConfigError);
    }
}
