#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "annealpde/problems.hpp"

using namespace annealpde;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("gauss_legendre integrates polynomials exactly") {
    std::vector<double> x, w;
    gauss_legendre(8, x, w);
    // degree-15 monomials are exact with 8 nodes
    for (int p = 0; p <= 15; ++p) {
        double sum = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) sum += w[k] * std::pow(x[k], p);
        CHECK(sum == doctest::Approx(1.0 / (p + 1)).epsilon(1e-13));
    }
    double total = 0.0;
    for (double wk : w) total += wk;
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("build_stommel_fd") {
    SUBCASE("row and unknown counts") {
        LinearSystem sys = build_stommel_fd({11, 0.1});
        CHECK(sys.A.rows() == 121);
        CHECK(sys.A.cols() == 121);
        CHECK(sys.v.size() == 121);
    }
    SUBCASE("boundary rows are identity equations with zero rhs") {
        LinearSystem sys = build_stommel_fd({5, 0.25});
        const int n = sys.grid.n;
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) {
                if (ix != 0 && ix != n - 1 && iy != 0 && iy != n - 1) continue;
                const int r = sys.grid.index(ix, iy);
                CHECK(sys.v[r] == 0.0);
                for (int c = 0; c < n * n; ++c) {
                    CHECK(sys.A.coeff(r, c) == doctest::Approx(c == r ? 1.0 : 0.0));
                }
            }
        }
    }
    SUBCASE("hand-derived single-interior stencil at N=3") {
        // With zero boundaries the psi_x stencil cancels and the Laplacian
        // leaves -4*eps/dx^2 = -1.6 on the diagonal; the wind term moves to
        // the rhs as -pi.
        LinearSystem sys = build_stommel_fd({3, 0.1});
        const int center = sys.grid.index(1, 1);
        CHECK(sys.A.coeff(center, center) == doctest::Approx(-1.6));
        CHECK(sys.v[center] == doctest::Approx(-kPi));
    }
    SUBCASE("config validation") {
        CHECK_THROWS_AS(build_stommel_fd({2, 0.1}), ConfigError);
        CHECK_THROWS_AS(build_stommel_fd({5, 0.0}), ConfigError);
    }
}

TEST_CASE("least_squares_quadratic") {
    SUBCASE("identity system") {
        LinearSystem sys;
        sys.A.resize(2, 2);
        sys.A.setIdentity();
        sys.v = Eigen::VectorXd::Zero(2);
        RealCost cost = least_squares_quadratic(sys);
        CHECK(cost.quadratic_matrix().isApprox(Eigen::MatrixXd::Identity(2, 2)));
        CHECK(cost.linear().norm() == 0.0);
        CHECK(cost.constant() == 0.0);
    }
    SUBCASE("scalar system (2w - 4)^2") {
        LinearSystem sys;
        sys.A.resize(1, 1);
        sys.A.insert(0, 0) = 2.0;
        sys.v = Eigen::VectorXd::Constant(1, 4.0);
        RealCost cost = least_squares_quadratic(sys);
        CHECK(cost.quadratic_matrix()(0, 0) == doctest::Approx(4.0));
        CHECK(cost.linear()[0] == doctest::Approx(-16.0));
        CHECK(cost.constant() == doctest::Approx(16.0));
        Eigen::VectorXd w = solve_quadratic_exact(cost);
        CHECK(w[0] == doctest::Approx(2.0));
    }
    SUBCASE("stationary point matches an independent dense least-squares solve") {
        std::mt19937_64 rng(55);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        Eigen::MatrixXd dense(6, 6);
        Eigen::VectorXd v(6);
        for (int i = 0; i < 6; ++i) {
            v[i] = u(rng);
            for (int j = 0; j < 6; ++j) dense(i, j) = u(rng);
        }
        LinearSystem sys;
        sys.A = dense.sparseView();
        sys.v = v;
        RealCost cost = least_squares_quadratic(sys);
        Eigen::VectorXd w = solve_quadratic_exact(cost);
        // Oracle: QR least-squares on A directly, a different algebraic route.
        Eigen::VectorXd ref = dense.colPivHouseholderQr().solve(v);
        CHECK((w - ref).norm() < 1e-9 * std::max(1.0, ref.norm()));
        CHECK(evaluate(cost, ref) == doctest::Approx((dense * ref - v).squaredNorm()).epsilon(1e-10));
    }
}

TEST_CASE("build_stommel_spectral") {
    RealCost cost = build_stommel_spectral({10, 0.1, 64});
    REQUIRE(cost.n_vars() == 20);

    SUBCASE("J is symmetric positive semidefinite") {
        const Eigen::MatrixXd& J = cost.quadratic_matrix();
        CHECK(J.isApprox(J.transpose(), 1e-12));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() > -1e-9 * es.eigenvalues().maxCoeff());
    }
    SUBCASE("m = 2 rows of h vanish by orthogonality") {
        for (int mode_n = 1; mode_n <= 10; ++mode_n) {
            const int i = (mode_n - 1) * 2 + 1;  // m = 2
            CHECK(std::abs(cost.linear()[i]) < 1e-10);
        }
    }
    SUBCASE("diagonal entry matches its closed-form integral") {
        // For (n,m) = (1,1): J = pi^2/4 + eps^2 pi^4, worked out by hand
        // (the cos*sin cross term integrates to zero).
        const double eps = 0.1;
        const double expected = kPi * kPi / 4.0 + eps * eps * std::pow(kPi, 4);
        CHECK(cost.quadratic_matrix()(0, 0) == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("constant term is the integral of B^2 = pi^2/2") {
        CHECK(cost.constant() == doctest::Approx(kPi * kPi / 2.0).epsilon(1e-12));
    }
    SUBCASE("node-count invariant") {
        CHECK_THROWS_AS(build_stommel_spectral({10, 0.1, 12}), ConfigError);
    }
}

TEST_CASE("build_nonlinear_ode") {
    NonlinearConfig config{4, 10.0};
    RealCost cost = build_nonlinear_ode(config);

    SUBCASE("true solution has zero cost") {
        Eigen::VectorXd w(4);
        w << 1.0, 0.0, 1.0, 0.0;  // y = 1 + x^2
        CHECK(evaluate(cost, w) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("residual constant before the penalty is 16/5") {
        RealCost bare = build_nonlinear_ode({4, 10.0});
        // constant = 16/5 + lambda*(1 + 4)
        CHECK(bare.constant() == doctest::Approx(16.0 / 5.0 + 10.0 * 5.0));
    }
    SUBCASE("evaluation matches an independent symmetric-tensor oracle") {
        // Oracle: quadruple loop over the raw tensor
        // Jt_ijpq = i j p q / (i+j+p+q-3), which is permutation invariant by
        // construction, plus the quadratic, constant and penalty terms.
        std::mt19937_64 rng(12);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::VectorXd w(4);
            for (int i = 0; i < 4; ++i) w[i] = u(rng);
            double expect = 16.0 / 5.0;
            for (int i = 1; i < 4; ++i)
                for (int j = 1; j < 4; ++j)
                    for (int p = 1; p < 4; ++p)
                        for (int q = 1; q < 4; ++q)
                            expect += double(i) * j * p * q / (i + j + p + q - 3.0) * w[i] * w[j] *
                                      w[p] * w[q];
            for (int i = 1; i < 4; ++i)
                for (int j = 1; j < 4; ++j) expect += -8.0 * i * j / (i + j + 1.0) * w[i] * w[j];
            const double y0 = w[0];
            const double y1 = w.sum();
            expect += 10.0 * ((y0 - 1.0) * (y0 - 1.0) + (y1 - 2.0) * (y1 - 2.0));
            CHECK(evaluate(cost, w) == doctest::Approx(expect).epsilon(1e-11));
        }
    }
    SUBCASE("config validation") {
        CHECK_THROWS_AS(build_nonlinear_ode({1, 10.0}), ConfigError);
        CHECK_THROWS_AS(build_nonlinear_ode({4, 0.0}), ConfigError);
    }
}

TEST_CASE("solve_quadratic_exact on the Stommel problems") {
    SUBCASE("FD cost vanishes at the exact solution") {
        LinearSystem sys = build_stommel_fd({11, 0.1});
        RealCost cost = least_squares_quadratic(sys);
        Eigen::VectorXd w = solve_quadratic_exact(cost);
        // Thresholds pinned from the oracle run: the residual form of the
        // cost reaches ~1e-24; the expanded quadratic form w'Jw + h'w + c
        // bottoms out near 1e-11 from cancellation of O(1e4) intermediates.
        CHECK((sys.A * w - sys.v).squaredNorm() < 1e-20);
        CHECK(evaluate(cost, w) < 1e-8);
        // Interior residual of the stencil equations, relative to the pi-scale
        // forcing, is zero (self-consistency).
        Eigen::VectorXd residual = sys.A * w - sys.v;
        CHECK(residual.lpNorm<Eigen::Infinity>() / kPi < 1e-12);
    }
    SUBCASE("spectral minimizer matches a separately coded normal-equations solve") {
        RealCost cost = build_stommel_spectral({10, 0.1, 64});
        Eigen::VectorXd w = solve_quadratic_exact(cost);
        Eigen::VectorXd ref =
            cost.quadratic_matrix().ldlt().solve(-0.5 * cost.linear());
        CHECK((w - ref).norm() < 1e-10 * std::max(1.0, ref.norm()));
    }
    SUBCASE("spectral truncation cost is strictly positive, FD cost is not") {
        RealCost spectral = build_stommel_spectral({10, 0.1, 64});
        const double spectral_min = evaluate(spectral, solve_quadratic_exact(spectral));
        LinearSystem sys = build_stommel_fd({11, 0.1});
        RealCost fd = least_squares_quadratic(sys);
        const Eigen::VectorXd w = solve_quadratic_exact(fd);
        const double fd_min = (sys.A * w - sys.v).squaredNorm();
        CHECK(spectral_min > 1e-4);
        CHECK(fd_min < 1e-20);
        CHECK(spectral_min > fd_min);
    }
    SUBCASE("indefinite quadratic raises a numeric error") {
        Eigen::MatrixXd J(2, 2);
        J << 1.0, 0.0, 0.0, -1.0;
        RealCost cost = RealCost::from_quadratic(J, Eigen::VectorXd::Zero(2), 0.0);
        CHECK_THROWS_AS(solve_quadratic_exact(cost), NumericError);
    }
}

TEST_CASE("grid refinement agreement at shared points") {
    Eigen::VectorXd w11 = solve_quadratic_exact(least_squares_quadratic(build_stommel_fd({11, 0.1})));
    Eigen::VectorXd w21 = solve_quadratic_exact(least_squares_quadratic(build_stommel_fd({21, 0.1})));
    Field f11 = field_from_solution(ProblemKind::stommel_fd, w11);
    Field f21 = field_from_solution(ProblemKind::stommel_fd, w21);
    double max_diff = 0.0, max_val = 0.0;
    for (int iy = 0; iy < 11; ++iy) {
        for (int ix = 0; ix < 11; ++ix) {
            max_diff = std::max(max_diff, std::abs(f11.values(iy, ix) - f21.values(2 * iy, 2 * ix)));
            max_val = std::max(max_val, std::abs(f11.values(iy, ix)));
        }
    }
    // Tolerance pinned from a pre-build convergence run of the exact solver
    // (second-order stencils leave a few percent at this resolution).
    CHECK(max_diff < 0.08 * max_val);
}

TEST_CASE("field_from_solution") {
    SUBCASE("FD zero vector renders a zero field") {
        Field f = field_from_solution(ProblemKind::stommel_fd, Eigen::VectorXd::Zero(25));
        CHECK(f.rows() == 5);
        CHECK(f.cols() == 5);
        CHECK(f.values.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("spectral unit coefficient gives sin(pi x) sin(pi y)") {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(4);  // n_x = 2
        w[0] = 1.0;                                    // (n, m) = (1, 1)
        Field f = field_from_solution(ProblemKind::stommel_spectral, w, 9);
        for (int iy = 0; iy < 9; ++iy) {
            for (int ix = 0; ix < 9; ++ix) {
                const double x = ix / 8.0, y = iy / 8.0;
                CHECK(f.values(iy, ix) ==
                      doctest::Approx(std::sin(kPi * x) * std::sin(kPi * y)).epsilon(1e-12));
            }
        }
    }
    SUBCASE("nonlinear coefficients sample the polynomial") {
        Eigen::VectorXd w(4);
        w << 1.0, 0.0, 1.0, 0.0;
        Field f = field_from_solution(ProblemKind::nonlinear_ode, w, 11);
        CHECK(f.rows() == 1);
        for (int k = 0; k < 11; ++k) {
            const double x = k / 10.0;
            CHECK(f.values(0, k) == doctest::Approx(1.0 + x * x));
        }
    }
    SUBCASE("length mismatch") {
        CHECK_THROWS_AS(field_from_solution(ProblemKind::stommel_fd, Eigen::VectorXd::Zero(7)),
                        DimensionError);
    }
}
