#include "annealpde/problems.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace annealpde {

namespace {
constexpr double kPi = std::numbers::pi;
}

LinearSystem build_stommel_fd(const StommelConfig& config) {
    if (config.n < 3) throw ConfigError("stommel-fd: n must be >= 3");
    if (config.epsilon <= 0.0) throw ConfigError("stommel-fd: epsilon must be positive");

    const int n = config.n;
    const GridSpec grid{n};
    const double d = grid.spacing();
    const double inv2d = 1.0 / (2.0 * d);
    const double eps_d2 = config.epsilon / (d * d);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(5 * n * n));
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n * n);

    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const int r = grid.index(ix, iy);
            const bool boundary = ix == 0 || ix == n - 1 || iy == 0 || iy == n - 1;
            if (boundary) {
                triplets.emplace_back(r, r, 1.0);  // psi = 0
                continue;
            }
            triplets.emplace_back(r, grid.index(ix + 1, iy), inv2d + eps_d2);
            triplets.emplace_back(r, grid.index(ix - 1, iy), -inv2d + eps_d2);
            triplets.emplace_back(r, grid.index(ix, iy + 1), eps_d2);
            triplets.emplace_back(r, grid.index(ix, iy - 1), eps_d2);
            triplets.emplace_back(r, r, -4.0 * eps_d2);
            // d(tau_x)/dy = pi sin(pi y) moves to the right-hand side.
            const double y = iy * d;
            v[r] = -kPi * std::sin(kPi * y);
        }
    }

    LinearSystem sys;
    sys.A.resize(n * n, n * n);
    sys.A.setFromTriplets(triplets.begin(), triplets.end());
    sys.v = std::move(v);
    sys.grid = grid;
    return sys;
}

RealCost least_squares_quadratic(const LinearSystem& sys) {
    const Eigen::SparseMatrix<double> At = sys.A.transpose();
    Eigen::MatrixXd J = Eigen::MatrixXd(At * sys.A);
    Eigen::VectorXd h = -2.0 * (At * sys.v);
    return RealCost::from_quadratic(std::move(J), std::move(h), sys.v.squaredNorm());
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw ConfigError("gauss_legendre: need at least one node");
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < (n + 1) / 2; ++k) {
        // Newton on P_n starting from the Chebyshev-like estimate.
        double x = std::cos(kPi * (k + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map [-1,1] -> [0,1]; roots come out in descending order.
        nodes[static_cast<std::size_t>(n - 1 - k)] = 0.5 * (1.0 + x);
        nodes[static_cast<std::size_t>(k)] = 0.5 * (1.0 - x);
        weights[static_cast<std::size_t>(n - 1 - k)] = 0.5 * w;
        weights[static_cast<std::size_t>(k)] = 0.5 * w;
    }
}

RealCost build_stommel_spectral(const SpectralConfig& config) {
    if (config.n_x < 1) throw ConfigError("stommel-spectral: n_x must be >= 1");
    if (config.epsilon <= 0.0) throw ConfigError("stommel-spectral: epsilon must be positive");
    const int max_mode = std::max(config.n_x, kMeridionalModes);
    if (config.quadrature_nodes < 2 * max_mode + 2) {
        throw ConfigError("stommel-spectral: need at least " + std::to_string(2 * max_mode + 2) +
                          " quadrature nodes per axis");
    }

    const int nb = config.n_x * kMeridionalModes;
    std::vector<double> x, wx;
    gauss_legendre(config.quadrature_nodes, x, wx);
    const std::size_t nq = x.size();

    // G_{nm}(x,y) = pi n cos(pi n x) sin(pi m y)
    //            - eps pi^2 (n^2 + m^2) sin(pi n x) sin(pi m y)
    // evaluated on the tensor grid, one row per basis function.
    Eigen::MatrixXd G(nb, static_cast<Eigen::Index>(nq * nq));
    Eigen::VectorXd B(static_cast<Eigen::Index>(nq * nq));
    Eigen::VectorXd w2(static_cast<Eigen::Index>(nq * nq));
    for (std::size_t kx = 0; kx < nq; ++kx) {
        for (std::size_t ky = 0; ky < nq; ++ky) {
            const Eigen::Index col = static_cast<Eigen::Index>(kx * nq + ky);
            w2[col] = wx[kx] * wx[ky];
            B[col] = kPi * std::sin(kPi * x[ky]);
            for (int mode_n = 1; mode_n <= config.n_x; ++mode_n) {
                for (int mode_m = 1; mode_m <= kMeridionalModes; ++mode_m) {
                    const int i = (mode_n - 1) * kMeridionalModes + (mode_m - 1);
                    const double sy = std::sin(kPi * mode_m * x[ky]);
                    G(i, col) = kPi * mode_n * std::cos(kPi * mode_n * x[kx]) * sy -
                                config.epsilon * kPi * kPi * (mode_n * mode_n + mode_m * mode_m) *
                                    std::sin(kPi * mode_n * x[kx]) * sy;
                }
            }
        }
    }

    const Eigen::MatrixXd Gw = G * w2.asDiagonal();
    Eigen::MatrixXd J = Gw * G.transpose();          // J_ij = integral G_i G_j
    Eigen::VectorXd h = 2.0 * (Gw * B);              // h_i  = 2 integral B G_i
    const double constant = B.dot(w2.asDiagonal() * B);
    return RealCost::from_quadratic(std::move(J), std::move(h), constant);
}

RealCost build_nonlinear_ode(const NonlinearConfig& config) {
    if (config.n_basis < 2) throw ConfigError("nonlinear: n_basis must be >= 2");
    if (config.bc_penalty <= 0.0) throw ConfigError("nonlinear: bc_penalty must be positive");

    const int nb = config.n_basis;
    RealCost cost(CostDegree::quartic, nb);
    cost.add_constant(16.0 / 5.0);  // integral of 16 x^4 over [0,1]

    // J_ij = integral of (-8 x^2) phi'_i phi'_j = -8 i j / (i + j + 1);
    // phi'_0 = 0 so index 0 never contributes.
    for (int i = 1; i < nb; ++i) {
        for (int j = i; j < nb; ++j) {
            cost.add_quadratic_sym(i, j, -8.0 * i * j / (i + j + 1.0));
        }
    }

    // Jtilde_ijpq = integral phi'_i phi'_j phi'_p phi'_q
    //             = i j p q / (i + j + p + q - 3), summed over all index
    // orders; stored once per sorted quadruple with the permutation count.
    for (int a = 1; a < nb; ++a) {
        for (int b = a; b < nb; ++b) {
            for (int c = b; c < nb; ++c) {
                for (int d = c; d < nb; ++d) {
                    const double tensor =
                        static_cast<double>(a) * b * c * d / (a + b + c + d - 3.0);
                    int counts[4] = {1, 0, 0, 0};
                    int distinct = 0;
                    const int idx[4] = {a, b, c, d};
                    for (int k = 1; k < 4; ++k) {
                        if (idx[k] == idx[k - 1]) {
                            ++counts[distinct];
                        } else {
                            counts[++distinct] = 1;
                        }
                    }
                    int mult = 24;
                    for (int k = 0; k <= distinct; ++k) {
                        for (int f = 2; f <= counts[k]; ++f) mult /= f;
                    }
                    cost.add_quartic({a, b, c, d}, tensor * mult);
                }
            }
        }
    }

    // Boundary penalty lambda * [ (y(0) - 1)^2 + (y(1) - 2)^2 ] with
    // y(0) = w_0 and y(1) = sum_m w_m.
    const double lam = config.bc_penalty;
    cost.add_quadratic_sym(0, 0, lam);
    cost.add_linear(0, -2.0 * lam);
    cost.add_constant(lam);
    for (int i = 0; i < nb; ++i) {
        cost.add_quadratic_sym(i, i, lam);
        for (int j = i + 1; j < nb; ++j) cost.add_quadratic_sym(i, j, lam);
        cost.add_linear(i, -4.0 * lam);
    }
    cost.add_constant(4.0 * lam);
    return cost;
}

Eigen::VectorXd solve_quadratic_exact(const RealCost& cost) {
    if (cost.degree() != CostDegree::quadratic) {
        throw DomainError("solve_quadratic_exact: cost must be quadratic");
    }
    const Eigen::MatrixXd& J = cost.quadratic_matrix();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("solve_quadratic_exact: eigensolve failed");
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo < -1e-10 * std::max(1.0, std::abs(hi))) {
        throw NumericError("solve_quadratic_exact: indefinite quadratic (min eigenvalue " +
                           format_double(lo) + ", max " + format_double(hi) + ")");
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(2.0 * J);
    Eigen::VectorXd w = cod.solve(-cost.linear());
    // Iterative refinement: the normal-equations system squares the problem's
    // conditioning, a couple of residual corrections recover the lost digits.
    for (int pass = 0; pass < 3; ++pass) {
        const Eigen::VectorXd residual = -cost.linear() - 2.0 * (J * w);
        w += cod.solve(residual);
    }
    return w;
}

Field field_from_solution(ProblemKind kind, const Eigen::VectorXd& w, int resolution) {
    Field field;
    switch (kind) {
        case ProblemKind::stommel_fd: {
            const int n = static_cast<int>(std::lround(std::sqrt(double(w.size()))));
            if (n * n != w.size() || n < 3) {
                throw DimensionError("field_from_solution: FD vector is not a square grid");
            }
            if (resolution != 0 && resolution != n) {
                throw DimensionError("field_from_solution: FD fields render on their own grid");
            }
            field.values.resize(n, n);
            for (int iy = 0; iy < n; ++iy)
                for (int ix = 0; ix < n; ++ix) field.values(iy, ix) = w[iy * n + ix];
            return field;
        }
        case ProblemKind::stommel_spectral: {
            if (w.size() % kMeridionalModes != 0 || w.size() == 0) {
                throw DimensionError("field_from_solution: spectral vector length must be even");
            }
            const int n_x = static_cast<int>(w.size()) / kMeridionalModes;
            const int res = resolution == 0 ? 33 : resolution;
            if (res < 2) throw DimensionError("field_from_solution: resolution must be >= 2");
            field.values = Eigen::MatrixXd::Zero(res, res);
            for (int iy = 0; iy < res; ++iy) {
                const double y = static_cast<double>(iy) / (res - 1);
                for (int ix = 0; ix < res; ++ix) {
                    const double x = static_cast<double>(ix) / (res - 1);
                    double sum = 0.0;
                    for (int mode_n = 1; mode_n <= n_x; ++mode_n) {
                        for (int mode_m = 1; mode_m <= kMeridionalModes; ++mode_m) {
                            sum += w[(mode_n - 1) * kMeridionalModes + (mode_m - 1)] *
                                   std::sin(kPi * mode_n * x) * std::sin(kPi * mode_m * y);
                        }
                    }
                    field.values(iy, ix) = sum;
                }
            }
            return field;
        }
        case ProblemKind::nonlinear_ode: {
            if (w.size() == 0) throw DimensionError("field_from_solution: empty coefficients");
            const int res = resolution == 0 ? 101 : resolution;
            if (res < 2) throw DimensionError("field_from_solution: resolution must be >= 2");
            field.values.resize(1, res);
            for (int k = 0; k < res; ++k) {
                const double x = static_cast<double>(k) / (res - 1);
                double pw = 1.0, sum = 0.0;
                for (int m = 0; m < w.size(); ++m, pw *= x) sum += w[m] * pw;
                field.values(0, k) = sum;
            }
            return field;
        }
    }
    throw DomainError("field_from_solution: unknown problem kind");
}

}  // namespace annealpde
