#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "annealpde/encoding.hpp"

namespace annealpde {

/// Uniform N x N grid over the unit square including boundary points, so the
/// spacing is 1/(N-1). Gridpoint (ix, iy) maps to row index iy*N + ix.
struct GridSpec {
    int n = 0;
    double spacing() const { return 1.0 / (n - 1); }
    int index(int ix, int iy) const { return iy * n + ix; }
};

/// Square linear system A w = v from a discretized PDE. Boundary gridpoints
/// own identity rows with zero right-hand side (Dirichlet conditions live in
/// the system itself, keeping all N^2 unknowns).
struct LinearSystem {
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd v;
    GridSpec grid;
};

/// Wind-driven gyre with bottom friction on the unit square:
/// psi_x + epsilon * laplacian(psi) + d(tau_x)/dy = 0, tau_x = -cos(pi y),
/// psi = 0 on the boundary.
struct StommelConfig {
    int n = 11;
    double epsilon = 0.1;
};

/// Fourier sine expansion of the same gyre problem with zonal modes
/// n = 1..n_x and meridional modes m in {1, 2}. Basis index is
/// (n-1)*2 + (m-1). Integrals use tensor-product Gauss-Legendre quadrature.
struct SpectralConfig {
    int n_x = 10;
    double epsilon = 0.1;
    int quadrature_nodes = 64;
};
inline constexpr int kMeridionalModes = 2;

/// Nonlinear model problem (dy/dx)^2 - 4x^2 = 0 on [0,1] with y(0) = 1,
/// y(1) = 2, expanded in the monomial basis x^m, m = 0..n_basis-1. The
/// boundary conditions enter as a quadratic penalty with weight bc_penalty.
struct NonlinearConfig {
    int n_basis = 4;
    double bc_penalty = 10.0;
};

/// Second-order central differences, interior rows only; boundary rows are
/// identity equations with zero right-hand side. The inhomogeneous wind term
/// moves to v: each interior row reads (A w)_r = -pi sin(pi y_r).
LinearSystem build_stommel_fd(const StommelConfig& config);

/// Least-squares cost ||A w - v||^2 = w^T (A^T A) w - 2 (A^T v)^T w + v^T v.
RealCost least_squares_quadratic(const LinearSystem& sys);

RealCost build_stommel_spectral(const SpectralConfig& config);

RealCost build_nonlinear_ode(const NonlinearConfig& config);

/// Minimizer of a positive-semidefinite quadratic cost via the stationarity
/// system 2 J w = -h (least-norm solution when singular). An indefinite J is
/// a numeric error.
Eigen::VectorXd solve_quadratic_exact(const RealCost& cost);

enum class ProblemKind { stommel_fd, stommel_spectral, nonlinear_ode };

/// Rendered solution: an N x N streamfunction field for the Stommel
/// problems, a 1 x resolution curve for the nonlinear problem.
struct Field {
    Eigen::MatrixXd values;  // (rows = y / single row, cols = x)
    int rows() const { return static_cast<int>(values.rows()); }
    int cols() const { return static_cast<int>(values.cols()); }
};

/// FD: reshapes w to its native N x N grid (resolution 0 or N). Spectral:
/// evaluates the sine series on a resolution^2 grid. Nonlinear: samples the
/// polynomial on `resolution` points of [0, 1].
Field field_from_solution(ProblemKind kind, const Eigen::VectorXd& w, int resolution = 0);

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace annealpde
