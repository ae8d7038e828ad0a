#pragma once

#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace tep {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Convex quadratic program in minimization form:
///
///   minimize    1/2 x'Hx + c'x
///   subject to  A x  = b
///               G x <= h
///               lower <= x <= upper
///
/// H must be symmetric positive semidefinite and stored in full (both
/// triangles). Bounds may be infinite. Variables with lower == upper are fixed.
struct QuadraticProgram {
    SparseMatrix hessian;
    Eigen::VectorXd linear;
    SparseMatrix eq_matrix;
    Eigen::VectorXd eq_rhs;
    SparseMatrix ineq_matrix;
    Eigen::VectorXd ineq_rhs;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Eigen::Index num_variables() const { return linear.size(); }
    double objective(const Eigen::VectorXd& x) const;
};

struct QpSettings {
    /// Relative tolerances on the equilibrated problem.
    double feasibility_tol = 1e-10;
    double optimality_tol = 1e-10;
    int max_iterations = 200;
    /// Ruiz equilibration sweeps applied before solving.
    int scaling_passes = 10;
    /// Static regularization of the KKT system; removed again by iterative refinement.
    double regularization = 1e-9;
    /// Nonzero seeds jitter the starting point. On problems with non-unique
    /// duals this changes which dual solution is returned.
    std::uint64_t start_seed = 0;
    /// Re-solve on the identified active set after convergence.
    bool polish = true;
};

/// Primal-dual solution. Duals follow the Lagrangian
///   L = 1/2 x'Hx + c'x + y'(Ax - b) + z'(Gx - h) - zl'(x - lower) - zu'(upper - x)
/// so that Hx + c + A'y + G'z - zl + zu = 0 with z, zl, zu >= 0.
struct QpResult {
    Eigen::VectorXd x;
    Eigen::VectorXd eq_duals;
    Eigen::VectorXd ineq_duals;
    Eigen::VectorXd lower_duals;
    Eigen::VectorXd upper_duals;
    int iterations = 0;
    bool converged = false;
    /// Infinity-norm residuals on the original (unscaled) problem.
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double complementarity = 0.0;
};

/// Mehrotra predictor-corrector interior-point method on the sparse KKT system.
/// Returns the last iterate with converged == false when the iteration limit
/// is reached; throws NonconvergenceError on numerical breakdown.
QpResult solve_qp(const QuadraticProgram& problem, const QpSettings& settings = {});

}  // namespace tep
