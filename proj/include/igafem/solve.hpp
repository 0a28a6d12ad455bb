#pragma once

#include <string>
#include <vector>

#include "igafem/assembly.hpp"

namespace igafem {

enum class LinearSolverKind { Direct, ConjugateGradient };

struct SolverConfig {
    LinearSolverKind kind = LinearSolverKind::Direct;
    double cg_tolerance = 1e-12;  // relative to the right-hand side norm
    int cg_max_iterations = 0;    // 0 picks 10 * system size

    int newton_max_iterations = 1;
    double newton_tolerance = 1e-10;  // absolute residual norm
};

struct LinearSolveInfo {
    int iterations = 0;                    // 0 on the direct path
    std::vector<double> residual_history;  // conjugate gradients only
};

/// Solves the constrained sparse system.  The iterative path is conjugate
/// gradients with a Jacobi preconditioner; its start vector carries the
/// prescribed values, so constrained entries stay exact throughout.  Throws
/// SolveError when the factorization fails or the iteration stalls.
Eigen::VectorXd solve_linear(const LinearSystem& system, const SolverConfig& config,
                             LinearSolveInfo* info = nullptr);

struct NewtonReport {
    bool converged = false;
    int iterations = 0;
    std::vector<double> residual_norms;  // starts with the initial residual
    std::string failure;                 // reason when not converged
    Eigen::VectorXd solution;
    LinearSolveInfo linear;
};

/// Newton driver around the linear solve.  The problems here are linear, so
/// a single iteration reaches the tolerance; the report still records the
/// residual trajectory and never throws, solver failures are folded into a
/// non-converged report.
NewtonReport newton_solve(const LinearSystem& system, const SolverConfig& config);

}  // namespace igafem
