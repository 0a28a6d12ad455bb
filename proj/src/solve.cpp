#include "igafem/solve.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>

namespace igafem {

namespace {

Eigen::VectorXd seeded_start(const LinearSystem& system) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(system.size());
    for (const auto& [dof, value] : system.fixed) x[dof] = value;
    return x;
}

Eigen::VectorXd solve_direct(const LinearSystem& system) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(system.matrix);
    if (solver.info() != Eigen::Success)
        throw SolveError("direct solver: factorization failed");
    Eigen::VectorXd x = solver.solve(system.rhs);
    if (solver.info() != Eigen::Success || !x.allFinite())
        throw SolveError("direct solver: system is singular");
    return x;
}

Eigen::VectorXd solve_cg(const LinearSystem& system, const SolverConfig& config,
                         LinearSolveInfo* info) {
    const Eigen::SparseMatrix<double>& matrix = system.matrix;
    const int n = system.size();
    const int max_iterations = config.cg_max_iterations > 0 ? config.cg_max_iterations : 10 * n;

    Eigen::VectorXd inv_diag(n);
    for (int i = 0; i < n; ++i) {
        const double d = matrix.coeff(i, i);
        if (d <= 0.0)
            throw SolveError("conjugate gradients: matrix diagonal is not positive");
        inv_diag[i] = 1.0 / d;
    }

    Eigen::VectorXd x = seeded_start(system);
    Eigen::VectorXd r = system.rhs - matrix * x;
    Eigen::VectorXd z = inv_diag.asDiagonal() * r;
    Eigen::VectorXd p = z;

    const double target = config.cg_tolerance * std::max(system.rhs.norm(), 1e-300);
    std::vector<double> history{r.norm()};
    double rho = r.dot(z);

    int iteration = 0;
    while (history.back() > target) {
        if (iteration >= max_iterations)
            throw SolveError("conjugate gradients: no convergence within " +
                                 std::to_string(max_iterations) + " iterations",
                             history);
        const Eigen::VectorXd ap = matrix * p;
        const double pap = p.dot(ap);
        if (!(pap > 0.0))
            throw SolveError("conjugate gradients: matrix is not positive definite", history);
        const double alpha = rho / pap;
        x += alpha * p;
        r -= alpha * ap;
        z = inv_diag.asDiagonal() * r;
        const double rho_next = r.dot(z);
        p = z + (rho_next / rho) * p;
        rho = rho_next;
        history.push_back(r.norm());
        ++iteration;
    }

    if (info != nullptr) {
        info->iterations = iteration;
        info->residual_history = std::move(history);
    }
    return x;
}

}  // namespace

Eigen::VectorXd solve_linear(const LinearSystem& system, const SolverConfig& config,
                             LinearSolveInfo* info) {
    if (system.rhs.size() != system.matrix.rows() || system.matrix.rows() != system.matrix.cols())
        throw ValidationError("linear system shape mismatch");
    if (info != nullptr) *info = {};

    if (config.kind == LinearSolverKind::ConjugateGradient) return solve_cg(system, config, info);
    return solve_direct(system);
}

NewtonReport newton_solve(const LinearSystem& system, const SolverConfig& config) {
    NewtonReport report;
    report.solution = seeded_start(system);

    Eigen::VectorXd residual = system.rhs - system.matrix * report.solution;
    report.residual_norms.push_back(residual.norm());

    try {
        while (report.residual_norms.back() > config.newton_tolerance) {
            if (report.iterations >= config.newton_max_iterations) {
                report.failure = "no convergence within " +
                                 std::to_string(config.newton_max_iterations) + " iteration(s)";
                return report;
            }
            LinearSystem step;
            step.matrix = system.matrix;
            step.rhs = residual;
            // The increment is zero on constrained dofs; keeping the fixed
            // map (with zero values) preserves the seeded-start property.
            for (const auto& [dof, value] : system.fixed) step.fixed.emplace(dof, 0.0);

            report.solution += solve_linear(step, config, &report.linear);
            ++report.iterations;
            residual = system.rhs - system.matrix * report.solution;
            report.residual_norms.push_back(residual.norm());
        }
    } catch (const SolveError& error) {
        report.failure = error.what();
        return report;
    }

    report.converged = true;
    return report;
}

}  // namespace igafem
