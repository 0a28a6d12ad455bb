#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "igafem/assembly.hpp"
#include "igafem/io.hpp"
#include "igafem/solve.hpp"

namespace igafem {

// ---------------------------------------------------------------------------
// One-shot problem runner: domain -> field -> regions -> assembly -> boundary
// conditions -> solve -> linearized output files.
// ---------------------------------------------------------------------------

struct RunOptions {
    int samples = 20;     // linearization samples per parametric axis
    double warp = 0.0;    // deformed-geometry scale for vector solutions
    std::string out_dir;  // empty suppresses file output
};

struct RunResult {
    std::string problem;
    std::string backend;   // "iga", "lagrange" or "lobatto"
    std::string unknown;   // name of the solved variable
    int dof_count = 0;     // all dofs, components included
    int active_dofs = 0;   // dofs left after boundary elimination
    NewtonReport report;
    LinearizedField linearized;
    std::vector<std::string> outputs;  // files written, in order

    // Kept alive so callers can keep sampling the solution.
    std::shared_ptr<const NurbsPatch> patch;
    std::shared_ptr<Field> field;
};

/// Runs a problem end to end.  Throws ValidationError or ParseError for bad
/// inputs; solver breakdowns are reported through `report` instead.
RunResult run_problem(const ProblemSpec& spec, const RunOptions& options = {});

/// The classical twin of a problem: every field is switched to nodal shape
/// functions of the given order on a companion mesh with the given cell
/// counts.  Regions, boundary data and equations are kept as they are.
ProblemSpec classical_twin(ProblemSpec spec, std::array<int, 3> divisions, int order);

/// Largest pointwise solution difference over a shared uniform parameter
/// grid, sampled with `samples[d]` points along axis d.
double max_pointwise_difference(const Field& field_a, const Eigen::VectorXd& dofs_a,
                                const Field& field_b, const Eigen::VectorXd& dofs_b,
                                std::array<int, 3> samples);

}  // namespace igafem
