// Command-line front end: solve, info, make-mesh and compare subcommands.
// Exit codes: 0 success, 1 bad input, 2 solver failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "igafem/driver.hpp"

namespace {

using namespace igafem;

std::string format_real(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.6g", value);
    return buffer;
}

std::array<int, 3> parse_divisions(const std::vector<int>& values, const std::string& flag) {
    if (values.size() < 2 || values.size() > 3)
        throw ValidationError(flag + " needs 2 or 3 comma-separated cell counts");
    std::array<int, 3> divisions = {1, 1, 1};
    for (std::size_t d = 0; d < values.size(); ++d) {
        if (values[d] < 1) throw ValidationError(flag + " entries must be positive");
        divisions[d] = values[d];
    }
    return divisions;
}

void print_run(const RunResult& result) {
    std::cout << "problem: " << result.problem << "\n";
    std::cout << "backend: " << result.backend << "\n";
    std::cout << "DOFs: " << result.active_dofs << "\n";
    std::cout << "iterations: " << result.report.iterations << "\n";
    std::cout << "residual: " << format_real(result.report.residual_norms.back()) << "\n";
    for (const std::string& path : result.outputs) std::cout << "wrote: " << path << "\n";
}

int cmd_solve(const std::string& problem_file, const RunOptions& options) {
    const ProblemSpec spec = read_problem_file(problem_file);
    const RunResult result = run_problem(spec, options);
    print_run(result);
    if (!result.report.converged) {
        std::cerr << "error: " << result.report.failure << "\n";
        return 2;
    }
    return 0;
}

int cmd_info(const std::string& domain_file) {
    const NurbsPatch patch = read_domain_file(domain_file);
    std::cout << "dim: " << patch.dim() << "\n";
    std::cout << "space dim: " << patch.space_dim() << "\n";

    std::cout << "degrees:";
    for (int d = 0; d < patch.dim(); ++d) std::cout << ' ' << patch.axis(d).degree();
    std::cout << "\n";
    for (int d = 0; d < patch.dim(); ++d) {
        std::cout << "knots[" << d << "]:";
        for (const double knot : patch.axis(d).knots()) std::cout << ' ' << format_real(knot);
        std::cout << "\n";
    }
    std::cout << "basis size: " << patch.basis_size() << "\n";

    const BezierMesh mesh = extract_patch(patch);
    std::cout << "bezier elements: " << static_cast<int>(mesh.elements.size()) << "\n";

    const TopoBezierMesh topo = build_topo_mesh(mesh, patch);
    std::cout << "vertex sets:";
    for (const auto& [name, vertices] : topo.vertex_sets) std::cout << ' ' << name;
    std::cout << "\n";
    return 0;
}

int cmd_make_mesh(const std::string& domain_file, const std::vector<int>& divisions_flag,
                  const std::string& out_path) {
    const NurbsPatch patch = read_domain_file(domain_file);
    const std::array<int, 3> divisions = parse_divisions(divisions_flag, "--divisions");
    const FeMesh mesh = make_fe_mesh(patch, divisions);
    write_vtk(mesh.vertices, mesh.cells, mesh.dim, {}, out_path);
    std::cout << "points: " << mesh.vertices.rows() << "\n";
    std::cout << "cells: " << mesh.cells.size() << "\n";
    std::cout << "wrote: " << out_path << "\n";
    return 0;
}

int cmd_compare(const std::string& problem_file, const std::vector<int>& divisions_flag,
                int order, int samples) {
    const ProblemSpec spec = read_problem_file(problem_file);
    const std::array<int, 3> divisions = parse_divisions(divisions_flag, "--fem-divisions");
    const ProblemSpec twin = classical_twin(spec, divisions, order);

    const RunResult iga = run_problem(spec);
    print_run(iga);
    if (!iga.report.converged) {
        std::cerr << "error: " << iga.report.failure << "\n";
        return 2;
    }

    const RunResult fem = run_problem(twin);
    print_run(fem);
    if (!fem.report.converged) {
        std::cerr << "error: " << fem.report.failure << "\n";
        return 2;
    }

    std::array<int, 3> grid = {samples, samples, samples};
    const double difference = max_pointwise_difference(
        *iga.field, iga.report.solution, *fem.field, fem.report.solution, grid);
    std::cout << "max pointwise difference: " << format_real(difference) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Isogeometric diffusion and elasticity solver"};
    app.require_subcommand(1);

    std::string problem_file, domain_file, out_dir, out_path = "mesh.vtk";
    std::vector<int> divisions_flag;
    int samples = 20, order = 2;
    double warp = 0.0;

    CLI::App* solve = app.add_subcommand("solve", "Solve a problem file and write VTK output");
    solve->add_option("problem", problem_file, "problem description file")->required();
    solve->add_option("--out", out_dir, "output directory (default: no files)");
    solve->add_option("--samples", samples, "linearization samples per axis");
    solve->add_option("--warp", warp, "write a second VTK with the geometry displaced");

    CLI::App* info = app.add_subcommand("info", "Describe a domain file");
    info->add_option("domain", domain_file, "domain file")->required();

    CLI::App* make_mesh =
        app.add_subcommand("make-mesh", "Sample a domain into a straight-sided VTK mesh");
    make_mesh->add_option("domain", domain_file, "domain file")->required();
    make_mesh->add_option("--divisions", divisions_flag, "cells per axis, e.g. 16,16")
        ->required()
        ->delimiter(',');
    make_mesh->add_option("--out", out_path, "output mesh path");

    CLI::App* compare =
        app.add_subcommand("compare", "Solve with the patch basis and a nodal twin");
    compare->add_option("problem", problem_file, "problem description file")->required();
    compare
        ->add_option("--fem-divisions", divisions_flag, "twin mesh cells per axis")
        ->delimiter(',');
    compare->add_option("--order", order, "twin approximation order");
    compare->add_option("--samples", samples, "comparison grid points per axis");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            RunOptions options;
            options.out_dir = out_dir;
            options.samples = samples;
            options.warp = warp;
            return cmd_solve(problem_file, options);
        }
        if (info->parsed()) return cmd_info(domain_file);
        if (make_mesh->parsed()) return cmd_make_mesh(domain_file, divisions_flag, out_path);
        if (compare->parsed()) {
            if (divisions_flag.empty()) divisions_flag = {14, 24};
            return cmd_compare(problem_file, divisions_flag, order, samples);
        }
    } catch (const ParseError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    } catch (const ValidationError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    } catch (const SolveError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 2;
    }
    return 0;
}
