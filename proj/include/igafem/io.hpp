#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "igafem/fem.hpp"
#include "igafem/geometry.hpp"
#include "igafem/regions.hpp"
#include "igafem/solve.hpp"

namespace igafem {

// ---------------------------------------------------------------------------
// Domain files (.igad): a JSON document carrying one NURBS patch with keys
// version, dim, space_dim, degrees, knots, control_points, weights.  Control
// points are flattened with the first parametric axis running fastest.
// ---------------------------------------------------------------------------

void write_domain_file(const NurbsPatch& patch, const std::string& path);
NurbsPatch read_domain_file(const std::string& path);

// ---------------------------------------------------------------------------
// Problem description files: JSON with the sections regions, fields,
// variables, ebcs, materials, integrals, equations and solvers.  Entries
// mirror the tuple layout of the classic declarative format, e.g.
//
//   "fields":    {"temperature": ["real", 1, "Omega", null, "H1", "iga"]},
//   "variables": {"T": ["unknown field", "temperature", 0],
//                 "s": ["test field", "temperature", "T"]},
//   "ebcs":      {"t1": ["Gamma1", {"T.0": 0.5}]},
//   "equations": {"Temperature": "dw_laplace.i.Omega(s, T)
//                                 = dw_volume_lvf.i.Omega_0(m.f, s)"}
// ---------------------------------------------------------------------------

struct RegionSpec {
    std::string selector;
    RegionKind kind = RegionKind::Cell;
};

struct FieldSpec {
    std::string dtype = "real";
    int components = 1;
    std::string region = "Omega";
    int order = 0;  // 0 when the domain file dictates the order
    std::string space = "H1";
    std::string family = "lagrange";  // "iga", "lagrange" or "lobatto"
};

struct VariableSpec {
    bool unknown = false;
    std::string field;
    std::string dual;  // test variables name their unknown partner
};

struct EbcValue {
    int component = -1;  // -1 applies to every component
    std::string text;
    ScalarExprPtr expr;
};

struct EbcSpec {
    std::string name;
    std::string region;
    std::string variable;
    std::vector<EbcValue> values;
};

struct MaterialParam {
    bool scalar = true;
    double value = 0.0;     // scalar parameters such as a source density
    double lam = 0.0, mu = 0.0;  // isotropic stiffness parameters
};

struct TermSpec {
    std::string name;      // dw_laplace, dw_volume_lvf, dw_lin_elastic
    std::string integral;
    std::string region;
    std::vector<std::string> args;
    int sign = 1;  // with the term moved to the left-hand side
};

struct EquationSpec {
    std::string name;
    std::string text;
    std::vector<TermSpec> terms;
};

struct ProblemSpec {
    std::string name;
    std::string base_dir;
    std::string domain_path;  // resolved against base_dir
    std::array<int, 3> divisions = {0, 0, 0};  // companion mesh for FE fields

    std::map<std::string, RegionSpec> regions;
    std::map<std::string, FieldSpec> fields;
    std::map<std::string, VariableSpec> variables;
    std::vector<EbcSpec> ebcs;  // in file order; later entries win conflicts
    std::map<std::string, std::map<std::string, MaterialParam>> materials;
    std::map<std::string, int> integrals;
    std::vector<EquationSpec> equations;

    SolverConfig solver;
};

/// Parses and cross-validates a problem file: every referenced region, field,
/// variable, integral and material parameter must resolve, and term names
/// must be supported.
ProblemSpec read_problem_file(const std::string& path);

/// Equation text -> signed term list (every term moved to the left-hand
/// side).  A side consisting of the literal 0 contributes nothing.
std::vector<TermSpec> parse_equation(std::string_view text);

// ---------------------------------------------------------------------------
// Post-processing
// ---------------------------------------------------------------------------

/// A patch solution sampled onto a uniform parameter grid for viewers that
/// only understand straight-sided cells.
struct LinearizedField {
    FeMesh mesh;
    Eigen::MatrixXd values;  // one row per vertex, one column per component
};

/// Samples field coefficients at `samples[d]` uniform parameters per axis
/// (at least 2).  The component count is inferred from the coefficient
/// vector length.
LinearizedField linearize_field(const NurbsPatch& patch, const Eigen::VectorXd& dofs,
                                std::array<int, 3> samples);

struct VtkPointData {
    std::string name;
    Eigen::MatrixXd values;  // one column = scalars, otherwise vectors
};

/// Legacy ASCII VTK unstructured-grid writer.  Points and vector data are
/// padded with zeros to three components; quads are written as cell type 9,
/// hexahedra as 12; reals carry 9 significant digits.  Nothing is written
/// when the data sizes disagree with the vertex count.
void write_vtk(const Eigen::MatrixXd& vertices, const std::vector<std::vector<int>>& cells,
               int dim, const std::vector<VtkPointData>& data, const std::string& path);

}  // namespace igafem
