#pragma once

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "igafem/errors.hpp"

namespace igafem {

// ---------------------------------------------------------------------------
// Vertex selector expressions
//
//   selector   := "all" | "vertices" "in" bool-expr | "vertices" "of" "set" ident
//   bool-expr  := or-expr
//   or-expr    := and-expr { "|" and-expr }
//   and-expr   := not-expr { "&" not-expr }
//   not-expr   := "~" not-expr | "(" bool-expr ")" | comparison
//   comparison := coord cmp number | number cmp coord
//   coord      := "x" | "y" | "z"
//   cmp        := "<" | ">" | "<=" | ">="
// ---------------------------------------------------------------------------

enum class CompareOp { Less, Greater, LessEqual, GreaterEqual };

struct SelectorNode;
using SelectorPtr = std::shared_ptr<const SelectorNode>;

struct SelectorNode {
    enum class Kind { All, Compare, NamedSet, Not, And, Or };

    Kind kind = Kind::All;
    // Compare
    int axis = 0;  // 0 = x, 1 = y, 2 = z
    CompareOp op = CompareOp::Less;
    double threshold = 0.0;
    // NamedSet
    std::string set_name;
    // Not (child), And/Or (child, rhs)
    SelectorPtr child, rhs;
};

/// Parses a selector string; throws ParseError with the offending offset.
SelectorPtr parse_selector(std::string_view text);

/// Canonical text form (fully parenthesized); parse(print(ast)) == ast.
std::string print_selector(const SelectorNode& node);

bool selector_equal(const SelectorNode& a, const SelectorNode& b);

// ---------------------------------------------------------------------------
// Scalar coordinate expressions for boundary values, e.g. "-0.02*y" or
// "-0.02 + 0.15*(x - 1)^2".  Supported: + - * / ^ (integer powers), unary
// minus, parentheses, numbers and the coordinates x, y, z.
// ---------------------------------------------------------------------------

struct ScalarExprNode;
using ScalarExprPtr = std::shared_ptr<const ScalarExprNode>;

struct ScalarExprNode {
    enum class Kind { Number, Coord, Negate, Add, Subtract, Multiply, Divide, Power };
    Kind kind = Kind::Number;
    double number = 0.0;
    int axis = 0;
    ScalarExprPtr lhs, rhs;
};

ScalarExprPtr parse_scalar_expr(std::string_view text);
double eval_scalar_expr(const ScalarExprNode& expr, const Eigen::Vector3d& point);

// ---------------------------------------------------------------------------
// Regions over a mesh-like object
// ---------------------------------------------------------------------------

/// One boundary facet of a cell; `local` encodes the side as 2*axis + side.
struct MeshFacet {
    int cell = 0;
    int local = 0;
    std::vector<int> vertices;
};

/// Read-only view of the mesh data region evaluation needs.  Both the
/// topological Bezier mesh and classical FE meshes can produce one.  Vertex
/// sets must be sorted ascending.
struct RegionMeshView {
    const Eigen::MatrixXd* vertices = nullptr;                        // nv x space_dim
    const std::vector<std::vector<int>>* cells = nullptr;             // corner ids
    const std::vector<MeshFacet>* boundary_facets = nullptr;
    const std::map<std::string, std::vector<int>>* vertex_sets = nullptr;
};

enum class RegionKind { Cell, Facet, Vertex };

struct Region {
    std::string name;
    RegionKind kind = RegionKind::Cell;
    std::vector<int> vertices;               // always populated, sorted
    std::vector<int> cells;                  // kind Cell: cells with all corners selected
    std::vector<MeshFacet> facets;           // kind Facet: boundary facets fully selected
    std::string selector_text;
};

/// Evaluates a selector over the mesh view into a region of the given kind.
Region eval_selector(const SelectorNode& selector, const RegionMeshView& mesh,
                     RegionKind kind, std::string name = {});

}  // namespace igafem
