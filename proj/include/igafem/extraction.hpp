#pragma once

#include <array>
#include <vector>

#include "igafem/geometry.hpp"
#include "igafem/regions.hpp"

namespace igafem {

/// Extraction coefficients of one knot span: the rows give each smooth basis
/// function supported on the span as a combination of Bernstein polynomials
/// on that span.  Columns sum to one and all entries are non-negative.
struct ExtractionSpan {
    double lo = 0.0, hi = 0.0;
    int first_func = 0;          // global index of the first supported function
    Eigen::MatrixXd coeffs;      // (degree+1) x (degree+1)
};

struct ExtractionOperator1D {
    int degree = 0;
    std::vector<ExtractionSpan> spans;
};

/// Bezier extraction of one knot vector, computed by inserting every interior
/// knot until its multiplicity equals the degree and slicing the accumulated
/// insertion coefficients span by span.
ExtractionOperator1D extract_1d(const KnotVector& kv);

struct BezierElement {
    std::array<double, 3> lo{}, hi{};  // parametric bounds of the knot-span box
    std::array<int, 3> span{};         // per-axis element index
    std::vector<int> global_funcs;     // local tensor index (axis 0 fastest) -> patch function
    Eigen::MatrixXd op;                // tensor-product extraction operator
    Eigen::VectorXd weights;           // weights of the supported patch functions
    Eigen::MatrixXd bezier_points;     // element Bezier control net
    Eigen::VectorXd bezier_weights;
};

struct BezierMesh {
    int dim = 0;
    int space_dim = 0;
    std::array<int, 3> degrees{};
    std::array<int, 3> elems_per_axis = {1, 1, 1};
    std::array<std::vector<double>, 3> breakpoints;
    std::vector<BezierElement> elements;  // flattened, axis 0 fastest

    int local_size() const { return (degrees[0] + 1) * (degrees[1] + 1) * (degrees[2] + 1); }
    int element_index(int e0, int e1 = 0, int e2 = 0) const;
    /// Element containing the parametric point plus its local coordinates.
    int locate(const ParamPoint& xi, Eigen::Vector3d& zeta) const;
};

BezierMesh extract_patch(const NurbsPatch& patch);

struct ElementBasis {
    Eigen::VectorXd values;
    Eigen::MatrixXd gradients;  // with respect to the patch parameters
};

/// Rational element basis at local coordinates zeta in [0,1]^dim, evaluated
/// as extraction operator times Bernstein polynomials.
ElementBasis element_basis(const BezierMesh& mesh, int element, const Eigen::Vector3d& zeta);

/// Geometry of one element through its Bezier control net.
Eigen::VectorXd element_point(const BezierMesh& mesh, int element, const Eigen::Vector3d& zeta);

/// Corner-vertex companion mesh of the Bezier elements.  Vertices sit exactly
/// on the geometry, cells use VTK corner ordering, and each patch side
/// contributes a vertex set named xi<axis><side>.
struct TopoBezierMesh {
    int dim = 0;
    Eigen::MatrixXd vertices;
    std::vector<std::vector<int>> cells;
    std::vector<MeshFacet> boundary_facets;
    std::map<std::string, std::vector<int>> vertex_sets;
    std::array<int, 3> verts_per_axis = {1, 1, 1};

    int vertex_index(int i0, int i1 = 0, int i2 = 0) const;
    RegionMeshView region_view() const;
};

TopoBezierMesh build_topo_mesh(const BezierMesh& mesh, const NurbsPatch& patch);

}  // namespace igafem
