#pragma once

#include <array>

#include "igafem/geometry.hpp"
#include "igafem/regions.hpp"

namespace igafem {

enum class FeFamily { Lagrange, Lobatto };

struct FeBasis {
    FeFamily family = FeFamily::Lagrange;
    int order = 1;  // 1..4
    int dim = 2;
};

struct FeBasisValues {
    Eigen::VectorXd values;     // (order+1)^dim entries, tensor order, axis 0 fastest
    Eigen::MatrixXd gradients;  // reference gradients on [-1,1]^dim
};

/// Tensor-product shape functions on the reference cube [-1,1]^dim.
///
/// Per axis the 1D functions are ordered with the two vertex functions first
/// for Lobatto (left, right, then bubbles of increasing order) and by node
/// position for Lagrange (equispaced nodes, left to right).
FeBasisValues fe_basis_eval(const FeBasis& basis, const Eigen::Vector3d& xi);

/// Structured quad/hex mesh obtained by sampling a patch geometry at uniform
/// parametric steps.  Vertices lie exactly on the patch; cell interiors are
/// straight-sided, so the mesh only approximates curved geometry.
struct FeMesh {
    int dim = 0;
    int space_dim = 0;
    std::array<int, 3> divisions = {1, 1, 1};
    Eigen::MatrixXd vertices;
    std::vector<std::vector<int>> cells;  // VTK corner ordering
    std::vector<MeshFacet> boundary_facets;
    std::map<std::string, std::vector<int>> vertex_sets;  // xi<axis><side>

    int vertex_index(int i0, int i1 = 0, int i2 = 0) const;
    int cell_index(int e0, int e1 = 0, int e2 = 0) const;
    std::array<int, 3> cell_multi_index(int cell) const;
    /// Cell corner vertices in tensor (lexicographic) order.
    std::vector<int> cell_corners_lex(int cell) const;
    RegionMeshView region_view() const;
};

FeMesh make_fe_mesh(const NurbsPatch& patch, std::array<int, 3> divisions);

/// Scalar degree-of-freedom layout of a tensor FE basis on a structured mesh.
/// Counts are identical for both families; only the interpretation of the
/// interior unknowns differs (nodes vs hierarchic bubbles).
class FeDofMap {
public:
    FeDofMap(const FeMesh& mesh, FeBasis basis);

    const FeBasis& basis() const noexcept { return basis_; }
    int scalar_size() const noexcept { return scalar_size_; }
    int size_1d(int axis) const { return size_1d_.at(axis); }

    /// Global 1D index of local function `a` on 1D element `elem` of an axis.
    int axis_dof(int axis, int elem, int a) const;

    /// Scalar dofs of a cell, tensor order matching fe_basis_eval.
    std::vector<int> cell_dofs(const std::array<int, 3>& cell) const;

    /// All scalar dofs supported on a patch side (axis, side 0/1), sorted.
    std::vector<int> side_dofs(int axis, int side) const;

    /// Parametric position of a Lagrange node along one axis, in [0,1].
    double lagrange_node_param(int axis, int dof1d) const;

private:
    FeBasis basis_;
    std::array<int, 3> divisions_;
    std::array<int, 3> size_1d_;
    int scalar_size_ = 0;
};

/// Physical position of a Lagrange node, evaluated through the straight-sided
/// cell geometry so it is consistent with the FE space.
Eigen::VectorXd lagrange_node_position(const FeMesh& mesh, const FeDofMap& dofs,
                                       const std::array<int, 3>& node);

}  // namespace igafem
