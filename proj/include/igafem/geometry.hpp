#pragma once

#include <array>
#include <vector>

#include "igafem/splines.hpp"

namespace igafem {

/// Parametric coordinates; entries beyond the patch dimension are ignored.
using ParamPoint = Eigen::Vector3d;

/// Single tensor-product NURBS patch.  Control points are stored flattened
/// with the first parametric axis running fastest:
///   A = i0 + n0 * (i1 + n1 * i2).
class NurbsPatch {
public:
    NurbsPatch(std::vector<KnotVector> axes, Eigen::MatrixXd control_points,
               Eigen::VectorXd weights, int space_dim);

    int dim() const noexcept { return static_cast<int>(axes_.size()); }
    int space_dim() const noexcept { return space_dim_; }

    const KnotVector& axis(int d) const { return axes_.at(d); }
    int basis_size(int d) const { return axes_.at(d).basis_size(); }
    int basis_size() const;

    const Eigen::MatrixXd& control_points() const noexcept { return control_; }
    const Eigen::VectorXd& weights() const noexcept { return weights_; }

    int global_index(int i0, int i1 = 0, int i2 = 0) const;
    std::array<int, 3> multi_index(int A) const;

    /// Product of per-axis non-empty span counts.
    int element_count() const;

    /// Same geometry, one more knot along the given axis (projective refinement).
    NurbsPatch with_inserted_knot(int axis_dir, double xibar) const;

    /// Linear (degree 1) extrusion into the next space dimension.
    NurbsPatch extruded(double thickness) const;

    /// The (dim-1)-dimensional sub-patch spanned by the control layer on one
    /// side: side 0 is the first layer of `axis_dir`, side 1 the last.
    NurbsPatch boundary_patch(int axis_dir, int side) const;

    /// Global indices of that layer, ordered like the sub-patch basis.
    std::vector<int> boundary_layer_indices(int axis_dir, int side) const;

private:
    std::vector<KnotVector> axes_;
    Eigen::MatrixXd control_;
    Eigen::VectorXd weights_;
    int space_dim_;
};

struct PatchBasis {
    std::vector<int> active;    // global function indices, first axis fastest
    Eigen::VectorXd values;
    Eigen::MatrixXd gradients;  // one row per active function, d/dxi
};

/// Rational basis functions supported at a parametric point.
PatchBasis patch_basis_eval(const NurbsPatch& patch, const ParamPoint& xi);

/// Geometry map evaluation.
Eigen::VectorXd patch_point(const NurbsPatch& patch, const ParamPoint& xi);

struct PatchJacobian {
    Eigen::MatrixXd matrix;   // space_dim x dim
    double det = 0.0;         // set when the matrix is square
    Eigen::MatrixXd inverse;  // dim x dim, set when the matrix is square
};

/// Jacobian of the geometry map; throws std::domain_error when a square
/// Jacobian is numerically singular.
PatchJacobian patch_jacobian(const NurbsPatch& patch, const ParamPoint& xi);

/// The demo computational domain: a quarter of a circular ring with radii 1
/// and 3 in the first quadrant, represented exactly by one biquadratic
/// rational patch.  Axis 0 runs radially from the outer to the inner arc
/// (four distinct knot values), axis 1 sweeps the angle from the positive y
/// axis to the positive x axis (five distinct knot values), giving a 5x6 net
/// of control points and positive Jacobian orientation.
NurbsPatch make_demo_domain();

/// The same ring quarter extruded to a solid of the given thickness.
NurbsPatch make_demo_domain_3d(double thickness = 0.5);

/// Identity-mapped unit interval/square/cube: a B-spline patch whose control
/// points sit at the Greville points, so the geometry map is x = xi.
NurbsPatch make_unit_patch(int dim, int degree, int spans_per_axis);

}  // namespace igafem
