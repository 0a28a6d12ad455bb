#pragma once

#include <Eigen/Sparse>

#include <map>
#include <memory>
#include <vector>

#include "igafem/extraction.hpp"
#include "igafem/fem.hpp"

namespace igafem {

struct QuadRule {
    Eigen::MatrixXd points;   // one row per point, on [-1,1]^dim
    Eigen::VectorXd weights;
};

/// Tensor-product Gauss-Legendre rule integrating polynomials of the given
/// order exactly along each axis (ceil((order+1)/2) points per axis).
QuadRule quad_rule(int order, int dim);

/// One discretized field: either the rational patch basis in Bezier-extracted
/// form, or a classical FE space on a structured companion mesh.  Vector
/// fields interleave components, dof = scalar_dof * components + component.
class Field {
public:
    static Field make_iga(std::shared_ptr<const NurbsPatch> patch, int components);
    static Field make_fem(std::shared_ptr<const FeMesh> mesh, FeBasis basis, int components);

    bool is_iga() const noexcept { return patch_ != nullptr; }
    int dim() const noexcept { return dim_; }
    int space_dim() const noexcept { return space_dim_; }
    int components() const noexcept { return components_; }
    int scalar_size() const noexcept { return scalar_size_; }
    int dof_count() const noexcept { return scalar_size_ * components_; }
    int element_count() const noexcept { return static_cast<int>(element_dofs_.size()); }

    const std::vector<int>& element_scalar_dofs(int element) const {
        return element_dofs_.at(element);
    }

    /// Everything a weak-form kernel needs at one reference point of one
    /// element.  `weight_factor` already contains the reference-to-parameter
    /// scaling, so integrals are sums of w_q * weight_factor * integrand.
    struct ShapePoint {
        Eigen::VectorXd values;
        Eigen::MatrixXd gradients;  // physical, one row per scalar basis function
        double weight_factor = 0.0;
        Eigen::VectorXd point;      // physical coordinates
        ParamPoint param;           // patch parameters
    };
    ShapePoint shape(int element, const Eigen::Vector3d& ref) const;

    /// Discrete function evaluation at a parametric point; returns one value
    /// per component.
    Eigen::VectorXd eval(const Eigen::VectorXd& dofs, const ParamPoint& xi) const;

    /// Region evaluation view; region cell ids coincide with element ids.
    RegionMeshView region_view() const;

    // Backend-specific access (throws when asked for the wrong backend).
    const NurbsPatch& patch() const;
    const BezierMesh& bezier_mesh() const;
    const TopoBezierMesh& topo_mesh() const;
    const FeMesh& fe_mesh() const;
    const FeDofMap& dof_map() const;

private:
    Field() = default;

    // IGA backend
    std::shared_ptr<const NurbsPatch> patch_;
    std::shared_ptr<const BezierMesh> bezier_;
    std::shared_ptr<const TopoBezierMesh> topo_;
    // FE backend
    std::shared_ptr<const FeMesh> mesh_;
    std::shared_ptr<const FeDofMap> dofs_;
    FeBasis basis_{};

    int dim_ = 0, space_dim_ = 0, components_ = 1, scalar_size_ = 0;
    std::vector<std::vector<int>> element_dofs_;
};

// ---------------------------------------------------------------------------
// Weak-form cell kernels
// ---------------------------------------------------------------------------

/// grad-grad (diffusion) matrix of one element.
Eigen::MatrixXd laplace_cell_matrix(const Field& field, int element, const QuadRule& quad);

/// Load vector of a constant volume source f.
Eigen::VectorXd source_cell_vector(const Field& field, int element, double f,
                                   const QuadRule& quad);

/// Small-strain isotropic elasticity matrix (Voigt form) of one element.
Eigen::MatrixXd elasticity_cell_matrix(const Field& field, int element, double lambda, double mu,
                                       const QuadRule& quad);

// ---------------------------------------------------------------------------
// Systems
// ---------------------------------------------------------------------------

struct LinearSystem {
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd rhs;
    std::map<int, double> fixed;  // constrained dof -> prescribed value

    int size() const { return static_cast<int>(rhs.size()); }
    int active_count() const { return size() - static_cast<int>(fixed.size()); }
};

enum class TermKind { Laplace, VolumeSource, LinearElasticity };

struct TermInstance {
    TermKind kind = TermKind::Laplace;
    const Region* region = nullptr;  // cell region
    double scale = 1.0;              // sign/weight folded in by the caller
    double f = 0.0;                  // VolumeSource
    double lambda = 0.0, mu = 0.0;   // LinearElasticity
    int quad_order = 3;
};

/// Assembles all terms over their cell regions into one sparse system.
LinearSystem assemble(const Field& field, const std::vector<TermInstance>& terms);

// ---------------------------------------------------------------------------
// Essential boundary conditions
// ---------------------------------------------------------------------------

struct EssentialBC {
    std::string name;
    const Region* region = nullptr;                          // facet region
    std::vector<std::pair<int, ScalarExprPtr>> components;   // -1 = all components
};

/// Turns boundary conditions into dof values.  Nodal interpolation for the
/// Lagrange family; side-wise L2 projection of the boundary data for the
/// rational patch basis and the hierarchic family (their interior DOFs carry
/// no point values).  Conditions are applied in order; when two of them
/// disagree on a shared dof the later one wins and a warning is emitted.
std::map<int, double> resolve_ebcs(const Field& field, const std::vector<EssentialBC>& bcs);

/// Symmetric elimination: constrained rows/columns are cleared, the diagonal
/// set to one, right-hand sides corrected so the solution carries the
/// prescribed values exactly.
void apply_ebcs(LinearSystem& system, const std::map<int, double>& fixed);

}  // namespace igafem
