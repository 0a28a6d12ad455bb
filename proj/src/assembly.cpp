#include "igafem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace igafem {

namespace {

// Legendre value and first derivative at t, by the three-term recurrence.
void legendre_eval(int m, double t, double& value, double& slope) {
    double prev = 1.0, cur = t;
    if (m == 0) {
        value = 1.0;
        slope = 0.0;
        return;
    }
    for (int k = 1; k < m; ++k) {
        const double next = ((2 * k + 1) * t * cur - k * prev) / (k + 1);
        prev = cur;
        cur = next;
    }
    value = cur;
    slope = m * (t * cur - prev) / (t * t - 1.0);
}

void gauss_1d(int count, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
    nodes.resize(count);
    weights.resize(count);
    if (count == 1) {
        nodes[0] = 0.0;
        weights[0] = 2.0;
        return;
    }
    for (int i = 0; i < count; ++i) {
        // Chebyshev-like initial guess, refined by Newton on P_count.
        double t = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
        double value = 0.0, slope = 1.0;
        for (int iter = 0; iter < 100; ++iter) {
            legendre_eval(count, t, value, slope);
            const double step = value / slope;
            t -= step;
            if (std::abs(step) < 1e-15) break;
        }
        legendre_eval(count, t, value, slope);
        nodes[count - 1 - i] = t;  // guesses run from +1 down, store ascending
        weights[count - 1 - i] = 2.0 / ((1.0 - t * t) * slope * slope);
    }
}

}  // namespace

QuadRule quad_rule(int order, int dim) {
    if (order < 0) throw ValidationError("quadrature order must be non-negative");
    if (dim < 1 || dim > 3) throw ValidationError("quadrature dimension must be 1, 2 or 3");
    const int per_axis = (order + 2) / 2;
    Eigen::VectorXd nodes, weights;
    gauss_1d(per_axis, nodes, weights);

    int total = 1;
    for (int d = 0; d < dim; ++d) total *= per_axis;

    QuadRule rule;
    rule.points.resize(total, dim);
    rule.weights.resize(total);
    for (int q = 0; q < total; ++q) {
        int rest = q;
        double w = 1.0;
        for (int d = 0; d < dim; ++d) {
            const int i = rest % per_axis;
            rest /= per_axis;
            rule.points(q, d) = nodes[i];
            w *= weights[i];
        }
        rule.weights[q] = w;
    }
    return rule;
}

// ---------------------------------------------------------------------------
// Field
// ---------------------------------------------------------------------------

Field Field::make_iga(std::shared_ptr<const NurbsPatch> patch, int components) {
    if (!patch) throw ValidationError("field needs a patch");
    if (components < 1 || components > 3) throw ValidationError("1 to 3 components supported");
    if (patch->dim() != patch->space_dim())
        throw ValidationError("volume fields need dim == space_dim");

    Field field;
    field.patch_ = std::move(patch);
    field.bezier_ = std::make_shared<BezierMesh>(extract_patch(*field.patch_));
    field.topo_ = std::make_shared<TopoBezierMesh>(build_topo_mesh(*field.bezier_, *field.patch_));
    field.dim_ = field.patch_->dim();
    field.space_dim_ = field.patch_->space_dim();
    field.components_ = components;
    field.scalar_size_ = field.patch_->basis_size();
    field.element_dofs_.reserve(field.bezier_->elements.size());
    for (const BezierElement& elem : field.bezier_->elements)
        field.element_dofs_.push_back(elem.global_funcs);
    return field;
}

Field Field::make_fem(std::shared_ptr<const FeMesh> mesh, FeBasis basis, int components) {
    if (!mesh) throw ValidationError("field needs a mesh");
    if (components < 1 || components > 3) throw ValidationError("1 to 3 components supported");
    if (mesh->dim != mesh->space_dim)
        throw ValidationError("volume fields need dim == space_dim");
    basis.dim = mesh->dim;

    Field field;
    field.mesh_ = std::move(mesh);
    field.dofs_ = std::make_shared<FeDofMap>(*field.mesh_, basis);
    field.basis_ = basis;
    field.dim_ = field.mesh_->dim;
    field.space_dim_ = field.mesh_->space_dim;
    field.components_ = components;
    field.scalar_size_ = field.dofs_->scalar_size();
    field.element_dofs_.reserve(field.mesh_->cells.size());
    for (int cell = 0; cell < static_cast<int>(field.mesh_->cells.size()); ++cell)
        field.element_dofs_.push_back(field.dofs_->cell_dofs(field.mesh_->cell_multi_index(cell)));
    return field;
}

const NurbsPatch& Field::patch() const {
    if (!patch_) throw ValidationError("not a patch-based field");
    return *patch_;
}

const BezierMesh& Field::bezier_mesh() const {
    if (!bezier_) throw ValidationError("not a patch-based field");
    return *bezier_;
}

const TopoBezierMesh& Field::topo_mesh() const {
    if (!topo_) throw ValidationError("not a patch-based field");
    return *topo_;
}

const FeMesh& Field::fe_mesh() const {
    if (!mesh_) throw ValidationError("not an FE field");
    return *mesh_;
}

const FeDofMap& Field::dof_map() const {
    if (!dofs_) throw ValidationError("not an FE field");
    return *dofs_;
}

RegionMeshView Field::region_view() const {
    return is_iga() ? topo_->region_view() : mesh_->region_view();
}

Field::ShapePoint Field::shape(int element, const Eigen::Vector3d& ref) const {
    ShapePoint out;
    Eigen::MatrixXd param_grads;  // gradients with respect to patch parameters
    Eigen::MatrixXd jac;          // d point / d parameter

    if (is_iga()) {
        const BezierElement& elem = bezier_->elements.at(element);
        Eigen::Vector3d zeta = Eigen::Vector3d::Zero();
        double scaling = 1.0;
        out.param.setZero();
        for (int d = 0; d < dim_; ++d) {
            zeta[d] = 0.5 * (ref[d] + 1.0);
            out.param[d] = elem.lo[d] + zeta[d] * (elem.hi[d] - elem.lo[d]);
            scaling *= 0.5 * (elem.hi[d] - elem.lo[d]);
        }
        const ElementBasis basis = element_basis(*bezier_, element, zeta);
        const int nloc = static_cast<int>(basis.values.size());

        Eigen::MatrixXd points(nloc, space_dim_);
        for (int a = 0; a < nloc; ++a)
            points.row(a) = patch_->control_points().row(elem.global_funcs[a]);

        out.values = basis.values;
        out.point = points.transpose() * basis.values;
        jac = points.transpose() * basis.gradients;
        param_grads = basis.gradients;
        const double det = jac.determinant();
        if (det <= 1e-14) throw std::domain_error("geometry map is not orientation preserving");
        out.weight_factor = det * scaling;
    } else {
        const std::array<int, 3> cell = mesh_->cell_multi_index(element);
        const std::vector<int> corners = mesh_->cell_corners_lex(element);
        FeBasis geo{FeFamily::Lagrange, 1, dim_};
        const FeBasisValues geo_vals = fe_basis_eval(geo, ref);
        const FeBasisValues vals = fe_basis_eval(basis_, ref);

        Eigen::MatrixXd verts(static_cast<int>(corners.size()), space_dim_);
        for (int a = 0; a < static_cast<int>(corners.size()); ++a)
            verts.row(a) = mesh_->vertices.row(corners[a]);

        out.values = vals.values;
        out.point = verts.transpose() * geo_vals.values;
        jac = verts.transpose() * geo_vals.gradients;
        param_grads = vals.gradients;
        const double det = jac.determinant();
        if (det <= 1e-14) throw std::domain_error("cell geometry is not orientation preserving");
        out.weight_factor = det;

        out.param.setZero();
        for (int d = 0; d < dim_; ++d)
            out.param[d] = (cell[d] + 0.5 * (ref[d] + 1.0)) / mesh_->divisions[d];
    }

    out.gradients = param_grads * jac.inverse();
    return out;
}

Eigen::VectorXd Field::eval(const Eigen::VectorXd& dofs, const ParamPoint& xi) const {
    if (dofs.size() != dof_count()) throw ValidationError("coefficient vector size mismatch");

    Eigen::VectorXd values;
    const std::vector<int>* scalars = nullptr;
    int element = 0;

    if (is_iga()) {
        Eigen::Vector3d zeta;
        element = bezier_->locate(xi, zeta);
        values = element_basis(*bezier_, element, zeta).values;
        scalars = &element_dofs_[element];
    } else {
        std::array<int, 3> cell = {0, 0, 0};
        Eigen::Vector3d ref = Eigen::Vector3d::Zero();
        for (int d = 0; d < dim_; ++d) {
            if (xi[d] < 0.0 || xi[d] > 1.0)
                throw std::domain_error("parametric point outside the patch");
            const double scaled = xi[d] * mesh_->divisions[d];
            cell[d] = std::min(static_cast<int>(scaled), mesh_->divisions[d] - 1);
            ref[d] = std::clamp(2.0 * (scaled - cell[d]) - 1.0, -1.0, 1.0);
        }
        element = mesh_->cell_index(cell[0], cell[1], cell[2]);
        values = fe_basis_eval(basis_, ref).values;
        scalars = &element_dofs_[element];
    }

    Eigen::VectorXd result = Eigen::VectorXd::Zero(components_);
    for (int a = 0; a < static_cast<int>(scalars->size()); ++a)
        for (int c = 0; c < components_; ++c)
            result[c] += values[a] * dofs[(*scalars)[a] * components_ + c];
    return result;
}

// ---------------------------------------------------------------------------
// Cell kernels
// ---------------------------------------------------------------------------

Eigen::MatrixXd laplace_cell_matrix(const Field& field, int element, const QuadRule& quad) {
    const int nloc = static_cast<int>(field.element_scalar_dofs(element).size());
    Eigen::MatrixXd result = Eigen::MatrixXd::Zero(nloc, nloc);
    for (int q = 0; q < quad.weights.size(); ++q) {
        Eigen::Vector3d ref = Eigen::Vector3d::Zero();
        ref.head(quad.points.cols()) = quad.points.row(q).transpose();
        const Field::ShapePoint sp = field.shape(element, ref);
        result.noalias() +=
            (quad.weights[q] * sp.weight_factor) * (sp.gradients * sp.gradients.transpose());
    }
    return result;
}

Eigen::VectorXd source_cell_vector(const Field& field, int element, double f,
                                   const QuadRule& quad) {
    const int nloc = static_cast<int>(field.element_scalar_dofs(element).size());
    Eigen::VectorXd result = Eigen::VectorXd::Zero(nloc);
    for (int q = 0; q < quad.weights.size(); ++q) {
        Eigen::Vector3d ref = Eigen::Vector3d::Zero();
        ref.head(quad.points.cols()) = quad.points.row(q).transpose();
        const Field::ShapePoint sp = field.shape(element, ref);
        result.noalias() += (quad.weights[q] * sp.weight_factor * f) * sp.values;
    }
    return result;
}

namespace {

// Voigt-form strain operator; rows are xx, yy(, zz), then the engineering
// shear strains xy(, xz, yz).
Eigen::MatrixXd strain_matrix(const Eigen::MatrixXd& gradients, int dim) {
    const int nloc = static_cast<int>(gradients.rows());
    const int nvoigt = dim == 2 ? 3 : 6;
    Eigen::MatrixXd strain = Eigen::MatrixXd::Zero(nvoigt, nloc * dim);
    for (int a = 0; a < nloc; ++a) {
        if (dim == 2) {
            strain(0, 2 * a + 0) = gradients(a, 0);
            strain(1, 2 * a + 1) = gradients(a, 1);
            strain(2, 2 * a + 0) = gradients(a, 1);
            strain(2, 2 * a + 1) = gradients(a, 0);
        } else {
            strain(0, 3 * a + 0) = gradients(a, 0);
            strain(1, 3 * a + 1) = gradients(a, 1);
            strain(2, 3 * a + 2) = gradients(a, 2);
            strain(3, 3 * a + 0) = gradients(a, 1);
            strain(3, 3 * a + 1) = gradients(a, 0);
            strain(4, 3 * a + 0) = gradients(a, 2);
            strain(4, 3 * a + 2) = gradients(a, 0);
            strain(5, 3 * a + 1) = gradients(a, 2);
            strain(5, 3 * a + 2) = gradients(a, 1);
        }
    }
    return strain;
}

Eigen::MatrixXd isotropic_stiffness(double lambda, double mu, int dim) {
    const int nvoigt = dim == 2 ? 3 : 6;
    Eigen::MatrixXd stiffness = Eigen::MatrixXd::Zero(nvoigt, nvoigt);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) stiffness(i, j) = lambda;
        stiffness(i, i) = lambda + 2.0 * mu;
    }
    for (int i = dim; i < nvoigt; ++i) stiffness(i, i) = mu;
    return stiffness;
}

}  // namespace

Eigen::MatrixXd elasticity_cell_matrix(const Field& field, int element, double lambda, double mu,
                                       const QuadRule& quad) {
    const int dim = field.dim();
    const int nloc = static_cast<int>(field.element_scalar_dofs(element).size());
    const Eigen::MatrixXd stiffness = isotropic_stiffness(lambda, mu, dim);
    Eigen::MatrixXd result = Eigen::MatrixXd::Zero(nloc * dim, nloc * dim);
    for (int q = 0; q < quad.weights.size(); ++q) {
        Eigen::Vector3d ref = Eigen::Vector3d::Zero();
        ref.head(quad.points.cols()) = quad.points.row(q).transpose();
        const Field::ShapePoint sp = field.shape(element, ref);
        const Eigen::MatrixXd strain = strain_matrix(sp.gradients, dim);
        result.noalias() += (quad.weights[q] * sp.weight_factor) *
                            (strain.transpose() * stiffness * strain);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

LinearSystem assemble(const Field& field, const std::vector<TermInstance>& terms) {
    const int n = field.dof_count();
    const int ncomp = field.components();
    LinearSystem system;
    system.rhs = Eigen::VectorXd::Zero(n);

    std::vector<Eigen::Triplet<double>> triplets;
    std::map<int, QuadRule> rules;

    for (const TermInstance& term : terms) {
        if (term.region == nullptr) throw ValidationError("term without a region");
        if (term.region->kind != RegionKind::Cell)
            throw ValidationError("volume terms need a cell region");
        if (term.kind == TermKind::LinearElasticity) {
            if (ncomp != field.space_dim())
                throw ValidationError("elasticity needs one component per space dimension");
        } else if (ncomp != 1) {
            throw ValidationError("scalar terms need a one-component field");
        }

        auto found = rules.find(term.quad_order);
        if (found == rules.end())
            found = rules.emplace(term.quad_order, quad_rule(term.quad_order, field.dim())).first;
        const QuadRule& quad = found->second;

        for (const int element : term.region->cells) {
            const std::vector<int>& scalars = field.element_scalar_dofs(element);
            const int nloc = static_cast<int>(scalars.size());

            switch (term.kind) {
                case TermKind::Laplace: {
                    const Eigen::MatrixXd local = laplace_cell_matrix(field, element, quad);
                    for (int a = 0; a < nloc; ++a)
                        for (int b = 0; b < nloc; ++b)
                            triplets.emplace_back(scalars[a], scalars[b],
                                                  term.scale * local(a, b));
                    break;
                }
                case TermKind::VolumeSource: {
                    const Eigen::VectorXd local =
                        source_cell_vector(field, element, term.f, quad);
                    for (int a = 0; a < nloc; ++a)
                        system.rhs[scalars[a]] += term.scale * local[a];
                    break;
                }
                case TermKind::LinearElasticity: {
                    const Eigen::MatrixXd local =
                        elasticity_cell_matrix(field, element, term.lambda, term.mu, quad);
                    for (int a = 0; a < nloc * ncomp; ++a) {
                        const int ga = scalars[a / ncomp] * ncomp + a % ncomp;
                        for (int b = 0; b < nloc * ncomp; ++b) {
                            const int gb = scalars[b / ncomp] * ncomp + b % ncomp;
                            triplets.emplace_back(ga, gb, term.scale * local(a, b));
                        }
                    }
                    break;
                }
            }
        }
    }

    system.matrix.resize(n, n);
    system.matrix.setFromTriplets(triplets.begin(), triplets.end());
    return system;
}

// ---------------------------------------------------------------------------
// Essential boundary conditions
// ---------------------------------------------------------------------------

namespace {

void store_fixed(std::map<int, double>& fixed, int dof, double value, const std::string& name) {
    auto [it, inserted] = fixed.try_emplace(dof, value);
    if (!inserted) {
        if (std::abs(it->second - value) > 1e-10 * std::max(1.0, std::abs(it->second)))
            warn("boundary condition '" + name + "' overrides dof " + std::to_string(dof) +
                 " (" + std::to_string(it->second) + " -> " + std::to_string(value) + ")");
        it->second = value;
    }
}

// Sides touched by a facet region, with per-side facet counts.
std::map<int, int> side_facet_counts(const Region& region) {
    std::map<int, int> counts;
    for (const MeshFacet& facet : region.facets) ++counts[facet.local];
    return counts;
}

void nodal_lagrange_values(const Field& field, const EssentialBC& bc,
                           const std::vector<std::pair<int, ScalarExprPtr>>& parts,
                           std::map<int, double>& fixed) {
    const FeMesh& mesh = field.fe_mesh();
    const FeDofMap& dofs = field.dof_map();
    const int order = dofs.basis().order;
    const int dim = field.dim();
    const int ncomp = field.components();

    for (const MeshFacet& facet : bc.region->facets) {
        const std::array<int, 3> cell = mesh.cell_multi_index(facet.cell);
        const int axis = facet.local / 2;
        const int pinned = facet.local % 2 == 0 ? 0 : order;
        const std::vector<int> cell_scalar = dofs.cell_dofs(cell);

        std::array<int, 3> local = {0, 0, 0};
        std::array<int, 3> count = {1, 1, 1};
        for (int d = 0; d < dim; ++d) count[d] = order + 1;
        count[axis] = 1;
        local[axis] = pinned;

        const int nface = count[0] * count[1] * count[2];
        for (int f = 0; f < nface; ++f) {
            int rest = f;
            for (int d = 0; d < 3; ++d) {
                if (d == axis) continue;
                local[d] = rest % count[d];
                rest /= count[d];
            }
            const int lex = local[0] + (order + 1) * (local[1] + (order + 1) * local[2]);
            std::array<int, 3> node = {0, 0, 0};
            for (int d = 0; d < dim; ++d) node[d] = dofs.axis_dof(d, cell[d], local[d]);
            const Eigen::VectorXd position = lagrange_node_position(mesh, dofs, node);
            Eigen::Vector3d point = Eigen::Vector3d::Zero();
            point.head(position.size()) = position;

            for (const auto& [component, expr] : parts)
                store_fixed(fixed, cell_scalar[lex] * ncomp + component,
                            eval_scalar_expr(*expr, point), bc.name);
        }
    }
}

// L2 projection of the boundary data onto the trace of the hierarchic FE
// space on one full mesh side.
void project_lobatto_side(const Field& field, const EssentialBC& bc, int axis, int side,
                          const std::vector<std::pair<int, ScalarExprPtr>>& parts,
                          std::map<int, double>& fixed) {
    const FeMesh& mesh = field.fe_mesh();
    const FeDofMap& dofs = field.dof_map();
    const FeBasis& basis = dofs.basis();
    const int dim = field.dim();
    const int ncomp = field.components();

    const std::vector<int> side_scalars = dofs.side_dofs(axis, side);
    const int nside = static_cast<int>(side_scalars.size());
    Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(nside, nside);
    Eigen::MatrixXd load = Eigen::MatrixXd::Zero(nside, static_cast<int>(parts.size()));

    const QuadRule quad = quad_rule(2 * basis.order + 2, dim - 1);
    std::vector<int> free_axes;
    for (int d = 0; d < dim; ++d)
        if (d != axis) free_axes.push_back(d);

    for (const MeshFacet& facet : mesh.boundary_facets) {
        if (facet.local != 2 * axis + side) continue;
        const std::vector<int> cell_scalar = dofs.cell_dofs(mesh.cell_multi_index(facet.cell));
        const std::vector<int> corners = mesh.cell_corners_lex(facet.cell);
        Eigen::MatrixXd verts(static_cast<int>(corners.size()), mesh.space_dim);
        for (int a = 0; a < static_cast<int>(corners.size()); ++a)
            verts.row(a) = mesh.vertices.row(corners[a]);

        // Positions of the cell's local functions inside the side system;
        // functions not supported on the side vanish there.
        std::vector<int> slot(cell_scalar.size(), -1);
        for (std::size_t a = 0; a < cell_scalar.size(); ++a) {
            const auto it =
                std::lower_bound(side_scalars.begin(), side_scalars.end(), cell_scalar[a]);
            if (it != side_scalars.end() && *it == cell_scalar[a])
                slot[a] = static_cast<int>(it - side_scalars.begin());
        }

        for (int q = 0; q < quad.weights.size(); ++q) {
            Eigen::Vector3d ref = Eigen::Vector3d::Zero();
            ref[axis] = side == 0 ? -1.0 : 1.0;
            for (std::size_t k = 0; k < free_axes.size(); ++k)
                ref[free_axes[k]] = quad.points(q, static_cast<int>(k));

            const FeBasisValues vals = fe_basis_eval(basis, ref);
            const FeBasisValues geo = fe_basis_eval({FeFamily::Lagrange, 1, dim}, ref);
            const Eigen::MatrixXd jac = verts.transpose() * geo.gradients;
            Eigen::MatrixXd tangents(mesh.space_dim, static_cast<int>(free_axes.size()));
            for (std::size_t k = 0; k < free_axes.size(); ++k)
                tangents.col(static_cast<int>(k)) = jac.col(free_axes[k]);
            const double measure =
                std::sqrt((tangents.transpose() * tangents).determinant());
            const Eigen::VectorXd position = verts.transpose() * geo.values;
            Eigen::Vector3d point = Eigen::Vector3d::Zero();
            point.head(position.size()) = position;

            const double w = quad.weights[q] * measure;
            for (std::size_t a = 0; a < cell_scalar.size(); ++a) {
                if (slot[a] < 0) continue;
                for (std::size_t b = 0; b < cell_scalar.size(); ++b) {
                    if (slot[b] < 0) continue;
                    mass(slot[a], slot[b]) += w * vals.values[a] * vals.values[b];
                }
                for (std::size_t p = 0; p < parts.size(); ++p)
                    load(slot[a], static_cast<int>(p)) +=
                        w * vals.values[a] * eval_scalar_expr(*parts[p].second, point);
            }
        }
    }

    const Eigen::MatrixXd coeffs = mass.ldlt().solve(load);
    for (std::size_t p = 0; p < parts.size(); ++p)
        for (int i = 0; i < nside; ++i)
            store_fixed(fixed, side_scalars[i] * ncomp + parts[p].first, coeffs(i, p), bc.name);
}

// L2 projection onto the rational basis restricted to one patch side, done on
// the boundary sub-patch whose control layer spans exactly those functions.
void project_patch_side(const Field& field, const EssentialBC& bc, int axis, int side,
                        const std::vector<std::pair<int, ScalarExprPtr>>& parts,
                        std::map<int, double>& fixed) {
    const NurbsPatch& patch = field.patch();
    const int ncomp = field.components();
    const NurbsPatch boundary = patch.boundary_patch(axis, side);
    const std::vector<int> parent = patch.boundary_layer_indices(axis, side);
    const BezierMesh bezier = extract_patch(boundary);

    const int nside = boundary.basis_size();
    Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(nside, nside);
    Eigen::MatrixXd load = Eigen::MatrixXd::Zero(nside, static_cast<int>(parts.size()));

    int max_degree = 1;
    for (int d = 0; d < boundary.dim(); ++d)
        max_degree = std::max(max_degree, boundary.axis(d).degree());
    const QuadRule quad = quad_rule(2 * max_degree + 2, boundary.dim());

    for (int element = 0; element < static_cast<int>(bezier.elements.size()); ++element) {
        const BezierElement& elem = bezier.elements[element];
        for (int q = 0; q < quad.weights.size(); ++q) {
            Eigen::Vector3d zeta = Eigen::Vector3d::Zero();
            ParamPoint xi = ParamPoint::Zero();
            double scaling = 1.0;
            for (int d = 0; d < boundary.dim(); ++d) {
                zeta[d] = 0.5 * (quad.points(q, d) + 1.0);
                xi[d] = elem.lo[d] + zeta[d] * (elem.hi[d] - elem.lo[d]);
                scaling *= 0.5 * (elem.hi[d] - elem.lo[d]);
            }
            const ElementBasis vals = element_basis(bezier, element, zeta);
            const Eigen::MatrixXd tangents = patch_jacobian(boundary, xi).matrix;
            const double measure =
                std::sqrt((tangents.transpose() * tangents).determinant());
            const Eigen::VectorXd position = patch_point(boundary, xi);
            Eigen::Vector3d point = Eigen::Vector3d::Zero();
            point.head(position.size()) = position;

            const double w = quad.weights[q] * measure * scaling;
            for (int a = 0; a < static_cast<int>(elem.global_funcs.size()); ++a) {
                const int ga = elem.global_funcs[a];
                for (int b = 0; b < static_cast<int>(elem.global_funcs.size()); ++b)
                    mass(ga, elem.global_funcs[b]) += w * vals.values[a] * vals.values[b];
                for (std::size_t p = 0; p < parts.size(); ++p)
                    load(ga, static_cast<int>(p)) +=
                        w * vals.values[a] * eval_scalar_expr(*parts[p].second, point);
            }
        }
    }

    const Eigen::MatrixXd coeffs = mass.ldlt().solve(load);
    for (std::size_t p = 0; p < parts.size(); ++p)
        for (int i = 0; i < nside; ++i)
            store_fixed(fixed, parent[i] * ncomp + parts[p].first, coeffs(i, p), bc.name);
}

}  // namespace

std::map<int, double> resolve_ebcs(const Field& field, const std::vector<EssentialBC>& bcs) {
    std::map<int, double> fixed;

    for (const EssentialBC& bc : bcs) {
        if (bc.region == nullptr) throw ValidationError("boundary condition without a region");
        if (bc.region->kind != RegionKind::Facet)
            throw ValidationError("boundary conditions need a facet region");
        if (bc.region->facets.empty())
            throw ValidationError("boundary condition region '" + bc.region->name +
                                  "' selects no facets");

        std::vector<std::pair<int, ScalarExprPtr>> parts;
        for (const auto& [component, expr] : bc.components) {
            if (!expr) throw ValidationError("boundary condition without a value");
            if (component == -1) {
                for (int c = 0; c < field.components(); ++c) parts.emplace_back(c, expr);
            } else if (component < 0 || component >= field.components()) {
                throw ValidationError("boundary condition component out of range");
            } else {
                parts.emplace_back(component, expr);
            }
        }

        const bool nodal = !field.is_iga() &&
                           field.dof_map().basis().family == FeFamily::Lagrange;
        if (nodal) {
            nodal_lagrange_values(field, bc, parts, fixed);
            continue;
        }

        // Projection paths work side by side; each touched side must be
        // complete so the boundary mass matrix is the full trace mass.
        for (const auto& [local, count] : side_facet_counts(*bc.region)) {
            const int axis = local / 2;
            const int side = local % 2;
            int expected = 1;
            if (field.is_iga()) {
                for (int d = 0; d < field.dim(); ++d)
                    if (d != axis) expected *= field.bezier_mesh().elems_per_axis[d];
            } else {
                for (int d = 0; d < field.dim(); ++d)
                    if (d != axis) expected *= field.fe_mesh().divisions[d];
            }
            if (count != expected)
                throw ValidationError("region '" + bc.region->name +
                                      "' covers a patch side only partially; boundary "
                                      "projection needs complete sides");
            if (field.is_iga())
                project_patch_side(field, bc, axis, side, parts, fixed);
            else
                project_lobatto_side(field, bc, axis, side, parts, fixed);
        }
    }
    return fixed;
}

void apply_ebcs(LinearSystem& system, const std::map<int, double>& fixed) {
    const int n = system.size();
    for (const auto& [dof, value] : fixed)
        if (dof < 0 || dof >= n) throw ValidationError("fixed dof out of range");

    // Move the known columns to the right-hand side.
    for (const auto& [dof, value] : fixed) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(system.matrix, dof); it; ++it) {
            if (fixed.count(static_cast<int>(it.row()))) continue;
            system.rhs[it.row()] -= it.value() * value;
        }
    }

    // Rebuild without the constrained rows/columns, unit diagonal instead.
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(system.matrix.nonZeros()) + fixed.size());
    for (int col = 0; col < system.matrix.outerSize(); ++col) {
        const bool col_fixed = fixed.count(col) != 0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(system.matrix, col); it; ++it) {
            if (col_fixed || fixed.count(static_cast<int>(it.row()))) continue;
            triplets.emplace_back(it.row(), it.col(), it.value());
        }
    }
    for (const auto& [dof, value] : fixed) {
        triplets.emplace_back(dof, dof, 1.0);
        system.rhs[dof] = value;
    }
    system.matrix.setZero();
    system.matrix.setFromTriplets(triplets.begin(), triplets.end());
    system.fixed = fixed;
}

}  // namespace igafem
