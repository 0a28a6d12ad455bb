#include "igafem/fem.hpp"

#include <algorithm>
#include <cmath>

namespace igafem {

namespace {

constexpr int kMaxOrder = 4;

struct Shape1D {
    Eigen::VectorXd values;
    Eigen::VectorXd derivatives;
};

Shape1D lagrange_1d(int order, double t) {
    const int n = order + 1;
    Eigen::VectorXd nodes(n);
    for (int a = 0; a < n; ++a) nodes[a] = -1.0 + 2.0 * a / order;

    Shape1D out{Eigen::VectorXd::Ones(n), Eigen::VectorXd::Zero(n)};
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (b == a) continue;
            out.values[a] *= (t - nodes[b]) / (nodes[a] - nodes[b]);
        }
        // Derivative via the product-rule sum; exact at the nodes too.
        for (int c = 0; c < n; ++c) {
            if (c == a) continue;
            double term = 1.0 / (nodes[a] - nodes[c]);
            for (int b = 0; b < n; ++b) {
                if (b == a || b == c) continue;
                term *= (t - nodes[b]) / (nodes[a] - nodes[b]);
            }
            out.derivatives[a] += term;
        }
    }
    return out;
}

Shape1D lobatto_1d(int order, double t) {
    const int n = order + 1;
    // Legendre values up to P_order via the three-term recurrence.
    Eigen::VectorXd legendre(order + 1);
    legendre[0] = 1.0;
    if (order >= 1) legendre[1] = t;
    for (int m = 1; m < order; ++m)
        legendre[m + 1] = ((2 * m + 1) * t * legendre[m] - m * legendre[m - 1]) / (m + 1);

    Shape1D out{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
    out.values[0] = 0.5 * (1.0 - t);
    out.values[1] = 0.5 * (1.0 + t);
    out.derivatives[0] = -0.5;
    out.derivatives[1] = 0.5;
    // Integrated-Legendre bubbles; they vanish at both vertices.
    for (int j = 2; j <= order; ++j) {
        const double scale = std::sqrt(2.0 * (2.0 * j - 1.0));
        out.values[j] = (legendre[j] - legendre[j - 2]) / scale;
        out.derivatives[j] = std::sqrt((2.0 * j - 1.0) / 2.0) * legendre[j - 1];
    }
    return out;
}

}  // namespace

FeBasisValues fe_basis_eval(const FeBasis& basis, const Eigen::Vector3d& xi) {
    if (basis.order < 1 || basis.order > kMaxOrder)
        throw ValidationError("basis order must be between 1 and 4");
    if (basis.dim < 1 || basis.dim > 3) throw ValidationError("basis dimension must be 1, 2 or 3");
    for (int d = 0; d < basis.dim; ++d)
        if (!(xi[d] >= -1.0 - 1e-12 && xi[d] <= 1.0 + 1e-12))
            throw std::domain_error("reference coordinate outside [-1,1]");

    std::array<Shape1D, 3> axis;
    for (int d = 0; d < basis.dim; ++d)
        axis[d] = basis.family == FeFamily::Lagrange ? lagrange_1d(basis.order, xi[d])
                                                     : lobatto_1d(basis.order, xi[d]);

    const int n1 = basis.order + 1;
    int nloc = 1;
    for (int d = 0; d < basis.dim; ++d) nloc *= n1;

    FeBasisValues out;
    out.values.resize(nloc);
    out.gradients.resize(nloc, basis.dim);
    for (int a = 0; a < nloc; ++a) {
        std::array<int, 3> loc = {a % n1, (a / n1) % n1, a / (n1 * n1)};
        if (basis.dim < 3) loc[2] = 0;
        if (basis.dim < 2) loc[1] = 0;
        double value = 1.0;
        for (int d = 0; d < basis.dim; ++d) value *= axis[d].values[loc[d]];
        out.values[a] = value;
        for (int g = 0; g < basis.dim; ++g) {
            double dv = 1.0;
            for (int d = 0; d < basis.dim; ++d)
                dv *= (d == g) ? axis[d].derivatives[loc[d]] : axis[d].values[loc[d]];
            out.gradients(a, g) = dv;
        }
    }
    return out;
}

int FeMesh::vertex_index(int i0, int i1, int i2) const {
    return i0 + (divisions[0] + 1) * (i1 + (divisions[1] + 1) * i2);
}

int FeMesh::cell_index(int e0, int e1, int e2) const {
    return e0 + divisions[0] * (e1 + divisions[1] * e2);
}

std::array<int, 3> FeMesh::cell_multi_index(int cell) const {
    return {cell % divisions[0], (cell / divisions[0]) % divisions[1],
            cell / (divisions[0] * divisions[1])};
}

std::vector<int> FeMesh::cell_corners_lex(int cell) const {
    const auto& vtk = cells.at(cell);
    if (dim == 2) return {vtk[0], vtk[1], vtk[3], vtk[2]};
    return {vtk[0], vtk[1], vtk[3], vtk[2], vtk[4], vtk[5], vtk[7], vtk[6]};
}

RegionMeshView FeMesh::region_view() const {
    return {&vertices, &cells, &boundary_facets, &vertex_sets};
}

FeMesh make_fe_mesh(const NurbsPatch& patch, std::array<int, 3> divisions) {
    const int dim = patch.dim();
    if (dim < 2) throw ValidationError("structured meshes need a 2D or 3D patch");
    for (int d = 0; d < dim; ++d)
        if (divisions[d] < 1) throw ValidationError("each axis needs at least one division");

    FeMesh mesh;
    mesh.dim = dim;
    mesh.space_dim = patch.space_dim();
    mesh.divisions = {1, 1, 1};
    for (int d = 0; d < dim; ++d) mesh.divisions[d] = divisions[d];

    std::array<int, 3> nv = {mesh.divisions[0] + 1, mesh.divisions[1] + 1,
                             dim > 2 ? mesh.divisions[2] + 1 : 1};
    mesh.vertices.resize(nv[0] * nv[1] * nv[2], mesh.space_dim);
    for (int k = 0; k < nv[2]; ++k) {
        for (int j = 0; j < nv[1]; ++j) {
            for (int i = 0; i < nv[0]; ++i) {
                ParamPoint xi = ParamPoint::Zero();
                xi[0] = static_cast<double>(i) / mesh.divisions[0];
                xi[1] = static_cast<double>(j) / mesh.divisions[1];
                if (dim > 2) xi[2] = static_cast<double>(k) / mesh.divisions[2];
                mesh.vertices.row(mesh.vertex_index(i, j, k)) = patch_point(patch, xi);
            }
        }
    }

    for (int k = 0; k < (dim > 2 ? mesh.divisions[2] : 1); ++k) {
        for (int j = 0; j < mesh.divisions[1]; ++j) {
            for (int i = 0; i < mesh.divisions[0]; ++i) {
                if (dim == 2) {
                    mesh.cells.push_back({mesh.vertex_index(i, j), mesh.vertex_index(i + 1, j),
                                          mesh.vertex_index(i + 1, j + 1),
                                          mesh.vertex_index(i, j + 1)});
                } else {
                    mesh.cells.push_back(
                        {mesh.vertex_index(i, j, k), mesh.vertex_index(i + 1, j, k),
                         mesh.vertex_index(i + 1, j + 1, k), mesh.vertex_index(i, j + 1, k),
                         mesh.vertex_index(i, j, k + 1), mesh.vertex_index(i + 1, j, k + 1),
                         mesh.vertex_index(i + 1, j + 1, k + 1),
                         mesh.vertex_index(i, j + 1, k + 1)});
                }
            }
        }
    }

    for (int d = 0; d < dim; ++d) {
        for (int side = 0; side < 2; ++side) {
            const int pinned = side == 0 ? 0 : nv[d] - 1;
            std::vector<int> set;
            for (int v = 0; v < mesh.vertices.rows(); ++v) {
                const std::array<int, 3> idx = {v % nv[0], (v / nv[0]) % nv[1],
                                                v / (nv[0] * nv[1])};
                if (idx[d] == pinned) set.push_back(v);
            }
            mesh.vertex_sets["xi" + std::to_string(d) + std::to_string(side)] = std::move(set);
        }
    }

    for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
        const auto e = mesh.cell_multi_index(static_cast<int>(c));
        for (int d = 0; d < dim; ++d) {
            for (int side = 0; side < 2; ++side) {
                if ((side == 0 && e[d] != 0) || (side == 1 && e[d] != mesh.divisions[d] - 1))
                    continue;
                MeshFacet facet;
                facet.cell = static_cast<int>(c);
                facet.local = 2 * d + side;
                const int pinned = side == 0 ? e[d] : e[d] + 1;
                std::array<int, 2> rest{};
                int w = 0;
                for (int dd = 0; dd < 3; ++dd)
                    if (dd != d) rest[w++] = dd;
                const int ra = rest[0] < dim ? 2 : 1;
                const int rb = rest[1] < dim ? 2 : 1;
                for (int jb = 0; jb < rb; ++jb) {
                    for (int ja = 0; ja < ra; ++ja) {
                        std::array<int, 3> idx = {0, 0, 0};
                        idx[d] = pinned;
                        idx[rest[0]] = e[rest[0]] + ja;
                        idx[rest[1]] = e[rest[1]] + jb;
                        facet.vertices.push_back(mesh.vertex_index(idx[0], idx[1], idx[2]));
                    }
                }
                mesh.boundary_facets.push_back(std::move(facet));
            }
        }
    }
    return mesh;
}

FeDofMap::FeDofMap(const FeMesh& mesh, FeBasis basis) : basis_(basis), divisions_(mesh.divisions) {
    if (basis_.dim != mesh.dim) throw ValidationError("basis and mesh dimensions differ");
    if (basis_.order < 1 || basis_.order > kMaxOrder)
        throw ValidationError("basis order must be between 1 and 4");
    scalar_size_ = 1;
    for (int d = 0; d < 3; ++d) {
        size_1d_[d] = d < mesh.dim ? basis_.order * divisions_[d] + 1 : 1;
        scalar_size_ *= size_1d_[d];
    }
}

int FeDofMap::axis_dof(int axis, int elem, int a) const {
    const int k = basis_.order;
    if (basis_.family == FeFamily::Lagrange) return k * elem + a;
    // Lobatto: two vertex functions, then the bubbles of this element.
    if (a == 0) return elem;
    if (a == 1) return elem + 1;
    return divisions_[axis] + 1 + elem * (k - 1) + (a - 2);
}

std::vector<int> FeDofMap::cell_dofs(const std::array<int, 3>& cell) const {
    const int n1 = basis_.order + 1;
    std::array<int, 3> counts = {n1, basis_.dim > 1 ? n1 : 1, basis_.dim > 2 ? n1 : 1};
    std::vector<int> dofs;
    dofs.reserve(counts[0] * counts[1] * counts[2]);
    for (int a2 = 0; a2 < counts[2]; ++a2) {
        for (int a1 = 0; a1 < counts[1]; ++a1) {
            for (int a0 = 0; a0 < counts[0]; ++a0) {
                const int g0 = axis_dof(0, cell[0], a0);
                const int g1 = basis_.dim > 1 ? axis_dof(1, cell[1], a1) : 0;
                const int g2 = basis_.dim > 2 ? axis_dof(2, cell[2], a2) : 0;
                dofs.push_back(g0 + size_1d_[0] * (g1 + size_1d_[1] * g2));
            }
        }
    }
    return dofs;
}

std::vector<int> FeDofMap::side_dofs(int axis, int side) const {
    // The only 1D function alive on a side endpoint is the vertex one.
    int pinned;
    if (basis_.family == FeFamily::Lagrange)
        pinned = side == 0 ? 0 : basis_.order * divisions_[axis];
    else
        pinned = side == 0 ? 0 : divisions_[axis];

    std::vector<int> dofs;
    for (int g2 = 0; g2 < size_1d_[2]; ++g2) {
        for (int g1 = 0; g1 < size_1d_[1]; ++g1) {
            for (int g0 = 0; g0 < size_1d_[0]; ++g0) {
                const std::array<int, 3> g = {g0, g1, g2};
                if (g[axis] != pinned) continue;
                dofs.push_back(g0 + size_1d_[0] * (g1 + size_1d_[1] * g2));
            }
        }
    }
    return dofs;
}

double FeDofMap::lagrange_node_param(int axis, int dof1d) const {
    if (basis_.family != FeFamily::Lagrange)
        throw ValidationError("node parameters exist only for the nodal family");
    return static_cast<double>(dof1d) / (basis_.order * divisions_[axis]);
}

Eigen::VectorXd lagrange_node_position(const FeMesh& mesh, const FeDofMap& dofs,
                                       const std::array<int, 3>& node) {
    const int k = dofs.basis().order;
    std::array<int, 3> cell = {0, 0, 0};
    Eigen::Vector3d ref = Eigen::Vector3d::Zero();
    for (int d = 0; d < mesh.dim; ++d) {
        cell[d] = std::clamp(node[d] / k, 0, mesh.divisions[d] - 1);
        const int a = node[d] - k * cell[d];
        ref[d] = -1.0 + 2.0 * a / k;
    }
    const FeBasis geo{FeFamily::Lagrange, 1, mesh.dim};
    const FeBasisValues shape = fe_basis_eval(geo, ref);
    const auto corners = mesh.cell_corners_lex(mesh.cell_index(cell[0], cell[1], cell[2]));
    Eigen::VectorXd x = Eigen::VectorXd::Zero(mesh.space_dim);
    for (std::size_t a = 0; a < corners.size(); ++a)
        x += shape.values[static_cast<int>(a)] * mesh.vertices.row(corners[a]).transpose();
    return x;
}

}  // namespace igafem
