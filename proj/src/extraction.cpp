#include "igafem/extraction.hpp"

#include <algorithm>
#include <cmath>

namespace igafem {

ExtractionOperator1D extract_1d(const KnotVector& kv) {
    const int p = kv.degree();
    const int n = kv.basis_size();
    const auto breaks = kv.breakpoints();

    // Accumulate insertion coefficients while raising every interior knot to
    // multiplicity p.  The running product maps coarse basis functions onto
    // the fully refined (per-span Bernstein) basis.
    Eigen::MatrixXd accumulated = Eigen::MatrixXd::Identity(n, n);
    KnotVector work = kv;
    for (std::size_t b = 1; b + 1 < breaks.size(); ++b) {
        const double value = breaks[b];
        for (int extra = kv.multiplicity(value); extra < p; ++extra) {
            accumulated = accumulated * insertion_basis_transform(work, value);
            std::vector<double> refined = work.knots();
            refined.insert(std::upper_bound(refined.begin(), refined.end(), value), value);
            work = KnotVector(std::move(refined), p);
        }
    }

    ExtractionOperator1D op;
    op.degree = p;
    op.spans.reserve(breaks.size() - 1);
    for (std::size_t e = 0; e + 1 < breaks.size(); ++e) {
        ExtractionSpan span;
        span.lo = breaks[e];
        span.hi = breaks[e + 1];
        // On the refined knot vector each span carries exactly p fresh
        // functions, so the span's Bernstein block starts at e*p.
        span.first_func = kv.find_span(0.5 * (span.lo + span.hi)) - p;
        span.coeffs = accumulated.block(span.first_func, static_cast<int>(e) * p, p + 1, p + 1);
        op.spans.push_back(std::move(span));
    }
    return op;
}

int BezierMesh::element_index(int e0, int e1, int e2) const {
    return e0 + elems_per_axis[0] * (e1 + elems_per_axis[1] * e2);
}

int BezierMesh::locate(const ParamPoint& xi, Eigen::Vector3d& zeta) const {
    std::array<int, 3> e = {0, 0, 0};
    zeta.setZero();
    for (int d = 0; d < dim; ++d) {
        const auto& breaks = breakpoints[d];
        if (!(xi[d] >= breaks.front() && xi[d] <= breaks.back()))
            throw std::domain_error("parametric point outside the patch");
        auto it = std::upper_bound(breaks.begin(), breaks.end(), xi[d]);
        int span = static_cast<int>(it - breaks.begin()) - 1;
        span = std::clamp(span, 0, elems_per_axis[d] - 1);
        e[d] = span;
        zeta[d] = (xi[d] - breaks[span]) / (breaks[span + 1] - breaks[span]);
    }
    return element_index(e[0], e[1], e[2]);
}

BezierMesh extract_patch(const NurbsPatch& patch) {
    const int dim = patch.dim();

    BezierMesh mesh;
    mesh.dim = dim;
    mesh.space_dim = patch.space_dim();

    std::array<ExtractionOperator1D, 3> ops;
    for (int d = 0; d < dim; ++d) {
        ops[d] = extract_1d(patch.axis(d));
        mesh.degrees[d] = ops[d].degree;
        mesh.elems_per_axis[d] = static_cast<int>(ops[d].spans.size());
        mesh.breakpoints[d] = patch.axis(d).breakpoints();
    }

    const int nloc = mesh.local_size();
    std::array<int, 3> deg = mesh.degrees;
    const auto& weights = patch.weights();
    const auto& control = patch.control_points();

    const int total = mesh.elems_per_axis[0] * mesh.elems_per_axis[1] * mesh.elems_per_axis[2];
    mesh.elements.reserve(total);
    for (int e2 = 0; e2 < mesh.elems_per_axis[2]; ++e2) {
        for (int e1 = 0; e1 < mesh.elems_per_axis[1]; ++e1) {
            for (int e0 = 0; e0 < mesh.elems_per_axis[0]; ++e0) {
                BezierElement elem;
                elem.span = {e0, e1, e2};
                std::array<const ExtractionSpan*, 3> spans = {nullptr, nullptr, nullptr};
                for (int d = 0; d < dim; ++d) {
                    spans[d] = &ops[d].spans[elem.span[d]];
                    elem.lo[d] = spans[d]->lo;
                    elem.hi[d] = spans[d]->hi;
                }

                elem.global_funcs.resize(nloc);
                elem.op.resize(nloc, nloc);
                elem.weights.resize(nloc);
                int a = 0;
                for (int a2 = 0; a2 <= deg[2]; ++a2) {
                    for (int a1 = 0; a1 <= deg[1]; ++a1) {
                        for (int a0 = 0; a0 <= deg[0]; ++a0, ++a) {
                            const std::array<int, 3> loc = {a0, a1, a2};
                            std::array<int, 3> idx = {0, 0, 0};
                            for (int d = 0; d < dim; ++d)
                                idx[d] = spans[d]->first_func + loc[d];
                            const int A = patch.global_index(idx[0], idx[1], idx[2]);
                            elem.global_funcs[a] = A;
                            elem.weights[a] = weights[A];

                            int b = 0;
                            for (int b2 = 0; b2 <= deg[2]; ++b2) {
                                for (int b1 = 0; b1 <= deg[1]; ++b1) {
                                    for (int b0 = 0; b0 <= deg[0]; ++b0, ++b) {
                                        const std::array<int, 3> bloc = {b0, b1, b2};
                                        double c = 1.0;
                                        for (int d = 0; d < dim; ++d)
                                            c *= spans[d]->coeffs(loc[d], bloc[d]);
                                        elem.op(a, b) = c;
                                    }
                                }
                            }
                        }
                    }
                }

                // Element Bezier net through the projective lift:
                // lifted Bezier rows are op^T times the lifted patch rows.
                elem.bezier_weights = elem.op.transpose() * elem.weights;
                Eigen::MatrixXd weighted(nloc, mesh.space_dim);
                for (int i = 0; i < nloc; ++i)
                    weighted.row(i) = elem.weights[i] * control.row(elem.global_funcs[i]);
                elem.bezier_points = (elem.op.transpose() * weighted).array().colwise() /
                                     elem.bezier_weights.array();

                mesh.elements.push_back(std::move(elem));
            }
        }
    }
    return mesh;
}

namespace {

struct TensorBernstein {
    Eigen::VectorXd values;
    Eigen::MatrixXd gradients;  // d/dxi, with the span scaling applied
};

TensorBernstein tensor_bernstein(const BezierMesh& mesh, const BezierElement& elem,
                                 const Eigen::Vector3d& zeta) {
    const int dim = mesh.dim;
    std::array<BernsteinValues, 3> axis;
    for (int d = 0; d < dim; ++d) axis[d] = bernstein_eval(mesh.degrees[d], zeta[d]);

    const int nloc = mesh.local_size();
    TensorBernstein out;
    out.values.resize(nloc);
    out.gradients.resize(nloc, dim);
    int a = 0;
    for (int a2 = 0; a2 <= mesh.degrees[2]; ++a2) {
        for (int a1 = 0; a1 <= mesh.degrees[1]; ++a1) {
            for (int a0 = 0; a0 <= mesh.degrees[0]; ++a0, ++a) {
                const std::array<int, 3> loc = {a0, a1, a2};
                double value = 1.0;
                for (int d = 0; d < dim; ++d) value *= axis[d].values[loc[d]];
                out.values[a] = value;
                for (int g = 0; g < dim; ++g) {
                    double dv = 1.0;
                    for (int d = 0; d < dim; ++d)
                        dv *= (d == g) ? axis[d].derivatives[loc[d]] : axis[d].values[loc[d]];
                    out.gradients(a, g) = dv / (elem.hi[g] - elem.lo[g]);
                }
            }
        }
    }
    return out;
}

}  // namespace

ElementBasis element_basis(const BezierMesh& mesh, int element, const Eigen::Vector3d& zeta) {
    const BezierElement& elem = mesh.elements.at(element);
    const TensorBernstein bern = tensor_bernstein(mesh, elem, zeta);

    const Eigen::VectorXd smooth = elem.op * bern.values;
    const Eigen::MatrixXd smooth_grad = elem.op * bern.gradients;

    const Eigen::VectorXd num = elem.weights.cwiseProduct(smooth);
    const double den = num.sum();
    const Eigen::RowVectorXd den_grad =
        (smooth_grad.array().colwise() * elem.weights.array()).colwise().sum();

    ElementBasis out;
    out.values = num / den;
    out.gradients = ((smooth_grad.array().colwise() * elem.weights.array()).matrix() -
                     out.values * den_grad) /
                    den;
    return out;
}

Eigen::VectorXd element_point(const BezierMesh& mesh, int element, const Eigen::Vector3d& zeta) {
    const BezierElement& elem = mesh.elements.at(element);
    const TensorBernstein bern = tensor_bernstein(mesh, elem, zeta);

    const Eigen::VectorXd num = elem.bezier_weights.cwiseProduct(bern.values);
    return elem.bezier_points.transpose() * num / num.sum();
}

int TopoBezierMesh::vertex_index(int i0, int i1, int i2) const {
    return i0 + verts_per_axis[0] * (i1 + verts_per_axis[1] * i2);
}

RegionMeshView TopoBezierMesh::region_view() const {
    return {&vertices, &cells, &boundary_facets, &vertex_sets};
}

TopoBezierMesh build_topo_mesh(const BezierMesh& mesh, const NurbsPatch& patch) {
    const int dim = mesh.dim;

    TopoBezierMesh topo;
    topo.dim = dim;
    for (int d = 0; d < dim; ++d)
        topo.verts_per_axis[d] = static_cast<int>(mesh.breakpoints[d].size());

    const int nv = topo.verts_per_axis[0] * topo.verts_per_axis[1] * topo.verts_per_axis[2];
    topo.vertices.resize(nv, mesh.space_dim);
    for (int k = 0; k < topo.verts_per_axis[2]; ++k) {
        for (int j = 0; j < topo.verts_per_axis[1]; ++j) {
            for (int i = 0; i < topo.verts_per_axis[0]; ++i) {
                ParamPoint xi = ParamPoint::Zero();
                xi[0] = mesh.breakpoints[0][i];
                if (dim > 1) xi[1] = mesh.breakpoints[1][j];
                if (dim > 2) xi[2] = mesh.breakpoints[2][k];
                topo.vertices.row(topo.vertex_index(i, j, k)) = patch_point(patch, xi);
            }
        }
    }

    // Cells in the same order as the Bezier elements, VTK corner ordering.
    const auto& nel = mesh.elems_per_axis;
    for (int k = 0; k < nel[2]; ++k) {
        for (int j = 0; j < nel[1]; ++j) {
            for (int i = 0; i < nel[0]; ++i) {
                std::vector<int> cell;
                if (dim == 2) {
                    cell = {topo.vertex_index(i, j), topo.vertex_index(i + 1, j),
                            topo.vertex_index(i + 1, j + 1), topo.vertex_index(i, j + 1)};
                } else if (dim == 3) {
                    cell = {topo.vertex_index(i, j, k),         topo.vertex_index(i + 1, j, k),
                            topo.vertex_index(i + 1, j + 1, k), topo.vertex_index(i, j + 1, k),
                            topo.vertex_index(i, j, k + 1),     topo.vertex_index(i + 1, j, k + 1),
                            topo.vertex_index(i + 1, j + 1, k + 1),
                            topo.vertex_index(i, j + 1, k + 1)};
                } else {
                    cell = {topo.vertex_index(i), topo.vertex_index(i + 1)};
                }
                topo.cells.push_back(std::move(cell));
            }
        }
    }

    // Vertex sets per patch side, named xi<axis><side>.
    for (int d = 0; d < dim; ++d) {
        for (int side = 0; side < 2; ++side) {
            const int pinned = side == 0 ? 0 : topo.verts_per_axis[d] - 1;
            std::vector<int> set;
            for (int v = 0; v < nv; ++v) {
                int rem = v;
                std::array<int, 3> idx = {rem % topo.verts_per_axis[0],
                                          (rem / topo.verts_per_axis[0]) % topo.verts_per_axis[1],
                                          rem / (topo.verts_per_axis[0] * topo.verts_per_axis[1])};
                if (idx[d] == pinned) set.push_back(v);
            }
            topo.vertex_sets["xi" + std::to_string(d) + std::to_string(side)] = std::move(set);
        }
    }

    // Boundary facets: one per element side that lies on the patch boundary.
    for (std::size_t c = 0; c < mesh.elements.size(); ++c) {
        const auto& span = mesh.elements[c].span;
        for (int d = 0; d < dim; ++d) {
            for (int side = 0; side < 2; ++side) {
                if ((side == 0 && span[d] != 0) || (side == 1 && span[d] != nel[d] - 1)) continue;
                MeshFacet facet;
                facet.cell = static_cast<int>(c);
                facet.local = 2 * d + side;
                const int pinned = side == 0 ? span[d] : span[d] + 1;
                std::array<int, 2> rest{};
                int w = 0;
                for (int dd = 0; dd < 3; ++dd)
                    if (dd != d) rest[w++] = dd;
                const std::array<int, 3> base = {span[0], span[1], span[2]};
                // Real axes contribute two corner positions, padding axes one.
                const int ra = rest[0] < dim ? 2 : 1;
                const int rb = rest[1] < dim ? 2 : 1;
                for (int jb = 0; jb < rb; ++jb) {
                    for (int ja = 0; ja < ra; ++ja) {
                        std::array<int, 3> idx = {0, 0, 0};
                        idx[d] = pinned;
                        idx[rest[0]] = base[rest[0]] + ja;
                        idx[rest[1]] = base[rest[1]] + jb;
                        facet.vertices.push_back(topo.vertex_index(idx[0], idx[1], idx[2]));
                    }
                }
                topo.boundary_facets.push_back(std::move(facet));
            }
        }
    }
    return topo;
}

}  // namespace igafem
