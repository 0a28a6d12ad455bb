#include "igafem/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace igafem {

namespace {

std::array<int, 3> padded_sizes(const std::vector<KnotVector>& axes) {
    std::array<int, 3> n = {1, 1, 1};
    for (std::size_t d = 0; d < axes.size(); ++d) n[d] = axes[d].basis_size();
    return n;
}

}  // namespace

NurbsPatch::NurbsPatch(std::vector<KnotVector> axes, Eigen::MatrixXd control_points,
                       Eigen::VectorXd weights, int space_dim)
    : axes_(std::move(axes)),
      control_(std::move(control_points)),
      weights_(std::move(weights)),
      space_dim_(space_dim) {
    if (axes_.empty() || axes_.size() > 3)
        throw ValidationError("patch must have one to three parametric axes");
    if (space_dim_ < dim() || space_dim_ > 3)
        throw ValidationError("space dimension must lie between the patch dimension and 3");
    const int n = basis_size();
    if (control_.rows() != n || control_.cols() != space_dim_)
        throw ValidationError("control net shape does not match the basis and space dimension");
    if (weights_.size() != n)
        throw ValidationError("one weight per control point is required");
    if ((weights_.array() <= 0.0).any())
        throw ValidationError("weights must be positive");
}

int NurbsPatch::basis_size() const {
    int n = 1;
    for (const auto& kv : axes_) n *= kv.basis_size();
    return n;
}

int NurbsPatch::global_index(int i0, int i1, int i2) const {
    const auto n = padded_sizes(axes_);
    return i0 + n[0] * (i1 + n[1] * i2);
}

std::array<int, 3> NurbsPatch::multi_index(int A) const {
    const auto n = padded_sizes(axes_);
    return {A % n[0], (A / n[0]) % n[1], A / (n[0] * n[1])};
}

int NurbsPatch::element_count() const {
    int count = 1;
    for (const auto& kv : axes_) count *= kv.span_count();
    return count;
}

NurbsPatch NurbsPatch::with_inserted_knot(int axis_dir, double xibar) const {
    if (axis_dir < 0 || axis_dir >= dim()) throw ValidationError("axis out of range");

    // Work on the projective lift so rational geometry is preserved exactly.
    Eigen::MatrixXd lifted(control_.rows(), space_dim_ + 1);
    lifted.leftCols(space_dim_) = control_.array().colwise() * weights_.array();
    lifted.col(space_dim_) = weights_;

    const auto n = padded_sizes(axes_);
    auto m = n;
    m[axis_dir] += 1;

    Eigen::MatrixXd refined(m[0] * m[1] * m[2], space_dim_ + 1);
    std::vector<KnotVector> new_axes = axes_;

    // Apply the 1D insertion to every control line running along axis_dir.
    std::array<int, 2> rest{};
    {
        int w = 0;
        for (int d = 0; d < 3; ++d)
            if (d != axis_dir) rest[w++] = d;
    }
    for (int jb = 0; jb < n[rest[1]]; ++jb) {
        for (int ja = 0; ja < n[rest[0]]; ++ja) {
            Eigen::MatrixXd line(n[axis_dir], space_dim_ + 1);
            std::array<int, 3> idx{};
            idx[rest[0]] = ja;
            idx[rest[1]] = jb;
            for (int i = 0; i < n[axis_dir]; ++i) {
                idx[axis_dir] = i;
                line.row(i) = lifted.row(global_index(idx[0], idx[1], idx[2]));
            }
            auto result = insert_knot(axes_[axis_dir], line, xibar);
            new_axes[axis_dir] = result.knots;
            for (int i = 0; i < m[axis_dir]; ++i) {
                idx[axis_dir] = i;
                const int out = idx[0] + m[0] * (idx[1] + m[1] * idx[2]);
                refined.row(out) = result.control.row(i);
            }
        }
    }

    Eigen::VectorXd new_weights = refined.col(space_dim_);
    Eigen::MatrixXd new_control =
        refined.leftCols(space_dim_).array().colwise() / new_weights.array();
    return NurbsPatch(std::move(new_axes), std::move(new_control), std::move(new_weights),
                      space_dim_);
}

NurbsPatch NurbsPatch::extruded(double thickness) const {
    if (dim() >= 3) throw ValidationError("cannot extrude a three-dimensional patch");
    if (space_dim_ != dim())
        throw ValidationError("extrusion expects a patch embedded in its own dimension");
    if (!(thickness > 0.0)) throw ValidationError("extrusion thickness must be positive");

    std::vector<KnotVector> new_axes = axes_;
    new_axes.emplace_back(std::vector<double>{0.0, 0.0, 1.0, 1.0}, 1);

    const int n = basis_size();
    Eigen::MatrixXd new_control(2 * n, space_dim_ + 1);
    Eigen::VectorXd new_weights(2 * n);
    for (int layer = 0; layer < 2; ++layer) {
        new_control.block(layer * n, 0, n, space_dim_) = control_;
        new_control.block(layer * n, space_dim_, n, 1).setConstant(layer * thickness);
        new_weights.segment(layer * n, n) = weights_;
    }
    return NurbsPatch(std::move(new_axes), std::move(new_control), std::move(new_weights),
                      space_dim_ + 1);
}

NurbsPatch NurbsPatch::boundary_patch(int axis_dir, int side) const {
    const auto layer = boundary_layer_indices(axis_dir, side);
    std::vector<KnotVector> sub_axes;
    for (int d = 0; d < dim(); ++d)
        if (d != axis_dir) sub_axes.push_back(axes_[d]);

    Eigen::MatrixXd sub_control(static_cast<int>(layer.size()), space_dim_);
    Eigen::VectorXd sub_weights(static_cast<int>(layer.size()));
    for (std::size_t i = 0; i < layer.size(); ++i) {
        sub_control.row(static_cast<int>(i)) = control_.row(layer[i]);
        sub_weights[static_cast<int>(i)] = weights_[layer[i]];
    }
    return NurbsPatch(std::move(sub_axes), std::move(sub_control), std::move(sub_weights),
                      space_dim_);
}

std::vector<int> NurbsPatch::boundary_layer_indices(int axis_dir, int side) const {
    if (axis_dir < 0 || axis_dir >= dim()) throw ValidationError("axis out of range");
    if (side != 0 && side != 1) throw ValidationError("side must be 0 or 1");
    if (dim() < 2) throw ValidationError("a curve has no boundary layers");

    const auto n = padded_sizes(axes_);
    const int pinned = side == 0 ? 0 : n[axis_dir] - 1;

    std::array<int, 2> rest{};
    {
        int w = 0;
        for (int d = 0; d < 3; ++d)
            if (d != axis_dir) rest[w++] = d;
    }
    std::vector<int> layer;
    layer.reserve(static_cast<std::size_t>(n[rest[0]]) * n[rest[1]]);
    for (int jb = 0; jb < n[rest[1]]; ++jb) {
        for (int ja = 0; ja < n[rest[0]]; ++ja) {
            std::array<int, 3> idx{};
            idx[axis_dir] = pinned;
            idx[rest[0]] = ja;
            idx[rest[1]] = jb;
            layer.push_back(global_index(idx[0], idx[1], idx[2]));
        }
    }
    return layer;
}

PatchBasis patch_basis_eval(const NurbsPatch& patch, const ParamPoint& xi) {
    const int d = patch.dim();
    std::array<BSplineValues, 3> axis_values;
    int nloc = 1;
    for (int k = 0; k < d; ++k) {
        axis_values[k] = bspline_eval(patch.axis(k), xi[k]);
        nloc *= patch.axis(k).degree() + 1;
    }

    PatchBasis out;
    out.active.resize(nloc);
    Eigen::VectorXd num(nloc);
    Eigen::MatrixXd num_grad(nloc, d);

    std::array<int, 3> deg = {0, 0, 0};
    for (int k = 0; k < d; ++k) deg[k] = patch.axis(k).degree();

    const auto& weights = patch.weights();
    int a = 0;
    for (int a2 = 0; a2 <= deg[2]; ++a2) {
        for (int a1 = 0; a1 <= deg[1]; ++a1) {
            for (int a0 = 0; a0 <= deg[0]; ++a0, ++a) {
                const std::array<int, 3> loc = {a0, a1, a2};
                std::array<int, 3> idx = {0, 0, 0};
                double value = 1.0;
                for (int k = 0; k < d; ++k) {
                    idx[k] = axis_values[k].first_active + loc[k];
                    value *= axis_values[k].values[loc[k]];
                }
                const int A = patch.global_index(idx[0], idx[1], idx[2]);
                out.active[a] = A;
                num[a] = weights[A] * value;
                for (int g = 0; g < d; ++g) {
                    double dv = 1.0;
                    for (int k = 0; k < d; ++k)
                        dv *= (k == g) ? axis_values[k].derivatives[loc[k]]
                                       : axis_values[k].values[loc[k]];
                    num_grad(a, g) = weights[A] * dv;
                }
            }
        }
    }

    const double den = num.sum();
    const Eigen::RowVectorXd den_grad = num_grad.colwise().sum();
    out.values = num / den;
    out.gradients = (num_grad - out.values * den_grad) / den;
    return out;
}

Eigen::VectorXd patch_point(const NurbsPatch& patch, const ParamPoint& xi) {
    const PatchBasis basis = patch_basis_eval(patch, xi);
    Eigen::VectorXd point = Eigen::VectorXd::Zero(patch.space_dim());
    for (std::size_t a = 0; a < basis.active.size(); ++a)
        point += basis.values[static_cast<int>(a)] *
                 patch.control_points().row(basis.active[a]).transpose();
    return point;
}

PatchJacobian patch_jacobian(const NurbsPatch& patch, const ParamPoint& xi) {
    const PatchBasis basis = patch_basis_eval(patch, xi);
    PatchJacobian jac;
    jac.matrix = Eigen::MatrixXd::Zero(patch.space_dim(), patch.dim());
    for (std::size_t a = 0; a < basis.active.size(); ++a)
        jac.matrix += patch.control_points().row(basis.active[a]).transpose() *
                      basis.gradients.row(static_cast<int>(a));
    if (patch.space_dim() == patch.dim()) {
        jac.det = jac.matrix.determinant();
        if (std::abs(jac.det) < 1e-14)
            throw std::domain_error("geometry map is singular at the requested point");
        jac.inverse = jac.matrix.inverse();
    }
    return jac;
}

NurbsPatch make_demo_domain() {
    // Quarter of a circular ring, built as the tensor product of a linear
    // radial law r = 3 - 2*rho with the standard rational quarter arc.  The
    // radial direction runs outer-to-inner and the arc from the y axis down
    // to the x axis so that the Jacobian determinant stays positive.
    const double s = std::sqrt(2.0) / 2.0;
    const Eigen::Vector3d radii(3.0, 2.0, 1.0);
    Eigen::MatrixXd arc(3, 2);
    arc << 0, 1, 1, 1, 1, 0;
    const Eigen::Vector3d arc_weights(1.0, s, 1.0);

    Eigen::MatrixXd control(9, 2);
    Eigen::VectorXd weights(9);
    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < 3; ++i) {
            control.row(i + 3 * j) = radii[i] * arc.row(j);
            weights[i + 3 * j] = arc_weights[j];
        }
    }

    std::vector<KnotVector> axes = {
        KnotVector({0, 0, 0, 1, 1, 1}, 2),
        KnotVector({0, 0, 0, 1, 1, 1}, 2),
    };
    NurbsPatch coarse(std::move(axes), std::move(control), std::move(weights), 2);

    // Refine to four radial and five angular knot values.
    NurbsPatch patch = coarse.with_inserted_knot(0, 1.0 / 3.0).with_inserted_knot(0, 2.0 / 3.0);
    for (double eta : {0.25, 0.5, 0.75}) patch = patch.with_inserted_knot(1, eta);
    return patch;
}

NurbsPatch make_demo_domain_3d(double thickness) {
    return make_demo_domain().extruded(thickness);
}

NurbsPatch make_unit_patch(int dim, int degree, int spans_per_axis) {
    if (dim < 1 || dim > 3) throw ValidationError("dimension must be 1, 2 or 3");
    if (spans_per_axis < 1) throw ValidationError("at least one span per axis is required");

    std::vector<double> knots(degree + 1, 0.0);
    for (int i = 1; i < spans_per_axis; ++i)
        knots.push_back(static_cast<double>(i) / spans_per_axis);
    knots.insert(knots.end(), degree + 1, 1.0);
    const KnotVector kv(knots, degree);

    const int n1 = kv.basis_size();
    // Greville points reproduce the identity map with a B-spline basis.
    Eigen::VectorXd greville(n1);
    for (int i = 0; i < n1; ++i) {
        double sum = 0.0;
        for (int j = 1; j <= degree; ++j) sum += kv.knots()[i + j];
        greville[i] = sum / degree;
    }

    std::vector<KnotVector> axes(dim, kv);
    int n = 1;
    for (int d = 0; d < dim; ++d) n *= n1;
    Eigen::MatrixXd control(n, dim);
    for (int A = 0; A < n; ++A) {
        int rem = A;
        for (int d = 0; d < dim; ++d) {
            control(A, d) = greville[rem % n1];
            rem /= n1;
        }
    }
    return NurbsPatch(std::move(axes), std::move(control), Eigen::VectorXd::Ones(n), dim);
}

}  // namespace igafem
