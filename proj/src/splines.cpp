#include "igafem/splines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace igafem {

namespace {

constexpr int kMaxDegree = 10;

}  // namespace

KnotVector::KnotVector(std::vector<double> knots, int degree)
    : knots_(std::move(knots)), degree_(degree) {
    if (degree_ < 1 || degree_ > kMaxDegree)
        throw ValidationError("knot vector degree must be between 1 and 10, got " +
                              std::to_string(degree_));
    const auto len = static_cast<int>(knots_.size());
    if (len < 2 * (degree_ + 1))
        throw ValidationError("knot vector too short for degree " + std::to_string(degree_));
    if (!std::is_sorted(knots_.begin(), knots_.end()))
        throw ValidationError("knot vector must be non-decreasing");
    if (!(knots_.front() < knots_.back()))
        throw ValidationError("knot vector spans an empty parameter range");
    // Clamped ends: full multiplicity at both extremes.
    for (int i = 0; i <= degree_; ++i) {
        if (knots_[i] != knots_.front() || knots_[len - 1 - i] != knots_.back())
            throw ValidationError("knot vector is not open (end multiplicity below degree+1)");
    }
    for (const double value : knots_) {
        if (value != knots_.front() && value != knots_.back() &&
            multiplicity(value) > degree_)
            throw ValidationError("interior knot multiplicity exceeds the degree");
    }
}

int KnotVector::find_span(double xi) const {
    if (!(xi >= knots_.front() && xi <= knots_.back()))
        throw std::domain_error("parameter " + std::to_string(xi) + " outside knot range [" +
                                std::to_string(knots_.front()) + ", " +
                                std::to_string(knots_.back()) + "]");
    const int n = basis_size();
    auto it = std::upper_bound(knots_.begin(), knots_.end(), xi);
    int span = static_cast<int>(it - knots_.begin()) - 1;
    return std::clamp(span, degree_, n - 1);
}

std::vector<double> KnotVector::breakpoints() const {
    std::vector<double> unique_knots;
    for (const double value : knots_)
        if (unique_knots.empty() || value != unique_knots.back()) unique_knots.push_back(value);
    return unique_knots;
}

int KnotVector::span_count() const {
    return static_cast<int>(breakpoints().size()) - 1;
}

int KnotVector::multiplicity(double value) const {
    return static_cast<int>(std::count(knots_.begin(), knots_.end(), value));
}

BernsteinValues bernstein_eval(int degree, double xi) {
    if (degree < 0 || degree > kMaxDegree)
        throw std::domain_error("Bernstein degree out of range: " + std::to_string(degree));
    if (!(xi >= 0.0 && xi <= 1.0))
        throw std::domain_error("Bernstein coordinate outside [0,1]: " + std::to_string(xi));

    BernsteinValues out;
    out.values = Eigen::VectorXd::Zero(degree + 1);
    out.derivatives = Eigen::VectorXd::Zero(degree + 1);
    out.values[0] = 1.0;

    // Degree elevation in place: B(a,q) = (1-xi) B(a,q-1) + xi B(a-1,q-1).
    for (int q = 1; q <= degree; ++q) {
        if (q == degree) {
            // Derivative of the final level from the degree-1 values.
            out.derivatives[0] = -degree * out.values[0];
            for (int a = 1; a < degree; ++a)
                out.derivatives[a] = degree * (out.values[a - 1] - out.values[a]);
            out.derivatives[degree] = degree * out.values[degree - 1];
        }
        for (int a = q; a >= 1; --a)
            out.values[a] = xi * out.values[a - 1] + (1.0 - xi) * out.values[a];
        out.values[0] *= 1.0 - xi;
    }
    return out;
}

BSplineValues bspline_eval(const KnotVector& kv, double xi) {
    const int p = kv.degree();
    const auto& knots = kv.knots();
    const int span = kv.find_span(xi);

    BSplineValues out;
    out.first_active = span - p;
    out.values = Eigen::VectorXd::Zero(p + 1);
    out.derivatives = Eigen::VectorXd::Zero(p + 1);

    // Cox-de Boor triangle (Piegl-Tiller style), keeping the degree p-1 row
    // around for the derivative formula.
    Eigen::VectorXd work = Eigen::VectorXd::Zero(p + 1);
    Eigen::VectorXd lower = Eigen::VectorXd::Zero(std::max(p, 1));
    Eigen::VectorXd left(p + 1), right(p + 1);
    work[0] = 1.0;
    if (p == 1) lower[0] = 1.0;
    for (int q = 1; q <= p; ++q) {
        left[q] = xi - knots[span + 1 - q];
        right[q] = knots[span + q] - xi;
        double saved = 0.0;
        for (int r = 0; r < q; ++r) {
            const double denom = right[r + 1] + left[q - r];
            const double temp = work[r] / denom;
            work[r] = saved + right[r + 1] * temp;
            saved = left[q - r] * temp;
        }
        work[q] = saved;
        if (q == p - 1) lower.head(p) = work.head(p);
    }
    out.values = work;

    // N'(A,p) = p * ( N(A,p-1)/(U[A+p]-U[A]) - N(A+1,p-1)/(U[A+p+1]-U[A+1]) ),
    // with vanishing-support terms dropped.
    for (int a = 0; a <= p; ++a) {
        const int A = out.first_active + a;
        double d = 0.0;
        if (a >= 1) {
            const double denom = knots[A + p] - knots[A];
            if (denom > 0.0) d += lower[a - 1] / denom;
        }
        if (a <= p - 1) {
            const double denom = knots[A + p + 1] - knots[A + 1];
            if (denom > 0.0) d -= lower[a] / denom;
        }
        out.derivatives[a] = p * d;
    }
    return out;
}

namespace {

// Insertion coefficients alpha_i for the new control row Q_i; Boehm's rule.
std::vector<double> insertion_alphas(const KnotVector& kv, double xibar, int span) {
    const int p = kv.degree();
    const int n = kv.basis_size();
    const auto& knots = kv.knots();
    std::vector<double> alpha(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        if (i <= span - p)
            alpha[i] = 1.0;
        else if (i >= span + 1)
            alpha[i] = 0.0;
        else
            alpha[i] = (xibar - knots[i]) / (knots[i + p] - knots[i]);
    }
    return alpha;
}

void check_insertable(const KnotVector& kv, double xibar) {
    if (!(xibar > kv.param_begin() && xibar < kv.param_end()))
        throw std::domain_error("knot to insert must lie strictly inside the parameter range");
    if (kv.multiplicity(xibar) >= kv.degree())
        throw ValidationError("knot insertion would raise interior multiplicity above the degree");
}

}  // namespace

KnotInsertionResult insert_knot(const KnotVector& kv, const Eigen::MatrixXd& control,
                                double xibar) {
    const int n = kv.basis_size();
    if (control.rows() != n)
        throw ValidationError("control net has " + std::to_string(control.rows()) +
                              " rows, basis needs " + std::to_string(n));
    check_insertable(kv, xibar);

    const int span = kv.find_span(xibar);
    const auto alpha = insertion_alphas(kv, xibar, span);

    std::vector<double> refined = kv.knots();
    refined.insert(refined.begin() + span + 1, xibar);

    Eigen::MatrixXd fine(n + 1, control.cols());
    fine.row(0) = control.row(0);
    fine.row(n) = control.row(n - 1);
    for (int i = 1; i < n; ++i)
        fine.row(i) = alpha[i] * control.row(i) + (1.0 - alpha[i]) * control.row(i - 1);

    return {KnotVector(std::move(refined), kv.degree()), std::move(fine)};
}

Eigen::MatrixXd insertion_basis_transform(const KnotVector& kv, double xibar) {
    check_insertable(kv, xibar);
    const int n = kv.basis_size();
    const int span = kv.find_span(xibar);
    const auto alpha = insertion_alphas(kv, xibar, span);

    Eigen::MatrixXd transform = Eigen::MatrixXd::Zero(n, n + 1);
    for (int j = 0; j < n; ++j) {
        transform(j, j) = alpha[j];
        transform(j, j + 1) = 1.0 - alpha[j + 1];
    }
    return transform;
}

CurveSample nurbs_eval_1d(const KnotVector& kv, const Eigen::MatrixXd& control,
                          const Eigen::VectorXd& weights, double xi) {
    const int n = kv.basis_size();
    if (control.rows() != n || weights.size() != n)
        throw ValidationError("curve data does not match the basis size");
    if ((weights.array() <= 0.0).any())
        throw ValidationError("curve weights must be positive");

    const BSplineValues basis = bspline_eval(kv, xi);
    const int p = kv.degree();
    const auto dim = control.cols();

    Eigen::VectorXd num = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd num_d = Eigen::VectorXd::Zero(dim);
    double den = 0.0, den_d = 0.0;
    for (int a = 0; a <= p; ++a) {
        const int A = basis.first_active + a;
        const double w = weights[A];
        num += basis.values[a] * w * control.row(A).transpose();
        num_d += basis.derivatives[a] * w * control.row(A).transpose();
        den += basis.values[a] * w;
        den_d += basis.derivatives[a] * w;
    }

    CurveSample sample;
    sample.point = num / den;
    sample.tangent = (num_d - sample.point * den_d) / den;
    return sample;
}

}  // namespace igafem
