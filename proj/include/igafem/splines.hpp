#pragma once

#include <Eigen/Dense>

#include <vector>

#include "igafem/errors.hpp"

namespace igafem {

/// Open (clamped) knot vector of a univariate spline basis of fixed degree.
/// The first and last knot values must appear with multiplicity degree + 1,
/// interior values with multiplicity at most the degree.
class KnotVector {
public:
    KnotVector(std::vector<double> knots, int degree);

    int degree() const noexcept { return degree_; }

    /// Number of basis functions: #knots - degree - 1.
    int basis_size() const noexcept { return static_cast<int>(knots_.size()) - degree_ - 1; }

    const std::vector<double>& knots() const noexcept { return knots_; }
    double param_begin() const noexcept { return knots_.front(); }
    double param_end() const noexcept { return knots_.back(); }

    /// Index k with knots[k] <= xi < knots[k+1]; xi == param_end() maps to the
    /// last non-empty span.  Throws std::domain_error outside the knot range.
    int find_span(double xi) const;

    /// Distinct knot values, ascending.
    std::vector<double> breakpoints() const;

    /// Number of non-empty knot spans.
    int span_count() const;

    /// How many times `value` occurs among the knots (exact comparison; knot
    /// values are only ever copied, never recomputed).
    int multiplicity(double value) const;

private:
    std::vector<double> knots_;
    int degree_;
};

struct BernsteinValues {
    Eigen::VectorXd values;       // degree + 1 entries
    Eigen::VectorXd derivatives;  // with respect to the [0,1] coordinate
};

/// All Bernstein polynomials of the given degree at xi in [0,1].
BernsteinValues bernstein_eval(int degree, double xi);

struct BSplineValues {
    int first_active = 0;         // global index of the first active function
    Eigen::VectorXd values;       // degree + 1 active values
    Eigen::VectorXd derivatives;
};

/// The degree+1 B-spline basis functions supported at xi, plus derivatives.
BSplineValues bspline_eval(const KnotVector& kv, double xi);

struct KnotInsertionResult {
    KnotVector knots;
    Eigen::MatrixXd control;      // one row per refined basis function
};

/// Boehm single-knot insertion.  `control` holds one row per basis function;
/// rows may be plain points or projective (weight-scaled) coordinates, the
/// algorithm is agnostic.  xibar must lie strictly inside the knot range and
/// its multiplicity after insertion must not exceed the degree.
KnotInsertionResult insert_knot(const KnotVector& kv, const Eigen::MatrixXd& control,
                                double xibar);

/// The n x (n+1) coefficient matrix M of the same insertion, expressing each
/// coarse basis function in the refined basis: N_old[j] = sum_i M(j,i) N_new[i].
/// Every column of M sums to one.
Eigen::MatrixXd insertion_basis_transform(const KnotVector& kv, double xibar);

struct CurveSample {
    Eigen::VectorXd point;
    Eigen::VectorXd tangent;      // d point / d xi
};

/// Rational curve evaluation via the projective lift: weighted control points
/// and weights are combined with the B-spline basis, then de-homogenized.
CurveSample nurbs_eval_1d(const KnotVector& kv, const Eigen::MatrixXd& control,
                          const Eigen::VectorXd& weights, double xi);

}  // namespace igafem
