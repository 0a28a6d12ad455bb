#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "igafem/splines.hpp"

using namespace igafem;

namespace {

// ---- oracles, deliberately written against the textbook definitions and not
// ---- sharing any code with the library ------------------------------------

double binomial(int n, int k) {
    double value = 1.0;
    for (int i = 0; i < k; ++i) value = value * (n - i) / (i + 1);
    return value;
}

double bernstein_closed_form(int p, int a, double xi) {
    return binomial(p, a) * std::pow(xi, a) * std::pow(1.0 - xi, p - a);
}

// Plain recursive Cox-de Boor over the whole basis, half-open spans with the
// right end of the last non-empty span closed.
double cox_de_boor(const std::vector<double>& U, int A, int q, double xi) {
    if (q == 0) {
        if (xi >= U[A] && xi < U[A + 1]) return 1.0;
        if (xi == U.back() && U[A] < U[A + 1] && U[A + 1] == U.back()) return 1.0;
        return 0.0;
    }
    double value = 0.0;
    if (U[A + q] > U[A])
        value += (xi - U[A]) / (U[A + q] - U[A]) * cox_de_boor(U, A, q - 1, xi);
    if (U[A + q + 1] > U[A + 1])
        value += (U[A + q + 1] - xi) / (U[A + q + 1] - U[A + 1]) * cox_de_boor(U, A + 1, q - 1, xi);
    return value;
}

Eigen::VectorXd full_basis_naive(const KnotVector& kv, double xi) {
    Eigen::VectorXd out(kv.basis_size());
    for (int A = 0; A < kv.basis_size(); ++A)
        out[A] = cox_de_boor(kv.knots(), A, kv.degree(), xi);
    return out;
}

Eigen::VectorXd full_basis_production(const KnotVector& kv, double xi) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(kv.basis_size());
    const BSplineValues vals = bspline_eval(kv, xi);
    for (int a = 0; a <= kv.degree(); ++a) out[vals.first_active + a] = vals.values[a];
    return out;
}

// Central finite differences with interior fallback at the range ends.
template <typename F>
double fd_derivative(F f, double x, double lo, double hi, double h = 1e-6) {
    const double a = std::max(lo, x - h);
    const double b = std::min(hi, x + h);
    return (f(b) - f(a)) / (b - a);
}

std::vector<KnotVector> sample_knot_vectors() {
    std::vector<KnotVector> result;
    result.emplace_back(std::vector<double>{0, 0, 1, 1}, 1);
    result.emplace_back(std::vector<double>{0, 0, 0, 0.5, 1, 1, 1}, 2);
    result.emplace_back(std::vector<double>{0, 0, 0, 0.25, 0.5, 0.5, 0.75, 1, 1, 1}, 2);
    result.emplace_back(std::vector<double>{0, 0, 0, 0, 0.3, 0.3, 0.3, 0.7, 1, 1, 1, 1}, 3);
    result.emplace_back(std::vector<double>{-1, -1, -1, 0.2, 0.9, 2, 2, 2}, 2);

    // A few randomized ones with mixed interior multiplicities.
    std::mt19937 rng(20140823u);
    std::uniform_real_distribution<double> coord(0.05, 0.95);
    for (int p = 1; p <= 4; ++p) {
        for (int rep = 0; rep < 3; ++rep) {
            std::vector<double> interior;
            const int breaks = 1 + static_cast<int>(rng() % 4);
            for (int b = 0; b < breaks; ++b) {
                const double value = coord(rng);
                const int mult = 1 + static_cast<int>(rng() % p);
                for (int m = 0; m < mult; ++m) interior.push_back(value);
            }
            std::sort(interior.begin(), interior.end());
            std::vector<double> knots(p + 1, 0.0);
            knots.insert(knots.end(), interior.begin(), interior.end());
            knots.insert(knots.end(), p + 1, 1.0);
            result.emplace_back(std::move(knots), p);
        }
    }
    return result;
}

std::vector<double> probe_points(const KnotVector& kv, std::mt19937& rng, int count) {
    std::uniform_real_distribution<double> u(kv.param_begin(), kv.param_end());
    std::vector<double> pts = {kv.param_begin(), kv.param_end()};
    for (double b : kv.breakpoints()) pts.push_back(b);
    for (int i = 0; i < count; ++i) pts.push_back(u(rng));
    return pts;
}

}  // namespace

TEST_CASE("Bernstein values match the closed-form binomial expression") {
    std::mt19937 rng(1u);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int p = 0; p <= 6; ++p) {
        for (int rep = 0; rep < 20; ++rep) {
            const double xi = rep == 0 ? 0.0 : rep == 1 ? 1.0 : u(rng);
            const BernsteinValues vals = bernstein_eval(p, xi);
            REQUIRE(vals.values.size() == p + 1);
            for (int a = 0; a <= p; ++a)
                CHECK(vals.values[a] == doctest::Approx(bernstein_closed_form(p, a, xi)).epsilon(1e-13));
        }
    }
}

TEST_CASE("Bernstein cubic midpoint values") {
    const BernsteinValues vals = bernstein_eval(3, 0.5);
    CHECK(vals.values[0] == doctest::Approx(0.125));
    CHECK(vals.values[1] == doctest::Approx(0.375));
    CHECK(vals.values[2] == doctest::Approx(0.375));
    CHECK(vals.values[3] == doctest::Approx(0.125));
}

TEST_CASE("Bernstein basis sums to one and stays non-negative") {
    for (int p = 1; p <= 8; ++p) {
        for (int i = 0; i <= 50; ++i) {
            const double xi = i / 50.0;
            const BernsteinValues vals = bernstein_eval(p, xi);
            CHECK(vals.values.sum() == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(vals.values.minCoeff() >= 0.0);
            CHECK(std::abs(vals.derivatives.sum()) < 1e-12);
        }
    }
}

TEST_CASE("Bernstein derivatives agree with finite differences") {
    for (int p = 1; p <= 5; ++p) {
        for (int i = 0; i <= 20; ++i) {
            const double xi = i / 20.0;
            const BernsteinValues vals = bernstein_eval(p, xi);
            for (int a = 0; a <= p; ++a) {
                const double fd = fd_derivative(
                    [&](double t) { return bernstein_eval(p, t).values[a]; }, xi, 0.0, 1.0);
                CHECK(vals.derivatives[a] == doctest::Approx(fd).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("Bernstein rejects out-of-range input") {
    CHECK_THROWS_AS(bernstein_eval(2, -0.1), std::domain_error);
    CHECK_THROWS_AS(bernstein_eval(2, 1.1), std::domain_error);
    CHECK_THROWS_AS(bernstein_eval(-1, 0.5), std::domain_error);
    CHECK_THROWS_AS(bernstein_eval(99, 0.5), std::domain_error);
}

TEST_CASE("KnotVector validation") {
    CHECK_THROWS_AS(KnotVector({0, 0, 1, 1}, 2), ValidationError);          // not clamped
    CHECK_THROWS_AS(KnotVector({0, 0, 0.5, 0.2, 1, 1}, 1), ValidationError);  // unsorted
    CHECK_THROWS_AS(KnotVector({0, 0, 0, 0, 0}, 1), ValidationError);       // empty range
    CHECK_THROWS_AS(KnotVector({0, 0, 0.5, 0.5, 1, 1}, 1), ValidationError);  // interior mult > p
    CHECK_THROWS_AS(KnotVector({0, 0, 1, 1}, 0), ValidationError);          // degree too low
    const KnotVector kv({0, 0, 0, 0.5, 1, 1, 1}, 2);
    CHECK(kv.basis_size() == 4);
    CHECK(kv.span_count() == 2);
    CHECK(kv.breakpoints() == std::vector<double>{0, 0.5, 1});
    CHECK(kv.multiplicity(0.5) == 1);
    CHECK(kv.multiplicity(0.0) == 3);
}

TEST_CASE("find_span covers ends, repeated knots and rejects outside points") {
    const KnotVector kv({0, 0, 0, 0.25, 0.5, 0.5, 0.75, 1, 1, 1}, 2);
    CHECK(kv.find_span(0.0) == 2);
    CHECK(kv.find_span(0.1) == 2);
    CHECK(kv.find_span(0.25) == 3);
    CHECK(kv.find_span(0.5) == 5);   // double knot: span after both copies
    CHECK(kv.find_span(0.9) == 6);
    CHECK(kv.find_span(1.0) == 6);   // right end folds into the last span
    CHECK_THROWS_AS(kv.find_span(-0.01), std::domain_error);
    CHECK_THROWS_AS(kv.find_span(1.01), std::domain_error);
}

TEST_CASE("B-spline values match the naive Cox-de Boor recursion") {
    std::mt19937 rng(2u);
    for (const KnotVector& kv : sample_knot_vectors()) {
        for (double xi : probe_points(kv, rng, 25)) {
            const Eigen::VectorXd mine = full_basis_production(kv, xi);
            const Eigen::VectorXd naive = full_basis_naive(kv, xi);
            for (int A = 0; A < kv.basis_size(); ++A)
                CHECK(mine[A] == doctest::Approx(naive[A]).epsilon(1e-12));
        }
    }
}

TEST_CASE("B-spline basis: partition of unity, non-negativity, local support") {
    std::mt19937 rng(3u);
    for (const KnotVector& kv : sample_knot_vectors()) {
        const int p = kv.degree();
        for (double xi : probe_points(kv, rng, 40)) {
            const BSplineValues vals = bspline_eval(kv, xi);
            CHECK(vals.values.sum() == doctest::Approx(1.0).epsilon(1e-13));
            CHECK(vals.values.minCoeff() >= -1e-15);
            CHECK(std::abs(vals.derivatives.sum()) < 1e-10);
            // Local support: every reported active function really is supported
            // on [U_A, U_{A+p+1}].
            for (int a = 0; a <= p; ++a) {
                const int A = vals.first_active + a;
                if (vals.values[a] > 1e-14) {
                    CHECK(xi >= kv.knots()[A]);
                    CHECK(xi <= kv.knots()[A + p + 1]);
                }
            }
        }
    }
}

TEST_CASE("B-spline derivatives agree with finite differences") {
    std::mt19937 rng(4u);
    for (const KnotVector& kv : sample_knot_vectors()) {
        std::uniform_real_distribution<double> u(kv.param_begin(), kv.param_end());
        for (int rep = 0; rep < 20; ++rep) {
            const double xi = u(rng);
            // Keep away from breakpoints, where one-sided derivatives differ.
            bool near_break = false;
            for (double b : kv.breakpoints())
                if (std::abs(xi - b) < 1e-4) near_break = true;
            if (near_break) continue;
            const BSplineValues vals = bspline_eval(kv, xi);
            for (int a = 0; a <= kv.degree(); ++a) {
                const int A = vals.first_active + a;
                const double fd = fd_derivative(
                    [&](double t) { return full_basis_naive(kv, t)[A]; }, xi,
                    kv.param_begin(), kv.param_end());
                CHECK(vals.derivatives[a] == doctest::Approx(fd).epsilon(5e-5));
            }
        }
    }
}

TEST_CASE("degree-1 knot insertion interpolates the control polygon") {
    // For a polyline (degree 1) the curve is the control polygon, so the
    // inserted control point must sit on the segment at the parameter value.
    const KnotVector kv({0, 0, 0.5, 1, 1}, 1);
    Eigen::MatrixXd control(3, 2);
    control << 0, 0, 1, 2, 3, 1;
    const auto [fine_kv, fine_control] = insert_knot(kv, control, 0.25);
    REQUIRE(fine_control.rows() == 4);
    // xi = 0.25 is halfway through the first segment.
    CHECK(fine_control(1, 0) == doctest::Approx(0.5));
    CHECK(fine_control(1, 1) == doctest::Approx(1.0));
    // Untouched points survive as-is.
    CHECK(fine_control(0, 0) == doctest::Approx(0.0));
    CHECK(fine_control(2, 0) == doctest::Approx(1.0));
    CHECK(fine_control(3, 0) == doctest::Approx(3.0));
    CHECK(fine_kv.basis_size() == 4);
    CHECK(fine_kv.multiplicity(0.25) == 1);
}

TEST_CASE("knot insertion leaves a rational curve geometrically unchanged") {
    // Quarter circle, then insert a few knots through the projective lift.
    const KnotVector kv({0, 0, 0, 1, 1, 1}, 2);
    Eigen::MatrixXd points(3, 2);
    points << 1, 0, 1, 1, 0, 1;
    Eigen::VectorXd weights(3);
    const double s = std::sqrt(2.0) / 2.0;
    weights << 1, s, 1;

    Eigen::MatrixXd lifted(3, 3);
    for (int i = 0; i < 3; ++i) {
        lifted.row(i).head(2) = weights[i] * points.row(i);
        lifted(i, 2) = weights[i];
    }

    KnotVector cur_kv = kv;
    Eigen::MatrixXd cur = lifted;
    for (double xibar : {0.37, 0.37, 0.8}) {
        auto res = insert_knot(cur_kv, cur, xibar);
        cur_kv = res.knots;
        cur = std::move(res.control);
    }
    REQUIRE(cur.rows() == 6);

    Eigen::MatrixXd fine_points(cur.rows(), 2);
    Eigen::VectorXd fine_weights(cur.rows());
    for (int i = 0; i < cur.rows(); ++i) {
        fine_weights[i] = cur(i, 2);
        fine_points.row(i) = cur.row(i).head(2) / cur(i, 2);
    }

    for (int i = 0; i <= 40; ++i) {
        const double xi = i / 40.0;
        const CurveSample a = nurbs_eval_1d(kv, points, weights, xi);
        const CurveSample b = nurbs_eval_1d(cur_kv, fine_points, fine_weights, xi);
        CHECK((a.point - b.point).norm() < 1e-12);
        CHECK((a.tangent - b.tangent).norm() < 1e-10);
    }
}

TEST_CASE("insertion rejects boundary knots and over-refinement") {
    const KnotVector kv({0, 0, 0, 0.5, 1, 1, 1}, 2);
    const Eigen::MatrixXd control = Eigen::MatrixXd::Random(4, 2);
    CHECK_THROWS_AS(insert_knot(kv, control, 0.0), std::domain_error);
    CHECK_THROWS_AS(insert_knot(kv, control, 1.0), std::domain_error);
    CHECK_THROWS_AS(insert_knot(kv, control, -3.0), std::domain_error);
    // 0.5 already has multiplicity 1; a second insert is fine, a third not.
    auto once = insert_knot(kv, control, 0.5);
    CHECK_THROWS_AS(insert_knot(once.knots, once.control, 0.5), ValidationError);
}

TEST_CASE("insertion basis transform reproduces the coarse basis") {
    std::mt19937 rng(5u);
    for (const KnotVector& kv : sample_knot_vectors()) {
        std::uniform_real_distribution<double> u(kv.param_begin(), kv.param_end());
        const double span = kv.param_end() - kv.param_begin();
        const double xibar = kv.param_begin() + span * 0.531;
        if (kv.multiplicity(xibar) >= kv.degree()) continue;

        const Eigen::MatrixXd transform = insertion_basis_transform(kv, xibar);
        std::vector<double> fine_knots = kv.knots();
        fine_knots.insert(fine_knots.begin() + kv.find_span(xibar) + 1, xibar);
        const KnotVector fine_kv(fine_knots, kv.degree());

        REQUIRE(transform.rows() == kv.basis_size());
        REQUIRE(transform.cols() == fine_kv.basis_size());
        for (int col = 0; col < transform.cols(); ++col)
            CHECK(transform.col(col).sum() == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(transform.minCoeff() >= 0.0);

        for (int rep = 0; rep < 15; ++rep) {
            const double xi = u(rng);
            const Eigen::VectorXd coarse = full_basis_naive(kv, xi);
            const Eigen::VectorXd fine = full_basis_naive(fine_kv, xi);
            const Eigen::VectorXd reproduced = transform * fine;
            for (int A = 0; A < kv.basis_size(); ++A)
                CHECK(reproduced[A] == doctest::Approx(coarse[A]).epsilon(1e-12));
        }
    }
}

TEST_CASE("quarter-circle arc evaluates to radius one everywhere") {
    const KnotVector kv({0, 0, 0, 1, 1, 1}, 2);
    Eigen::MatrixXd points(3, 2);
    points << 1, 0, 1, 1, 0, 1;
    Eigen::VectorXd weights(3);
    weights << 1, std::sqrt(2.0) / 2.0, 1;

    for (int i = 0; i <= 64; ++i) {
        const double xi = i / 64.0;
        const CurveSample sample = nurbs_eval_1d(kv, points, weights, xi);
        CHECK(sample.point.norm() == doctest::Approx(1.0).epsilon(1e-13));
        // Circle tangents are orthogonal to the radius vector.
        CHECK(std::abs(sample.point.dot(sample.tangent)) < 1e-12);
    }
    // Endpoints hit the control polygon corners exactly.
    CHECK(nurbs_eval_1d(kv, points, weights, 0.0).point.isApprox(Eigen::Vector2d(1, 0), 1e-15));
    CHECK(nurbs_eval_1d(kv, points, weights, 1.0).point.isApprox(Eigen::Vector2d(0, 1), 1e-15));
}

TEST_CASE("nurbs_eval_1d tangent agrees with finite differences") {
    const KnotVector kv({0, 0, 0, 0.4, 1, 1, 1}, 2);
    Eigen::MatrixXd points(4, 3);
    points << 0, 0, 0, 1, 2, 0.5, 2, -1, 1, 4, 0, 2;
    Eigen::VectorXd weights(4);
    weights << 1.0, 0.7, 1.9, 1.2;

    for (double xi : {0.05, 0.2, 0.55, 0.77, 0.93}) {
        const CurveSample sample = nurbs_eval_1d(kv, points, weights, xi);
        for (int c = 0; c < 3; ++c) {
            const double fd = fd_derivative(
                [&](double t) { return nurbs_eval_1d(kv, points, weights, t).point[c]; }, xi,
                0.0, 1.0);
            CHECK(sample.tangent[c] == doctest::Approx(fd).epsilon(1e-5));
        }
    }
    Eigen::VectorXd bad_weights = weights;
    bad_weights[2] = -1.0;
    CHECK_THROWS_AS(nurbs_eval_1d(kv, points, bad_weights, 0.5), ValidationError);
}
