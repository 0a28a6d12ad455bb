#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "igafem/assembly.hpp"

using namespace igafem;

namespace {

// Gauss-Legendre nodes and weights from the symmetric tridiagonal Jacobi
// matrix: eigenvalues are the nodes, weights come from the first components
// of the eigenvectors.  Entirely independent of the Newton iteration used in
// production.
void gauss_oracle(int count, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(count, count);
    for (int k = 1; k < count; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k - 1, k) = b;
        jacobi(k, k - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    nodes = solver.eigenvalues();
    weights.resize(count);
    for (int i = 0; i < count; ++i) {
        const double first = solver.eigenvectors()(0, i);
        weights[i] = 2.0 * first * first;
    }
}

Field demo_field(int components = 1) {
    return Field::make_iga(std::make_shared<NurbsPatch>(make_demo_domain()), components);
}

Field unit_fem_field(int dim, int order, int divisions, FeFamily family = FeFamily::Lagrange,
                     int components = 1) {
    const NurbsPatch patch = make_unit_patch(dim, 1, 1);
    auto mesh = std::make_shared<FeMesh>(
        make_fe_mesh(patch, {divisions, dim > 1 ? divisions : 1, dim > 2 ? divisions : 1}));
    return Field::make_fem(mesh, FeBasis{family, order, dim}, components);
}

Region cells_of(const Field& field, const std::string& selector = "all") {
    return eval_selector(*parse_selector(selector), field.region_view(), RegionKind::Cell,
                         "cells");
}

Region facets_of(const Field& field, const std::string& selector) {
    return eval_selector(*parse_selector(selector), field.region_view(), RegionKind::Facet,
                         "facets");
}

Eigen::VectorXd solve_dense(const LinearSystem& system) {
    const Eigen::MatrixXd dense = Eigen::MatrixXd(system.matrix);
    return dense.ldlt().solve(system.rhs);
}

}  // namespace

TEST_CASE("gauss rules match the jacobi eigenvalue oracle") {
    for (int order = 1; order <= 9; ++order) {
        const QuadRule rule = quad_rule(order, 1);
        const int count = (order + 2) / 2;
        REQUIRE(rule.weights.size() == count);

        Eigen::VectorXd nodes, weights;
        gauss_oracle(count, nodes, weights);
        for (int i = 0; i < count; ++i) {
            CHECK(rule.points(i, 0) == doctest::Approx(nodes[i]).epsilon(1e-13));
            CHECK(rule.weights[i] == doctest::Approx(weights[i]).epsilon(1e-13));
        }
    }
}

TEST_CASE("gauss rules integrate polynomials up to their order") {
    for (int order = 1; order <= 9; ++order) {
        const QuadRule rule = quad_rule(order, 1);
        for (int j = 0; j <= order; ++j) {
            double integral = 0.0;
            for (int q = 0; q < rule.weights.size(); ++q)
                integral += rule.weights[q] * std::pow(rule.points(q, 0), j);
            const double exact = j % 2 == 0 ? 2.0 / (j + 1) : 0.0;
            CHECK(integral == doctest::Approx(exact).epsilon(1e-13));
        }
    }
}

TEST_CASE("tensor rules take products of the 1d rule") {
    const QuadRule rule1 = quad_rule(1, 2);
    REQUIRE(rule1.weights.size() == 1);
    CHECK(rule1.points(0, 0) == doctest::Approx(0.0));
    CHECK(rule1.weights[0] == doctest::Approx(4.0));

    for (int dim = 2; dim <= 3; ++dim) {
        const QuadRule rule = quad_rule(3, dim);
        CHECK(rule.weights.size() == (dim == 2 ? 4 : 8));
        CHECK(rule.weights.sum() == doctest::Approx(std::pow(2.0, dim)));

        // x^2 * y^3 has integral 2/3 * 0; x^2 * y^2 gives (2/3)^2.
        double even = 0.0, odd = 0.0;
        for (int q = 0; q < rule.weights.size(); ++q) {
            even += rule.weights[q] * rule.points(q, 0) * rule.points(q, 0) *
                    rule.points(q, 1) * rule.points(q, 1);
            odd += rule.weights[q] * rule.points(q, 0) * rule.points(q, 0) *
                   std::pow(rule.points(q, 1), 3);
        }
        const double scale = dim == 3 ? 2.0 : 1.0;  // the z axis integrates to 2
        CHECK(even == doctest::Approx(scale * 4.0 / 9.0).epsilon(1e-13));
        CHECK(odd == doctest::Approx(0.0).epsilon(1e-13));
    }
}

TEST_CASE("bilinear quad diffusion matrix matches the classical values") {
    const Field field = unit_fem_field(2, 1, 1);
    const Eigen::MatrixXd local = laplace_cell_matrix(field, 0, quad_rule(3, 2));

    // Unit square, corners in lexicographic order: diagonal 2/3, edge
    // neighbours -1/6, the opposite corner -1/3.
    Eigen::MatrixXd expected(4, 4);
    expected << 4, -1, -1, -2,
                -1, 4, -2, -1,
                -1, -2, 4, -1,
                -2, -1, -1, 4;
    expected /= 6.0;
    CHECK((local - expected).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("extracted element stiffness equals direct patch quadrature") {
    const Field field = demo_field();
    const BezierMesh& bezier = field.bezier_mesh();
    const QuadRule quad = quad_rule(5, 2);

    for (const int element : {0, 5, 11}) {
        const Eigen::MatrixXd local = laplace_cell_matrix(field, element, quad);
        const BezierElement& elem = bezier.elements[element];
        const int nloc = static_cast<int>(elem.global_funcs.size());

        // Direct route: rational patch basis plus geometry Jacobian at the
        // mapped Gauss points, no extraction involved.
        Eigen::MatrixXd direct = Eigen::MatrixXd::Zero(nloc, nloc);
        for (int q = 0; q < quad.weights.size(); ++q) {
            ParamPoint xi = ParamPoint::Zero();
            double scale = 1.0;
            for (int d = 0; d < 2; ++d) {
                xi[d] = elem.lo[d] + 0.5 * (quad.points(q, d) + 1.0) * (elem.hi[d] - elem.lo[d]);
                scale *= 0.5 * (elem.hi[d] - elem.lo[d]);
            }
            const PatchBasis basis = patch_basis_eval(field.patch(), xi);
            REQUIRE(basis.active == elem.global_funcs);
            const PatchJacobian jac = patch_jacobian(field.patch(), xi);
            const Eigen::MatrixXd phys = basis.gradients * jac.inverse;
            direct.noalias() +=
                (quad.weights[q] * jac.det * scale) * (phys * phys.transpose());
        }
        CHECK((local - direct).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("source vectors sum to the domain volume times the load") {
    const Field field = demo_field();
    const Region all = cells_of(field);
    const QuadRule quad = quad_rule(9, 2);

    double total = 0.0;
    for (const int element : all.cells)
        total += source_cell_vector(field, element, 3.0, quad).sum();

    // Quarter of a ring with radii 1 and 3: area 2*pi.
    CHECK(total == doctest::Approx(3.0 * 2.0 * std::acos(-1.0)).epsilon(1e-9));
}

TEST_CASE("elasticity cell matrices are symmetric and kill rigid motions") {
    const Field field = demo_field(2);
    const QuadRule quad = quad_rule(3, 2);
    const Eigen::MatrixXd& control = field.patch().control_points();

    for (const int element : {0, 7}) {
        const Eigen::MatrixXd local = elasticity_cell_matrix(field, element, 1.3, 0.7, quad);
        CHECK((local - local.transpose()).cwiseAbs().maxCoeff() < 1e-12);

        const std::vector<int>& scalars = field.element_scalar_dofs(element);
        const int nloc = static_cast<int>(scalars.size());
        const double norm = local.cwiseAbs().maxCoeff();

        // Rational bases reproduce linear fields of the geometry, so rigid
        // translations and the in-plane rotation have explicit coefficients.
        Eigen::VectorXd translation = Eigen::VectorXd::Zero(2 * nloc);
        Eigen::VectorXd rotation(2 * nloc);
        for (int a = 0; a < nloc; ++a) {
            translation[2 * a] = 1.0;
            rotation[2 * a] = -control(scalars[a], 1);
            rotation[2 * a + 1] = control(scalars[a], 0);
        }
        CHECK((local * translation).cwiseAbs().maxCoeff() < 1e-12 * norm);
        CHECK((local * rotation).cwiseAbs().maxCoeff() < 1e-10 * norm);
    }
}

TEST_CASE("affine strain energy comes out exactly") {
    // For u = B x the strain is constant, so u' K u equals
    // volume * (lambda tr(e)^2 + 2 mu e:e).
    const double lambda = 1.2, mu = 0.8;

    SUBCASE("unit cube, trilinear elements") {
        const Field field = unit_fem_field(3, 1, 2, FeFamily::Lagrange, 3);
        Eigen::Matrix3d grad;
        grad << 0.3, -0.1, 0.2,
                0.4, 0.5, -0.2,
                0.1, 0.0, -0.3;
        const Eigen::Matrix3d strain = 0.5 * (grad + grad.transpose());
        const double exact =
            lambda * strain.trace() * strain.trace() + 2.0 * mu * strain.squaredNorm();

        const Region all = cells_of(field);
        const QuadRule quad = quad_rule(3, 3);
        const FeMesh& mesh = field.fe_mesh();
        double energy = 0.0;
        for (const int element : all.cells) {
            const Eigen::MatrixXd local = elasticity_cell_matrix(field, element, lambda, mu, quad);
            const std::vector<int> corners = mesh.cell_corners_lex(element);
            Eigen::VectorXd coeffs(3 * corners.size());
            for (std::size_t a = 0; a < corners.size(); ++a) {
                const Eigen::Vector3d x = mesh.vertices.row(corners[a]).transpose();
                coeffs.segment<3>(3 * a) = grad * x;
            }
            energy += coeffs.dot(local * coeffs);
        }
        CHECK(energy == doctest::Approx(exact).epsilon(1e-12));
    }

    SUBCASE("quarter ring, rational elements") {
        const Field field = demo_field(2);
        Eigen::Matrix2d grad;
        grad << 0.3, -0.1,
                0.4, 0.5;
        const Eigen::Matrix2d strain = 0.5 * (grad + grad.transpose());
        const double area = 2.0 * std::acos(-1.0);
        const double exact =
            area * (lambda * strain.trace() * strain.trace() + 2.0 * mu * strain.squaredNorm());

        const Region all = cells_of(field);
        const QuadRule quad = quad_rule(9, 2);
        const Eigen::MatrixXd& control = field.patch().control_points();
        double energy = 0.0;
        for (const int element : all.cells) {
            const Eigen::MatrixXd local = elasticity_cell_matrix(field, element, lambda, mu, quad);
            const std::vector<int>& scalars = field.element_scalar_dofs(element);
            Eigen::VectorXd coeffs(2 * scalars.size());
            for (std::size_t a = 0; a < scalars.size(); ++a)
                coeffs.segment<2>(2 * a) = grad * control.row(scalars[a]).transpose();
            energy += coeffs.dot(local * coeffs);
        }
        CHECK(energy == doctest::Approx(exact).epsilon(1e-8));
    }
}

TEST_CASE("field shape points agree with the patch geometry") {
    const Field field = demo_field();
    std::mt19937 rng(77u);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    for (int trial = 0; trial < 40; ++trial) {
        const int element = trial % field.element_count();
        const Eigen::Vector3d ref(unit(rng), unit(rng), 0.0);
        const Field::ShapePoint sp = field.shape(element, ref);
        const Eigen::VectorXd direct = patch_point(field.patch(), sp.param);
        CHECK((sp.point - direct).cwiseAbs().maxCoeff() < 1e-12);

        const PatchBasis basis = patch_basis_eval(field.patch(), sp.param);
        const PatchJacobian jac = patch_jacobian(field.patch(), sp.param);
        const Eigen::MatrixXd phys = basis.gradients * jac.inverse;
        CHECK((sp.gradients - phys).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("field eval interpolates coefficient vectors") {
    SUBCASE("rational patch reproduces functions linear in the geometry") {
        const Field field = demo_field();
        const Eigen::MatrixXd& control = field.patch().control_points();
        Eigen::VectorXd coeffs(field.dof_count());
        for (int a = 0; a < field.scalar_size(); ++a)
            coeffs[a] = 2.0 * control(a, 0) - 0.5 * control(a, 1) + 0.25;

        std::mt19937 rng(19u);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            const ParamPoint xi(unit(rng), unit(rng), 0.0);
            const Eigen::VectorXd x = patch_point(field.patch(), xi);
            const double expected = 2.0 * x[0] - 0.5 * x[1] + 0.25;
            CHECK(field.eval(coeffs, xi)[0] == doctest::Approx(expected).epsilon(1e-12));
        }
    }

    SUBCASE("nodal FE coefficients reproduce nodal values") {
        const Field field = unit_fem_field(2, 2, 3);
        const FeDofMap& dofs = field.dof_map();
        Eigen::VectorXd coeffs(field.dof_count());
        for (int g1 = 0; g1 < dofs.size_1d(1); ++g1)
            for (int g0 = 0; g0 < dofs.size_1d(0); ++g0) {
                const double x = dofs.lagrange_node_param(0, g0);
                const double y = dofs.lagrange_node_param(1, g1);
                coeffs[g0 + dofs.size_1d(0) * g1] = x * x + 3.0 * y - x * y;
            }

        std::mt19937 rng(23u);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            const ParamPoint xi(unit(rng), unit(rng), 0.0);
            const double expected = xi[0] * xi[0] + 3.0 * xi[1] - xi[0] * xi[1];
            CHECK(field.eval(coeffs, xi)[0] == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("constraint elimination reproduces the hand-worked example") {
    LinearSystem system;
    system.matrix.resize(3, 3);
    std::vector<Eigen::Triplet<double>> triplets = {
        {0, 0, 4.0}, {0, 1, 1.0}, {0, 2, 2.0},
        {1, 0, 1.0}, {1, 1, 3.0},
        {2, 0, 2.0}, {2, 2, 5.0},
    };
    system.matrix.setFromTriplets(triplets.begin(), triplets.end());
    system.rhs = Eigen::Vector3d(7.0, 8.0, 9.0);

    apply_ebcs(system, {{1, 2.0}});

    Eigen::MatrixXd expected(3, 3);
    expected << 4, 0, 2,
                0, 1, 0,
                2, 0, 5;
    CHECK((Eigen::MatrixXd(system.matrix) - expected).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((system.rhs - Eigen::Vector3d(5.0, 2.0, 9.0)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(system.active_count() == 2);

    const Eigen::VectorXd solution = solve_dense(system);
    CHECK(solution[1] == doctest::Approx(2.0));
}

TEST_CASE("nodal boundary values sample the data at the nodes") {
    const Field field = unit_fem_field(2, 2, 2);
    const Region left = facets_of(field, "vertices in x < 1e-12");
    EssentialBC bc{"left", &left, {{0, parse_scalar_expr("x^2 + 2*y")}}};

    const std::map<int, double> fixed = resolve_ebcs(field, {bc});
    const FeDofMap& dofs = field.dof_map();
    CHECK(static_cast<int>(fixed.size()) == dofs.size_1d(1));

    for (const auto& [dof, value] : fixed) {
        const int g1 = dof / dofs.size_1d(0);
        CHECK(dof % dofs.size_1d(0) == 0);  // all on the x = 0 side
        CHECK(value == doctest::Approx(2.0 * dofs.lagrange_node_param(1, g1)).epsilon(1e-13));
    }
}

TEST_CASE("conflicting conditions warn and the later one wins") {
    const Field field = unit_fem_field(2, 1, 2);
    const Region left = facets_of(field, "vertices in x < 1e-12");
    const Region bottom = facets_of(field, "vertices in y < 1e-12");
    EssentialBC first{"left", &left, {{0, parse_scalar_expr("1.0")}}};
    EssentialBC second{"bottom", &bottom, {{0, parse_scalar_expr("3.0")}}};

    std::vector<std::string> warnings;
    set_warning_handler([&](const std::string& message) { warnings.push_back(message); });
    const std::map<int, double> fixed = resolve_ebcs(field, {first, second});
    set_warning_handler(nullptr);

    REQUIRE(warnings.size() == 1);  // the shared corner vertex
    CHECK(warnings[0].find("bottom") != std::string::npos);
    CHECK(fixed.at(0) == doctest::Approx(3.0));  // corner (0,0), last writer
}

TEST_CASE("hierarchic side projection reproduces polynomial boundary data") {
    const Field field = unit_fem_field(2, 3, 3, FeFamily::Lobatto);
    const Region bottom = facets_of(field, "vertices in y < 1e-12");
    EssentialBC bc{"bottom", &bottom, {{0, parse_scalar_expr("x^2 - 0.5*x + 0.125")}}};

    const std::map<int, double> fixed = resolve_ebcs(field, {bc});
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(field.dof_count());
    for (const auto& [dof, value] : fixed) coeffs[dof] = value;

    // Away from the side every function in the fixed set vanishes, so the
    // trace is determined by the projected coefficients alone.
    for (int i = 0; i <= 20; ++i) {
        const double x = i / 20.0;
        const double expected = x * x - 0.5 * x + 0.125;
        CHECK(field.eval(coeffs, ParamPoint(x, 0.0, 0.0))[0] ==
              doctest::Approx(expected).epsilon(1e-11));
    }
}

TEST_CASE("patch side projection reproduces polynomial boundary data") {
    const Field field = demo_field();
    const Region gamma2 = facets_of(field, "vertices of set xi11");
    // Along the y = 0 edge the geometry is the segment x in [1, 3] with unit
    // weights, so quadratic data lies in the trace space.
    EssentialBC bc{"gamma2", &gamma2, {{0, parse_scalar_expr("0.25*x^2 - x + 1")}}};

    const std::map<int, double> fixed = resolve_ebcs(field, {bc});
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(field.dof_count());
    for (const auto& [dof, value] : fixed) coeffs[dof] = value;

    for (int i = 0; i <= 20; ++i) {
        const double rho = i / 20.0;
        const ParamPoint xi(rho, 1.0, 0.0);
        const double x = patch_point(field.patch(), xi)[0];
        const double expected = 0.25 * x * x - x + 1.0;
        CHECK(field.eval(coeffs, xi)[0] == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("projection requires complete patch sides") {
    const Field field = unit_fem_field(2, 2, 2, FeFamily::Lobatto);
    const Region partial = facets_of(field, "vertices in y < 1e-12 & x < 0.6");
    EssentialBC bc{"partial", &partial, {{0, parse_scalar_expr("1")}}};
    CHECK(partial.facets.size() == 1);
    CHECK_THROWS_AS(resolve_ebcs(field, {bc}), ValidationError);
}

TEST_CASE("assembled diffusion systems reproduce linear solutions") {
    // 2x + 3y is harmonic, so with exact boundary data the discrete solution
    // matches it everywhere for every backend.
    auto run = [](const Field& field, int quad_order = 3) {
        const Region all = cells_of(field);
        const Region boundary = facets_of(field, "vertices in x < 1e9");
        TermInstance diffusion;
        diffusion.kind = TermKind::Laplace;
        diffusion.region = &all;
        diffusion.quad_order = quad_order;

        LinearSystem system = assemble(field, {diffusion});
        EssentialBC bc{"boundary", &boundary, {{0, parse_scalar_expr("2*x + 3*y")}}};
        apply_ebcs(system, resolve_ebcs(field, {bc}));

        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(system.matrix);
        REQUIRE(solver.info() == Eigen::Success);
        const Eigen::VectorXd solution = solver.solve(system.rhs);

        std::mt19937 rng(5u);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double worst = 0.0;
        for (int trial = 0; trial < 30; ++trial) {
            const ParamPoint xi(unit(rng), unit(rng), 0.0);
            const double value = field.eval(solution, xi)[0];
            Eigen::VectorXd x(2);
            if (field.is_iga())
                x = patch_point(field.patch(), xi);
            else
                x << xi[0], xi[1];
            worst = std::max(worst, std::abs(value - (2.0 * x[0] + 3.0 * x[1])));
        }
        return worst;
    };

    SUBCASE("lagrange") { CHECK(run(unit_fem_field(2, 1, 4)) < 1e-11); }
    SUBCASE("lobatto") { CHECK(run(unit_fem_field(2, 2, 3, FeFamily::Lobatto)) < 1e-10); }
    SUBCASE("bspline square") {
        const NurbsPatch patch = make_unit_patch(2, 2, 3);
        CHECK(run(Field::make_iga(std::make_shared<NurbsPatch>(patch), 1)) < 1e-10);
    }
    // The curved geometry needs more quadrature points than the affine cells
    // for the constant-gradient residual to vanish.
    SUBCASE("rational ring") { CHECK(run(demo_field(), 9) < 1e-9); }
}

TEST_CASE("volume sources land on the right-hand side with their sign") {
    const Field field = unit_fem_field(2, 1, 2);
    const Region all = cells_of(field);

    TermInstance source;
    source.kind = TermKind::VolumeSource;
    source.region = &all;
    source.f = -2.0;
    source.scale = 1.0;

    const LinearSystem system = assemble(field, {source});
    CHECK(system.matrix.nonZeros() == 0);
    CHECK(system.rhs.sum() == doctest::Approx(-2.0).epsilon(1e-13));

    TermInstance flipped = source;
    flipped.scale = -1.0;
    const LinearSystem negated = assemble(field, {flipped});
    CHECK((negated.rhs + system.rhs).cwiseAbs().maxCoeff() < 1e-14);
}
