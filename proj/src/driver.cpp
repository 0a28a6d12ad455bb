#include "igafem/driver.hpp"

#include <filesystem>
#include <map>

namespace igafem {

namespace {

const VariableSpec& unknown_variable(const ProblemSpec& spec, std::string& name) {
    for (const auto& [vname, variable] : spec.variables)
        if (variable.unknown) {
            name = vname;
            return variable;
        }
    throw ValidationError("problem '" + spec.name + "' declares no unknown variable");
}

std::shared_ptr<Field> build_field(const ProblemSpec& spec, const FieldSpec& fspec,
                                   std::shared_ptr<const NurbsPatch> patch) {
    if (fspec.family == "iga")
        return std::make_shared<Field>(Field::make_iga(std::move(patch), fspec.components));

    FeBasis basis;
    basis.family = fspec.family == "lobatto" ? FeFamily::Lobatto : FeFamily::Lagrange;
    basis.order = fspec.order;
    basis.dim = patch->dim();
    auto mesh = std::make_shared<FeMesh>(make_fe_mesh(*patch, spec.divisions));
    return std::make_shared<Field>(Field::make_fem(std::move(mesh), basis, fspec.components));
}

const MaterialParam& material_arg(const ProblemSpec& spec, const std::string& arg,
                                  const std::string& context) {
    const std::size_t dot = arg.find('.');
    if (dot == std::string::npos)
        throw ValidationError(context + ": expected a material parameter, got '" + arg + "'");
    return spec.materials.at(arg.substr(0, dot)).at(arg.substr(dot + 1));
}

void check_variable_roles(const ProblemSpec& spec, const TermSpec& term,
                          const std::string& unknown_name, bool has_state) {
    const std::string context = "term '" + term.name + "'";
    const std::string& virtual_arg = has_state ? term.args[term.args.size() - 2]
                                               : term.args.back();
    const auto virtual_it = spec.variables.find(virtual_arg);
    if (virtual_it == spec.variables.end() || virtual_it->second.unknown ||
        virtual_it->second.dual != unknown_name)
        throw ValidationError(context + ": '" + virtual_arg +
                              "' is not a test variable of '" + unknown_name + "'");
    if (has_state && term.args.back() != unknown_name)
        throw ValidationError(context + ": state argument '" + term.args.back() +
                              "' is not the unknown '" + unknown_name + "'");
}

std::vector<TermInstance> build_terms(const ProblemSpec& spec,
                                      const std::map<std::string, Region>& regions,
                                      const std::string& unknown_name) {
    std::vector<TermInstance> instances;
    for (const EquationSpec& equation : spec.equations) {
        for (const TermSpec& term : equation.terms) {
            TermInstance instance;
            instance.region = &regions.at(term.region);
            instance.quad_order = spec.integrals.at(term.integral);
            const std::string context = "term '" + term.name + "'";

            if (term.name == "dw_laplace") {
                if (term.args.size() != 2 && term.args.size() != 3)
                    throw ValidationError(context +
                                          ": expected (virtual, state) or "
                                          "(material, virtual, state)");
                instance.kind = TermKind::Laplace;
                instance.scale = term.sign;
                if (term.args.size() == 3) {
                    const MaterialParam& c = material_arg(spec, term.args[0], context);
                    if (!c.scalar)
                        throw ValidationError(context + ": diffusivity must be a scalar");
                    instance.scale *= c.value;
                }
                check_variable_roles(spec, term, unknown_name, true);
            } else if (term.name == "dw_volume_lvf") {
                if (term.args.size() != 2)
                    throw ValidationError(context + ": expected (material, virtual)");
                instance.kind = TermKind::VolumeSource;
                const MaterialParam& f = material_arg(spec, term.args[0], context);
                if (!f.scalar)
                    throw ValidationError(context + ": the source density must be a scalar");
                instance.f = f.value;
                // A load moved to the left-hand side enters the residual with
                // its sign; the right-hand side carries the opposite one.
                instance.scale = -term.sign;
                check_variable_roles(spec, term, unknown_name, false);
            } else if (term.name == "dw_lin_elastic") {
                if (term.args.size() != 3)
                    throw ValidationError(context + ": expected (material, virtual, state)");
                instance.kind = TermKind::LinearElasticity;
                instance.scale = term.sign;
                const MaterialParam& D = material_arg(spec, term.args[0], context);
                if (D.scalar)
                    throw ValidationError(context +
                                          ": the stiffness needs {\"lam\": ..., \"mu\": ...}");
                instance.lambda = D.lam;
                instance.mu = D.mu;
                check_variable_roles(spec, term, unknown_name, true);
            } else {
                throw ValidationError("unsupported term '" + term.name + "'");
            }
            instances.push_back(instance);
        }
    }
    return instances;
}

LinearizedField linearize_solution(const Field& field, const Eigen::VectorXd& dofs,
                                   int samples) {
    if (field.is_iga()) {
        std::array<int, 3> grid = {samples, samples, samples};
        return linearize_field(field.patch(), dofs, grid);
    }

    // Nodal backends already live on straight-sided cells; sample the
    // solution at the mesh vertices.
    const FeMesh& mesh = field.fe_mesh();
    LinearizedField lin;
    lin.mesh = mesh;
    lin.values.resize(mesh.vertices.rows(), field.components());
    int vertex = 0;
    std::array<int, 3> counts = {1, 1, 1};
    for (int d = 0; d < mesh.dim; ++d) counts[d] = mesh.divisions[d] + 1;
    for (int i2 = 0; i2 < counts[2]; ++i2)
        for (int i1 = 0; i1 < counts[1]; ++i1)
            for (int i0 = 0; i0 < counts[0]; ++i0, ++vertex) {
                const ParamPoint xi(static_cast<double>(i0) / mesh.divisions[0],
                                    mesh.dim > 1
                                        ? static_cast<double>(i1) / mesh.divisions[1]
                                        : 0.0,
                                    mesh.dim > 2
                                        ? static_cast<double>(i2) / mesh.divisions[2]
                                        : 0.0);
                lin.values.row(vertex) = field.eval(dofs, xi).transpose();
            }
    return lin;
}

}  // namespace

RunResult run_problem(const ProblemSpec& spec, const RunOptions& options) {
    RunResult result;
    result.problem = spec.name;

    auto patch = std::make_shared<const NurbsPatch>(read_domain_file(spec.domain_path));

    const VariableSpec& uvar = unknown_variable(spec, result.unknown);
    const FieldSpec& fspec = spec.fields.at(uvar.field);
    result.backend = fspec.family;
    result.patch = patch;
    result.field = build_field(spec, fspec, patch);
    const Field& field = *result.field;
    result.dof_count = field.dof_count();

    std::map<std::string, Region> regions;
    for (const auto& [name, rspec] : spec.regions)
        regions.emplace(name, eval_selector(*parse_selector(rspec.selector),
                                            field.region_view(), rspec.kind, name));

    LinearSystem system = assemble(field, build_terms(spec, regions, result.unknown));

    std::vector<EssentialBC> bcs;
    for (const EbcSpec& espec : spec.ebcs) {
        EssentialBC bc;
        bc.name = espec.name;
        bc.region = &regions.at(espec.region);
        for (const EbcValue& value : espec.values)
            bc.components.emplace_back(value.component, value.expr);
        bcs.push_back(std::move(bc));
    }
    apply_ebcs(system, resolve_ebcs(field, bcs));
    result.active_dofs = system.active_count();

    result.report = newton_solve(system, spec.solver);
    if (!result.report.converged) return result;

    result.linearized = linearize_solution(field, result.report.solution, options.samples);

    if (!options.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(options.out_dir);
        const LinearizedField& lin = result.linearized;

        VtkPointData data;
        data.name = result.unknown;
        data.values = lin.values;
        const std::string path = (fs::path(options.out_dir) / (spec.name + ".vtk")).string();
        write_vtk(lin.mesh.vertices, lin.mesh.cells, lin.mesh.dim, {data}, path);
        result.outputs.push_back(path);

        if (options.warp != 0.0 && field.components() == field.space_dim()) {
            const Eigen::MatrixXd warped =
                lin.mesh.vertices + options.warp * lin.values.leftCols(lin.mesh.vertices.cols());
            const std::string warped_path =
                (fs::path(options.out_dir) / (spec.name + "_warped.vtk")).string();
            write_vtk(warped, lin.mesh.cells, lin.mesh.dim, {data}, warped_path);
            result.outputs.push_back(warped_path);
        }
    }
    return result;
}

ProblemSpec classical_twin(ProblemSpec spec, std::array<int, 3> divisions, int order) {
    spec.name += "_fem";
    spec.divisions = divisions;
    for (auto& [name, field] : spec.fields) {
        field.family = "lagrange";
        field.order = order;
    }
    return spec;
}

double max_pointwise_difference(const Field& field_a, const Eigen::VectorXd& dofs_a,
                                const Field& field_b, const Eigen::VectorXd& dofs_b,
                                std::array<int, 3> samples) {
    if (field_a.dim() != field_b.dim())
        throw ValidationError("cannot compare fields of different dimension");
    if (field_a.components() != field_b.components())
        throw ValidationError("cannot compare fields with different component counts");

    std::array<int, 3> counts = {1, 1, 1};
    for (int d = 0; d < field_a.dim(); ++d) {
        if (samples[d] < 2) throw ValidationError("need at least 2 samples per axis");
        counts[d] = samples[d];
    }

    double worst = 0.0;
    for (int i2 = 0; i2 < counts[2]; ++i2)
        for (int i1 = 0; i1 < counts[1]; ++i1)
            for (int i0 = 0; i0 < counts[0]; ++i0) {
                const ParamPoint xi(
                    counts[0] > 1 ? static_cast<double>(i0) / (counts[0] - 1) : 0.0,
                    counts[1] > 1 ? static_cast<double>(i1) / (counts[1] - 1) : 0.0,
                    counts[2] > 1 ? static_cast<double>(i2) / (counts[2] - 1) : 0.0);
                const Eigen::VectorXd diff = field_a.eval(dofs_a, xi) - field_b.eval(dofs_b, xi);
                worst = std::max(worst, diff.cwiseAbs().maxCoeff());
            }
    return worst;
}

}  // namespace igafem
