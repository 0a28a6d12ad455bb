#include "igafem/io.hpp"

#include <json.hpp>

#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

namespace igafem {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& error) {
        throw ParseError(std::string("invalid JSON in '") + path + "': " + error.what(),
                         error.byte > 0 ? error.byte - 1 : 0);
    }
}

const ordered_json& require(const ordered_json& object, const char* key,
                            const std::string& what) {
    if (!object.is_object() || !object.contains(key))
        throw ValidationError(what + ": missing '" + key + "'");
    return object.at(key);
}

int require_int(const ordered_json& value, const std::string& what) {
    if (!value.is_number_integer())
        throw ValidationError(what + ": expected an integer");
    return value.get<int>();
}

std::string require_string(const ordered_json& value, const std::string& what) {
    if (!value.is_string()) throw ValidationError(what + ": expected a string");
    return value.get<std::string>();
}

}  // namespace

// ---------------------------------------------------------------------------
// Domain files
// ---------------------------------------------------------------------------

void write_domain_file(const NurbsPatch& patch, const std::string& path) {
    ordered_json doc;
    doc["version"] = "1";
    doc["dim"] = patch.dim();
    doc["space_dim"] = patch.space_dim();
    doc["degrees"] = ordered_json::array();
    doc["knots"] = ordered_json::array();
    for (int d = 0; d < patch.dim(); ++d) {
        doc["degrees"].push_back(patch.axis(d).degree());
        doc["knots"].push_back(patch.axis(d).knots());
    }
    doc["control_points"] = ordered_json::array();
    for (int a = 0; a < patch.control_points().rows(); ++a) {
        ordered_json point = ordered_json::array();
        for (int c = 0; c < patch.space_dim(); ++c)
            point.push_back(patch.control_points()(a, c));
        doc["control_points"].push_back(std::move(point));
    }
    doc["weights"] = ordered_json::array();
    for (int a = 0; a < patch.weights().size(); ++a)
        doc["weights"].push_back(patch.weights()[a]);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << doc.dump(2) << '\n';
}

NurbsPatch read_domain_file(const std::string& path) {
    const ordered_json doc = load_json(path);
    const std::string what = "domain file '" + path + "'";
    if (!doc.is_object()) throw ValidationError(what + ": expected a JSON object");
    require(doc, "version", what);

    const int dim = require_int(require(doc, "dim", what), what + ", dim");
    const int space_dim = require_int(require(doc, "space_dim", what), what + ", space_dim");

    const ordered_json& degrees = require(doc, "degrees", what);
    const ordered_json& knots = require(doc, "knots", what);
    if (!degrees.is_array() || static_cast<int>(degrees.size()) != dim)
        throw ValidationError(what + ": 'degrees' must list one degree per axis");
    if (!knots.is_array() || static_cast<int>(knots.size()) != dim)
        throw ValidationError(what + ": 'knots' must list one knot vector per axis");

    std::vector<KnotVector> axes;
    for (int d = 0; d < dim; ++d) {
        if (!knots[d].is_array())
            throw ValidationError(what + ": knots of axis " + std::to_string(d) +
                                  " must be an array");
        try {
            axes.emplace_back(knots[d].get<std::vector<double>>(),
                              require_int(degrees[d], what + ", degrees"));
        } catch (const ValidationError& error) {
            throw ValidationError(what + ", axis " + std::to_string(d) + ": " + error.what());
        }
    }

    const ordered_json& points = require(doc, "control_points", what);
    if (!points.is_array() || points.empty())
        throw ValidationError(what + ": 'control_points' must be a non-empty array");
    Eigen::MatrixXd control(points.size(), space_dim);
    for (std::size_t a = 0; a < points.size(); ++a) {
        if (!points[a].is_array() || static_cast<int>(points[a].size()) != space_dim)
            throw ValidationError(what + ": control point " + std::to_string(a) +
                                  " must have " + std::to_string(space_dim) + " components");
        for (int c = 0; c < space_dim; ++c) control(a, c) = points[a][c].get<double>();
    }

    const ordered_json& weights = require(doc, "weights", what);
    if (!weights.is_array())
        throw ValidationError(what + ": 'weights' must be an array");
    Eigen::VectorXd weight_values(weights.size());
    for (std::size_t a = 0; a < weights.size(); ++a)
        weight_values[a] = weights[a].get<double>();

    try {
        return NurbsPatch(std::move(axes), std::move(control), std::move(weight_values),
                          space_dim);
    } catch (const ValidationError& error) {
        throw ValidationError(what + ": " + error.what());
    }
}

// ---------------------------------------------------------------------------
// Equation text
// ---------------------------------------------------------------------------

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class EquationParser {
public:
    explicit EquationParser(std::string_view text) : text_(text) {}

    std::vector<TermSpec> parse() {
        std::vector<TermSpec> terms;
        int side = 1;
        bool seen_equals = false;
        bool after_term = false;

        while (true) {
            skip_space();
            if (pos_ >= text_.size()) break;
            const char c = text_[pos_];

            if (c == '=') {
                if (seen_equals) throw ParseError("unexpected second '='", pos_);
                seen_equals = true;
                side = -1;
                after_term = false;
                ++pos_;
                continue;
            }

            int sign = side;
            if (c == '+' || c == '-') {
                if (c == '-') sign = -sign;
                ++pos_;
                skip_space();
            } else if (after_term) {
                throw ParseError("expected '+', '-' or '=' between terms", pos_);
            }

            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                parse_zero();
            } else {
                terms.push_back(parse_term(sign));
            }
            after_term = true;
        }
        return terms;
    }

private:
    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    void parse_zero() {
        const std::size_t start = pos_;
        double value = 0.0;
        const auto result =
            std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
        if (result.ec != std::errc() || value != 0.0)
            throw ParseError("only the literal 0 may stand in for an empty side", start);
        pos_ = result.ptr - text_.data();
    }

    std::string parse_ident(const char* role) {
        skip_space();
        if (pos_ >= text_.size() || !ident_start(text_[pos_]))
            throw ParseError(std::string("expected ") + role, pos_);
        const std::size_t start = pos_;
        while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    void expect(char c) {
        skip_space();
        if (pos_ >= text_.size() || text_[pos_] != c)
            throw ParseError(std::string("expected '") + c + "'", pos_);
        ++pos_;
    }

    TermSpec parse_term(int sign) {
        TermSpec term;
        term.sign = sign;
        term.name = parse_ident("a term name");
        expect('.');
        term.integral = parse_ident("an integral name");
        expect('.');
        term.region = parse_ident("a region name");
        expect('(');
        while (true) {
            std::string arg = parse_ident("a term argument");
            skip_space();
            if (pos_ < text_.size() && text_[pos_] == '.') {
                ++pos_;
                arg += '.' + parse_ident("a material parameter");
                skip_space();
            }
            term.args.push_back(std::move(arg));
            if (pos_ >= text_.size()) throw ParseError("unterminated argument list", pos_);
            if (text_[pos_] == ',') {
                ++pos_;
                continue;
            }
            if (text_[pos_] == ')') {
                ++pos_;
                break;
            }
            throw ParseError("expected ',' or ')'", pos_);
        }
        return term;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<TermSpec> parse_equation(std::string_view text) {
    return EquationParser(text).parse();
}

// ---------------------------------------------------------------------------
// Problem files
// ---------------------------------------------------------------------------

namespace {

const std::set<std::string> kSupportedTerms = {"dw_laplace", "dw_volume_lvf", "dw_lin_elastic"};

FieldSpec parse_field_entry(const ordered_json& entry, const std::string& what) {
    if (!entry.is_array() || entry.size() < 4 || entry.size() > 6)
        throw ValidationError(what + ": expected [dtype, components, region, order" +
                              "[, space[, family]]]");
    FieldSpec field;
    field.dtype = require_string(entry[0], what + ", dtype");
    if (field.dtype != "real") throw ValidationError(what + ": only 'real' fields exist");

    if (entry[1].is_number_integer())
        field.components = entry[1].get<int>();
    else if (entry[1].is_string() && entry[1].get<std::string>() == "scalar")
        field.components = 1;
    else
        throw ValidationError(what + ": components must be an integer or 'scalar'");
    if (field.components < 1 || field.components > 3)
        throw ValidationError(what + ": 1 to 3 components supported");

    field.region = require_string(entry[2], what + ", region");
    if (entry[3].is_null())
        field.order = 0;
    else
        field.order = require_int(entry[3], what + ", order");

    if (entry.size() >= 5) {
        field.space = require_string(entry[4], what + ", space");
        if (field.space != "H1") throw ValidationError(what + ": only the H1 space exists");
    }
    if (entry.size() == 6) field.family = require_string(entry[5], what + ", family");

    if (field.family == "iga") {
        if (field.order != 0)
            throw ValidationError(what + ": the domain file fixes the order of 'iga' fields");
    } else if (field.family == "lagrange" || field.family == "lobatto") {
        if (field.order < 1 || field.order > 4)
            throw ValidationError(what + ": FE approximation orders 1 to 4 supported");
    } else {
        throw ValidationError(what + ": unknown family '" + field.family +
                              "'; supported: iga, lagrange, lobatto");
    }
    return field;
}

MaterialParam parse_material_param(const ordered_json& value, const std::string& what) {
    MaterialParam param;
    if (value.is_number()) {
        param.scalar = true;
        param.value = value.get<double>();
        return param;
    }
    if (value.is_object() && value.contains("lam") && value.contains("mu")) {
        param.scalar = false;
        param.lam = value.at("lam").get<double>();
        param.mu = value.at("mu").get<double>();
        return param;
    }
    throw ValidationError(what + ": expected a number or {\"lam\": ..., \"mu\": ...}");
}

EbcValue parse_ebc_value(const std::string& key, const ordered_json& value,
                         const std::string& unknown_name, int components,
                         const std::string& what) {
    const std::size_t dot = key.find('.');
    const std::string variable = key.substr(0, dot);
    if (variable != unknown_name)
        throw ValidationError(what + ": '" + key + "' does not constrain the unknown '" +
                              unknown_name + "'");

    EbcValue out;
    if (dot == std::string::npos || key.substr(dot + 1) == "all") {
        out.component = -1;
    } else {
        int component = -1;
        const std::string comp_text = key.substr(dot + 1);
        const auto result = std::from_chars(comp_text.data(),
                                            comp_text.data() + comp_text.size(), component);
        if (result.ec != std::errc() || result.ptr != comp_text.data() + comp_text.size())
            throw ValidationError(what + ": bad component suffix in '" + key + "'");
        if (component < 0 || component >= components)
            throw ValidationError(what + ": component " + std::to_string(component) +
                                  " out of range in '" + key + "'");
        out.component = component;
    }

    if (value.is_number()) {
        out.text = value.dump();
        auto node = std::make_shared<ScalarExprNode>();
        node->kind = ScalarExprNode::Kind::Number;
        node->number = value.get<double>();
        out.expr = node;
    } else if (value.is_string()) {
        out.text = value.get<std::string>();
        out.expr = parse_scalar_expr(out.text);
    } else {
        throw ValidationError(what + ": boundary values are numbers or expression strings");
    }
    return out;
}

}  // namespace

ProblemSpec read_problem_file(const std::string& path) {
    const ordered_json doc = load_json(path);
    const std::string what = "problem file '" + path + "'";
    if (!doc.is_object()) throw ValidationError(what + ": expected a JSON object");

    ProblemSpec spec;
    const std::filesystem::path fs_path(path);
    spec.base_dir = fs_path.parent_path().string();
    spec.name = doc.contains("name") ? require_string(doc.at("name"), what + ", name")
                                     : fs_path.stem().string();

    // Domain reference: 'filename_domain' is the native spelling;
    // 'filename_mesh' is accepted for FE problem files and points at the same
    // kind of domain document (the companion mesh is sampled from it).
    std::string domain;
    if (doc.contains("filename_domain"))
        domain = require_string(doc.at("filename_domain"), what + ", filename_domain");
    else if (doc.contains("filename_mesh"))
        domain = require_string(doc.at("filename_mesh"), what + ", filename_mesh");
    else
        throw ValidationError(what + ": missing 'filename_domain'");
    std::filesystem::path domain_path(domain);
    if (domain_path.is_relative() && !spec.base_dir.empty())
        domain_path = fs_path.parent_path() / domain_path;
    spec.domain_path = domain_path.string();

    if (doc.contains("divisions")) {
        const ordered_json& divisions = doc.at("divisions");
        if (!divisions.is_array() || divisions.size() < 1 || divisions.size() > 3)
            throw ValidationError(what + ": 'divisions' must list 1 to 3 cell counts");
        spec.divisions = {1, 1, 1};
        for (std::size_t d = 0; d < divisions.size(); ++d) {
            spec.divisions[d] = require_int(divisions[d], what + ", divisions");
            if (spec.divisions[d] < 1)
                throw ValidationError(what + ": divisions must be positive");
        }
    }

    // Regions: selector string, or [selector, kind].
    for (const auto& [name, entry] : require(doc, "regions", what).items()) {
        RegionSpec region;
        if (entry.is_string()) {
            region.selector = entry.get<std::string>();
        } else if (entry.is_array() && entry.size() == 2) {
            region.selector = require_string(entry[0], what + ", region " + name);
            const std::string kind = require_string(entry[1], what + ", region " + name);
            if (kind == "cell")
                region.kind = RegionKind::Cell;
            else if (kind == "facet")
                region.kind = RegionKind::Facet;
            else if (kind == "vertex")
                region.kind = RegionKind::Vertex;
            else
                throw ValidationError(what + ": region '" + name + "' has unknown kind '" +
                                      kind + "'");
        } else {
            throw ValidationError(what + ": region '" + name +
                                  "' must be a selector string or [selector, kind]");
        }
        parse_selector(region.selector);  // fail early with a position
        spec.regions.emplace(name, std::move(region));
    }

    for (const auto& [name, entry] : require(doc, "fields", what).items())
        spec.fields.emplace(name, parse_field_entry(entry, what + ", field '" + name + "'"));

    std::string unknown_name;
    for (const auto& [name, entry] : require(doc, "variables", what).items()) {
        const std::string context = what + ", variable '" + name + "'";
        if (!entry.is_array() || entry.size() != 3)
            throw ValidationError(context + ": expected [role, field, order-or-dual]");
        const std::string role = require_string(entry[0], context);
        VariableSpec variable;
        variable.field = require_string(entry[1], context);
        if (role == "unknown field") {
            variable.unknown = true;
            if (!unknown_name.empty())
                throw ValidationError(what + ": a single unknown variable is supported");
            unknown_name = name;
        } else if (role == "test field") {
            variable.dual = require_string(entry[2], context);
        } else {
            throw ValidationError(context + ": role must be 'unknown field' or 'test field'");
        }
        spec.variables.emplace(name, std::move(variable));
    }
    if (unknown_name.empty())
        throw ValidationError(what + ": no unknown variable declared");

    if (doc.contains("materials")) {
        for (const auto& [name, entry] : doc.at("materials").items()) {
            const std::string context = what + ", material '" + name + "'";
            const ordered_json& body =
                entry.is_array() && entry.size() == 1 ? entry[0] : entry;
            if (!body.is_object()) throw ValidationError(context + ": expected parameters");
            std::map<std::string, MaterialParam> params;
            for (const auto& [key, value] : body.items())
                params.emplace(key, parse_material_param(value, context + ", '" + key + "'"));
            spec.materials.emplace(name, std::move(params));
        }
    }

    for (const auto& [name, entry] : require(doc, "integrals", what).items()) {
        const int order = require_int(entry, what + ", integral '" + name + "'");
        if (order < 0) throw ValidationError(what + ": integral orders are non-negative");
        spec.integrals.emplace(name, order);
    }

    if (doc.contains("ebcs")) {
        for (const auto& [name, entry] : doc.at("ebcs").items()) {
            const std::string context = what + ", ebc '" + name + "'";
            if (!entry.is_array() || entry.size() != 2 || !entry[1].is_object())
                throw ValidationError(context + ": expected [region, {values}]");
            EbcSpec bc;
            bc.name = name;
            bc.region = require_string(entry[0], context);
            bc.variable = unknown_name;
            const int components =
                spec.fields.count(spec.variables.at(unknown_name).field)
                    ? spec.fields.at(spec.variables.at(unknown_name).field).components
                    : 1;
            for (const auto& [key, value] : entry[1].items())
                bc.values.push_back(
                    parse_ebc_value(key, value, unknown_name, components, context));
            if (bc.values.empty())
                throw ValidationError(context + ": no values given");
            spec.ebcs.push_back(std::move(bc));
        }
    }

    for (const auto& [name, entry] : require(doc, "equations", what).items()) {
        EquationSpec equation;
        equation.name = name;
        equation.text = require_string(entry, what + ", equation '" + name + "'");
        equation.terms = parse_equation(equation.text);
        spec.equations.push_back(std::move(equation));
    }
    if (spec.equations.empty()) throw ValidationError(what + ": no equations");

    if (doc.contains("solvers")) {
        for (const auto& [name, entry] : doc.at("solvers").items()) {
            const std::string context = what + ", solver '" + name + "'";
            if (!entry.is_array() || entry.size() < 1 || entry.size() > 2)
                throw ValidationError(context + ": expected [kind, {options}]");
            const std::string kind = require_string(entry[0], context);
            const ordered_json options =
                entry.size() == 2 ? entry[1] : ordered_json::object();
            if (!options.is_object())
                throw ValidationError(context + ": options must be an object");

            if (kind == "ls.direct") {
                spec.solver.kind = LinearSolverKind::Direct;
            } else if (kind == "ls.cg") {
                spec.solver.kind = LinearSolverKind::ConjugateGradient;
                if (options.contains("eps_r"))
                    spec.solver.cg_tolerance = options.at("eps_r").get<double>();
                if (options.contains("i_max"))
                    spec.solver.cg_max_iterations = require_int(options.at("i_max"), context);
            } else if (kind == "nls.newton") {
                if (options.contains("i_max"))
                    spec.solver.newton_max_iterations =
                        require_int(options.at("i_max"), context);
                if (options.contains("eps_a"))
                    spec.solver.newton_tolerance = options.at("eps_a").get<double>();
            } else {
                throw ValidationError(context + ": unknown kind '" + kind +
                                      "'; supported: ls.direct, ls.cg, nls.newton");
            }
        }
    }

    // Cross-checks: every name mentioned anywhere must resolve.
    for (const auto& [name, field] : spec.fields) {
        if (!spec.regions.count(field.region))
            throw ValidationError(what + ": field '" + name + "' references unknown region '" +
                                  field.region + "'");
        if (field.family != "iga" && spec.divisions[0] == 0)
            throw ValidationError(what + ": field '" + name +
                                  "' needs 'divisions' for the companion mesh");
    }
    for (const auto& [name, variable] : spec.variables) {
        if (!spec.fields.count(variable.field))
            throw ValidationError(what + ": variable '" + name +
                                  "' references unknown field '" + variable.field + "'");
        if (!variable.unknown && !spec.variables.count(variable.dual))
            throw ValidationError(what + ": test variable '" + name +
                                  "' references unknown dual '" + variable.dual + "'");
    }
    for (const EbcSpec& bc : spec.ebcs)
        if (!spec.regions.count(bc.region))
            throw ValidationError(what + ": ebc '" + bc.name +
                                  "' references unknown region '" + bc.region + "'");
    for (const EquationSpec& equation : spec.equations) {
        for (const TermSpec& term : equation.terms) {
            if (!kSupportedTerms.count(term.name))
                throw ValidationError(what + ": unknown term '" + term.name +
                                      "'; supported terms: dw_laplace, dw_volume_lvf, "
                                      "dw_lin_elastic");
            if (!spec.integrals.count(term.integral))
                throw ValidationError(what + ": term '" + term.name +
                                      "' references unknown integral '" + term.integral + "'");
            if (!spec.regions.count(term.region))
                throw ValidationError(what + ": term '" + term.name +
                                      "' references unknown region '" + term.region + "'");
            for (const std::string& arg : term.args) {
                const std::size_t dot = arg.find('.');
                if (dot == std::string::npos) {
                    if (!spec.variables.count(arg))
                        throw ValidationError(what + ": term argument '" + arg +
                                              "' is not a variable");
                } else {
                    const std::string material = arg.substr(0, dot);
                    const std::string param = arg.substr(dot + 1);
                    if (!spec.materials.count(material) ||
                        !spec.materials.at(material).count(param))
                        throw ValidationError(what + ": term argument '" + arg +
                                              "' is not a material parameter");
                }
            }
        }
    }

    return spec;
}

// ---------------------------------------------------------------------------
// Post-processing
// ---------------------------------------------------------------------------

LinearizedField linearize_field(const NurbsPatch& patch, const Eigen::VectorXd& dofs,
                                std::array<int, 3> samples) {
    const int scalar_size = patch.basis_size();
    if (dofs.size() % scalar_size != 0)
        throw ValidationError("coefficient count is not a multiple of the basis size");
    const int components = static_cast<int>(dofs.size()) / scalar_size;
    if (components < 1 || components > 3)
        throw ValidationError("1 to 3 components supported");

    std::array<int, 3> divisions = {1, 1, 1};
    for (int d = 0; d < patch.dim(); ++d) {
        if (samples[d] < 2) throw ValidationError("need at least 2 samples per axis");
        divisions[d] = samples[d] - 1;
    }

    LinearizedField out;
    out.mesh = make_fe_mesh(patch, divisions);
    out.values.resize(out.mesh.vertices.rows(), components);

    int vertex = 0;
    std::array<int, 3> counts = {1, 1, 1};
    for (int d = 0; d < patch.dim(); ++d) counts[d] = divisions[d] + 1;
    for (int i2 = 0; i2 < counts[2]; ++i2)
        for (int i1 = 0; i1 < counts[1]; ++i1)
            for (int i0 = 0; i0 < counts[0]; ++i0, ++vertex) {
                const ParamPoint xi(static_cast<double>(i0) / divisions[0],
                                    patch.dim() > 1 ? static_cast<double>(i1) / divisions[1]
                                                    : 0.0,
                                    patch.dim() > 2 ? static_cast<double>(i2) / divisions[2]
                                                    : 0.0);
                const PatchBasis basis = patch_basis_eval(patch, xi);
                out.values.row(vertex).setZero();
                for (std::size_t a = 0; a < basis.active.size(); ++a)
                    for (int c = 0; c < components; ++c)
                        out.values(vertex, c) +=
                            basis.values[a] * dofs[basis.active[a] * components + c];
            }
    return out;
}

namespace {

std::string format_real(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.9g", value);
    return buffer;
}

}  // namespace

void write_vtk(const Eigen::MatrixXd& vertices, const std::vector<std::vector<int>>& cells,
               int dim, const std::vector<VtkPointData>& data, const std::string& path) {
    const int nverts = static_cast<int>(vertices.rows());
    if (dim != 2 && dim != 3) throw ValidationError("only 2D and 3D output supported");
    if (vertices.cols() < 2 || vertices.cols() > 3)
        throw ValidationError("vertices must have 2 or 3 coordinates");
    const std::size_t corner_count = dim == 2 ? 4 : 8;
    for (const std::vector<int>& cell : cells) {
        if (cell.size() != corner_count)
            throw ValidationError("cells must have " + std::to_string(corner_count) +
                                  " corners");
        for (const int v : cell)
            if (v < 0 || v >= nverts) throw ValidationError("cell vertex out of range");
    }
    for (const VtkPointData& field : data) {
        if (field.values.rows() != nverts)
            throw ValidationError("point data '" + field.name +
                                  "' does not match the vertex count");
        if (field.values.cols() < 1 || field.values.cols() > 3)
            throw ValidationError("point data '" + field.name + "' must have 1 to 3 components");
    }

    std::string text;
    text += "# vtk DataFile Version 3.0\n";
    text += "igafem output\n";
    text += "ASCII\n";
    text += "DATASET UNSTRUCTURED_GRID\n";

    text += "POINTS " + std::to_string(nverts) + " double\n";
    for (int v = 0; v < nverts; ++v) {
        for (int c = 0; c < 3; ++c) {
            if (c > 0) text += ' ';
            text += format_real(c < vertices.cols() ? vertices(v, c) : 0.0);
        }
        text += '\n';
    }

    const std::size_t entries = cells.size() * (corner_count + 1);
    text += "CELLS " + std::to_string(cells.size()) + ' ' + std::to_string(entries) + '\n';
    for (const std::vector<int>& cell : cells) {
        text += std::to_string(cell.size());
        for (const int v : cell) text += ' ' + std::to_string(v);
        text += '\n';
    }

    text += "CELL_TYPES " + std::to_string(cells.size()) + '\n';
    for (std::size_t i = 0; i < cells.size(); ++i)
        text += dim == 2 ? "9\n" : "12\n";

    if (!data.empty()) {
        text += "POINT_DATA " + std::to_string(nverts) + '\n';
        for (const VtkPointData& field : data) {
            if (field.values.cols() == 1) {
                text += "SCALARS " + field.name + " double 1\n";
                text += "LOOKUP_TABLE default\n";
                for (int v = 0; v < nverts; ++v) text += format_real(field.values(v, 0)) + "\n";
            } else {
                text += "VECTORS " + field.name + " double\n";
                for (int v = 0; v < nverts; ++v) {
                    for (int c = 0; c < 3; ++c) {
                        if (c > 0) text += ' ';
                        text += format_real(c < field.values.cols() ? field.values(v, c) : 0.0);
                    }
                    text += '\n';
                }
            }
        }
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << text;
}

}  // namespace igafem
