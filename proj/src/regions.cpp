#include "igafem/regions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace igafem {

namespace {

// ---------------------------------------------------------------------------
// Shared lexer for selector and scalar expression strings
// ---------------------------------------------------------------------------

struct Token {
    enum class Kind { Ident, Number, Symbol, End };
    Kind kind = Kind::End;
    std::string_view text;
    double number = 0.0;
    std::size_t offset = 0;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }

    Token take() {
        Token t = current_;
        advance();
        return t;
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw ParseError(message, current_.offset);
    }

private:
    void advance() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        current_.offset = pos_;
        if (pos_ >= text_.size()) {
            current_ = {Token::Kind::End, {}, 0.0, pos_};
            return;
        }
        const char c = text_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_;
            while (end < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
                ++end;
            current_ = {Token::Kind::Ident, text_.substr(pos_, end - pos_), 0.0, pos_};
            pos_ = end;
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
            double value = 0.0;
            const char* begin = text_.data() + pos_;
            const char* end = text_.data() + text_.size();
            auto [ptr, ec] = std::from_chars(begin, end, value);
            if (ec != std::errc())
                throw ParseError("malformed number", pos_);
            current_ = {Token::Kind::Number, text_.substr(pos_, ptr - begin), value, pos_};
            pos_ += static_cast<std::size_t>(ptr - begin);
            return;
        }
        // Two-character comparison operators first.
        if ((c == '<' || c == '>') && pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
            current_ = {Token::Kind::Symbol, text_.substr(pos_, 2), 0.0, pos_};
            pos_ += 2;
            return;
        }
        static constexpr std::string_view kSingles = "&|~()<>+-*/^";
        if (kSingles.find(c) != std::string_view::npos) {
            current_ = {Token::Kind::Symbol, text_.substr(pos_, 1), 0.0, pos_};
            pos_ += 1;
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    Token current_;
};

bool is_symbol(const Token& t, std::string_view s) {
    return t.kind == Token::Kind::Symbol && t.text == s;
}

bool is_ident(const Token& t, std::string_view s) {
    return t.kind == Token::Kind::Ident && t.text == s;
}

int coord_axis(std::string_view name) {
    if (name == "x") return 0;
    if (name == "y") return 1;
    if (name == "z") return 2;
    return -1;
}

CompareOp mirror(CompareOp op) {
    switch (op) {
        case CompareOp::Less: return CompareOp::Greater;
        case CompareOp::Greater: return CompareOp::Less;
        case CompareOp::LessEqual: return CompareOp::GreaterEqual;
        case CompareOp::GreaterEqual: return CompareOp::LessEqual;
    }
    return op;
}

// ---------------------------------------------------------------------------
// Selector grammar
// ---------------------------------------------------------------------------

class SelectorParser {
public:
    explicit SelectorParser(std::string_view text) : lex_(text) {}

    SelectorPtr parse() {
        SelectorPtr node = parse_top();
        if (lex_.peek().kind != Token::Kind::End)
            lex_.fail("unexpected trailing input");
        return node;
    }

private:
    SelectorPtr parse_top() {
        const Token t = lex_.take();
        if (is_ident(t, "all")) {
            auto node = std::make_shared<SelectorNode>();
            node->kind = SelectorNode::Kind::All;
            return node;
        }
        if (is_ident(t, "vertices")) {
            const Token what = lex_.take();
            if (is_ident(what, "in")) return parse_or();
            if (is_ident(what, "of")) {
                const Token set_kw = lex_.take();
                if (!is_ident(set_kw, "set"))
                    throw ParseError("expected 'set' after 'vertices of'", set_kw.offset);
                const Token name = lex_.take();
                if (name.kind != Token::Kind::Ident)
                    throw ParseError("expected a set name", name.offset);
                auto node = std::make_shared<SelectorNode>();
                node->kind = SelectorNode::Kind::NamedSet;
                node->set_name = std::string(name.text);
                return node;
            }
            throw ParseError("expected 'in' or 'of set' after 'vertices'", what.offset);
        }
        throw ParseError("selector must start with 'all' or 'vertices'", t.offset);
    }

    SelectorPtr parse_or() {
        SelectorPtr node = parse_and();
        while (is_symbol(lex_.peek(), "|")) {
            lex_.take();
            auto parent = std::make_shared<SelectorNode>();
            parent->kind = SelectorNode::Kind::Or;
            parent->child = node;
            parent->rhs = parse_and();
            node = parent;
        }
        return node;
    }

    SelectorPtr parse_and() {
        SelectorPtr node = parse_not();
        while (is_symbol(lex_.peek(), "&")) {
            lex_.take();
            auto parent = std::make_shared<SelectorNode>();
            parent->kind = SelectorNode::Kind::And;
            parent->child = node;
            parent->rhs = parse_not();
            node = parent;
        }
        return node;
    }

    SelectorPtr parse_not() {
        if (is_symbol(lex_.peek(), "~")) {
            lex_.take();
            auto node = std::make_shared<SelectorNode>();
            node->kind = SelectorNode::Kind::Not;
            node->child = parse_not();
            return node;
        }
        if (is_symbol(lex_.peek(), "(")) {
            lex_.take();
            SelectorPtr node = parse_or();
            if (!is_symbol(lex_.peek(), ")")) lex_.fail("expected ')'");
            lex_.take();
            return node;
        }
        return parse_comparison();
    }

    double parse_signed_number() {
        double sign = 1.0;
        if (is_symbol(lex_.peek(), "-")) {
            lex_.take();
            sign = -1.0;
        }
        const Token t = lex_.take();
        if (t.kind != Token::Kind::Number)
            throw ParseError("expected a number in the comparison", t.offset);
        return sign * t.number;
    }

    SelectorPtr parse_comparison() {
        auto node = std::make_shared<SelectorNode>();
        node->kind = SelectorNode::Kind::Compare;

        bool coord_first = false;
        if (lex_.peek().kind == Token::Kind::Ident) {
            const Token lhs = lex_.take();
            node->axis = coord_axis(lhs.text);
            if (node->axis < 0)
                throw ParseError("unknown coordinate '" + std::string(lhs.text) + "'", lhs.offset);
            coord_first = true;
        } else if (lex_.peek().kind == Token::Kind::Number || is_symbol(lex_.peek(), "-")) {
            node->threshold = parse_signed_number();
        } else {
            lex_.fail("expected a comparison");
        }

        const Token op = lex_.take();
        if (is_symbol(op, "<")) node->op = CompareOp::Less;
        else if (is_symbol(op, ">")) node->op = CompareOp::Greater;
        else if (is_symbol(op, "<=")) node->op = CompareOp::LessEqual;
        else if (is_symbol(op, ">=")) node->op = CompareOp::GreaterEqual;
        else throw ParseError("expected a comparison operator", op.offset);

        if (coord_first) {
            node->threshold = parse_signed_number();
        } else {
            const Token rhs = lex_.take();
            if (rhs.kind != Token::Kind::Ident || coord_axis(rhs.text) < 0)
                throw ParseError("a comparison needs a coordinate on one side", rhs.offset);
            node->axis = coord_axis(rhs.text);
            node->op = mirror(node->op);  // normalize to coordinate-first form
        }
        return node;
    }

    Lexer lex_;
};

std::string format_number(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

const char* axis_name(int axis) {
    static const char* names[3] = {"x", "y", "z"};
    return names[axis];
}

const char* op_text(CompareOp op) {
    switch (op) {
        case CompareOp::Less: return "<";
        case CompareOp::Greater: return ">";
        case CompareOp::LessEqual: return "<=";
        case CompareOp::GreaterEqual: return ">=";
    }
    return "?";
}

std::string print_bool(const SelectorNode& node) {
    switch (node.kind) {
        case SelectorNode::Kind::Compare:
            return "(" + std::string(axis_name(node.axis)) + " " + op_text(node.op) + " " +
                   format_number(node.threshold) + ")";
        case SelectorNode::Kind::Not:
            return "~" + print_bool(*node.child);
        case SelectorNode::Kind::And:
            return "(" + print_bool(*node.child) + " & " + print_bool(*node.rhs) + ")";
        case SelectorNode::Kind::Or:
            return "(" + print_bool(*node.child) + " | " + print_bool(*node.rhs) + ")";
        default:
            throw ValidationError("malformed selector tree");
    }
}

// ---------------------------------------------------------------------------
// Scalar expressions
// ---------------------------------------------------------------------------

class ScalarExprParser {
public:
    explicit ScalarExprParser(std::string_view text) : lex_(text) {}

    ScalarExprPtr parse() {
        ScalarExprPtr node = parse_sum();
        if (lex_.peek().kind != Token::Kind::End) lex_.fail("unexpected trailing input");
        return node;
    }

private:
    using Kind = ScalarExprNode::Kind;

    static ScalarExprPtr make(Kind kind, ScalarExprPtr lhs, ScalarExprPtr rhs) {
        auto node = std::make_shared<ScalarExprNode>();
        node->kind = kind;
        node->lhs = std::move(lhs);
        node->rhs = std::move(rhs);
        return node;
    }

    ScalarExprPtr parse_sum() {
        ScalarExprPtr node = parse_product();
        while (is_symbol(lex_.peek(), "+") || is_symbol(lex_.peek(), "-")) {
            const bool add = lex_.take().text == "+";
            node = make(add ? Kind::Add : Kind::Subtract, node, parse_product());
        }
        return node;
    }

    ScalarExprPtr parse_product() {
        ScalarExprPtr node = parse_unary();
        while (is_symbol(lex_.peek(), "*") || is_symbol(lex_.peek(), "/")) {
            const bool mul = lex_.take().text == "*";
            node = make(mul ? Kind::Multiply : Kind::Divide, node, parse_unary());
        }
        return node;
    }

    ScalarExprPtr parse_unary() {
        if (is_symbol(lex_.peek(), "-")) {
            lex_.take();
            return make(Kind::Negate, parse_unary(), nullptr);
        }
        return parse_power();
    }

    ScalarExprPtr parse_power() {
        ScalarExprPtr base = parse_primary();
        if (is_symbol(lex_.peek(), "^")) {
            lex_.take();
            return make(Kind::Power, base, parse_unary());
        }
        return base;
    }

    ScalarExprPtr parse_primary() {
        const Token t = lex_.take();
        if (t.kind == Token::Kind::Number) {
            auto node = std::make_shared<ScalarExprNode>();
            node->kind = Kind::Number;
            node->number = t.number;
            return node;
        }
        if (t.kind == Token::Kind::Ident) {
            const int axis = coord_axis(t.text);
            if (axis < 0)
                throw ParseError("unknown identifier '" + std::string(t.text) + "'", t.offset);
            auto node = std::make_shared<ScalarExprNode>();
            node->kind = Kind::Coord;
            node->axis = axis;
            return node;
        }
        if (is_symbol(t, "(")) {
            ScalarExprPtr node = parse_sum();
            if (!is_symbol(lex_.peek(), ")")) lex_.fail("expected ')'");
            lex_.take();
            return node;
        }
        throw ParseError("expected a number, coordinate or '('", t.offset);
    }

    Lexer lex_;
};

}  // namespace

SelectorPtr parse_selector(std::string_view text) {
    return SelectorParser(text).parse();
}

std::string print_selector(const SelectorNode& node) {
    switch (node.kind) {
        case SelectorNode::Kind::All:
            return "all";
        case SelectorNode::Kind::NamedSet:
            return "vertices of set " + node.set_name;
        default:
            return "vertices in " + print_bool(node);
    }
}

bool selector_equal(const SelectorNode& a, const SelectorNode& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case SelectorNode::Kind::All:
            return true;
        case SelectorNode::Kind::NamedSet:
            return a.set_name == b.set_name;
        case SelectorNode::Kind::Compare:
            return a.axis == b.axis && a.op == b.op && a.threshold == b.threshold;
        case SelectorNode::Kind::Not:
            return selector_equal(*a.child, *b.child);
        case SelectorNode::Kind::And:
        case SelectorNode::Kind::Or:
            return selector_equal(*a.child, *b.child) && selector_equal(*a.rhs, *b.rhs);
    }
    return false;
}

ScalarExprPtr parse_scalar_expr(std::string_view text) {
    return ScalarExprParser(text).parse();
}

double eval_scalar_expr(const ScalarExprNode& expr, const Eigen::Vector3d& point) {
    using Kind = ScalarExprNode::Kind;
    switch (expr.kind) {
        case Kind::Number: return expr.number;
        case Kind::Coord: return point[expr.axis];
        case Kind::Negate: return -eval_scalar_expr(*expr.lhs, point);
        case Kind::Add: return eval_scalar_expr(*expr.lhs, point) + eval_scalar_expr(*expr.rhs, point);
        case Kind::Subtract:
            return eval_scalar_expr(*expr.lhs, point) - eval_scalar_expr(*expr.rhs, point);
        case Kind::Multiply:
            return eval_scalar_expr(*expr.lhs, point) * eval_scalar_expr(*expr.rhs, point);
        case Kind::Divide:
            return eval_scalar_expr(*expr.lhs, point) / eval_scalar_expr(*expr.rhs, point);
        case Kind::Power:
            return std::pow(eval_scalar_expr(*expr.lhs, point), eval_scalar_expr(*expr.rhs, point));
    }
    return 0.0;
}

namespace {

bool vertex_selected(const SelectorNode& node, const RegionMeshView& mesh, int v) {
    switch (node.kind) {
        case SelectorNode::Kind::All:
            return true;
        case SelectorNode::Kind::Compare: {
            const auto& verts = *mesh.vertices;
            const double coord = node.axis < verts.cols() ? verts(v, node.axis) : 0.0;
            switch (node.op) {
                case CompareOp::Less: return coord < node.threshold;
                case CompareOp::Greater: return coord > node.threshold;
                case CompareOp::LessEqual: return coord <= node.threshold;
                case CompareOp::GreaterEqual: return coord >= node.threshold;
            }
            return false;
        }
        case SelectorNode::Kind::NamedSet: {
            const auto it = mesh.vertex_sets->find(node.set_name);
            if (it == mesh.vertex_sets->end())
                throw ValidationError("unknown vertex set '" + node.set_name + "'");
            return std::binary_search(it->second.begin(), it->second.end(), v);
        }
        case SelectorNode::Kind::Not:
            return !vertex_selected(*node.child, mesh, v);
        case SelectorNode::Kind::And:
            return vertex_selected(*node.child, mesh, v) && vertex_selected(*node.rhs, mesh, v);
        case SelectorNode::Kind::Or:
            return vertex_selected(*node.child, mesh, v) || vertex_selected(*node.rhs, mesh, v);
    }
    return false;
}

}  // namespace

Region eval_selector(const SelectorNode& selector, const RegionMeshView& mesh, RegionKind kind,
                     std::string name) {
    if (!mesh.vertices || !mesh.cells || !mesh.boundary_facets || !mesh.vertex_sets)
        throw ValidationError("incomplete mesh view");

    Region region;
    region.name = std::move(name);
    region.kind = kind;
    region.selector_text = print_selector(selector);

    const int nv = static_cast<int>(mesh.vertices->rows());
    std::vector<bool> selected(nv, false);
    for (int v = 0; v < nv; ++v) {
        if (vertex_selected(selector, mesh, v)) {
            selected[v] = true;
            region.vertices.push_back(v);
        }
    }

    if (kind == RegionKind::Cell) {
        for (std::size_t c = 0; c < mesh.cells->size(); ++c) {
            const auto& cell = (*mesh.cells)[c];
            if (std::all_of(cell.begin(), cell.end(), [&](int v) { return selected[v]; }))
                region.cells.push_back(static_cast<int>(c));
        }
    } else if (kind == RegionKind::Facet) {
        for (const MeshFacet& facet : *mesh.boundary_facets) {
            if (std::all_of(facet.vertices.begin(), facet.vertices.end(),
                            [&](int v) { return selected[v]; }))
                region.facets.push_back(facet);
        }
    }

    if (region.vertices.empty())
        warn("region '" + region.name + "' selects no vertices");
    return region;
}

}  // namespace igafem
