#pragma once

// Recursive-descent parser for the STRIPS+typing subset of PDDL
// (:strips, :typing, :negative-preconditions). Anything outside the subset
// is rejected with a structure diagnostic naming the construct; the parser
// never recovers into a wrong AST. Structural errors stop the parse at the
// first finding, mirroring solver parsers; post-structural validation
// (name resolution, arities, type graph) collects everything it finds.
//
// The nonstandard plural keyword `:effects` is accepted with a warning
// (rejected under ParseOptions::strict); `:preconditions` is always an
// error, as classical parsers treat it.
//
// A (:requirements ...) section inside a problem file is parsed and
// discarded; some generators emit it and real validators ignore it there.

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pddlkit/ast.hpp"
#include "pddlkit/lexer.hpp"
#include "pddlkit/source.hpp"

namespace pddlkit::syntax {

struct ParseOptions {
    bool strict = false;  // reject `:effects` instead of warning
};

template <typename AstT>
struct ParseResult {
    std::optional<AstT> ast;
    std::vector<Diagnostic> diagnostics;  // warnings may accompany a successful parse

    bool ok() const { return ast.has_value(); }
};

namespace detail {

struct ParseAbort {};

inline const std::set<std::string>& supported_requirements() {
    static const std::set<std::string> reqs = {":strips", ":typing", ":negative-preconditions"};
    return reqs;
}

inline bool is_unsupported_formula_head(const std::string& head) {
    static const std::set<std::string> heads = {"or",       "when",   "forall", "exists",
                                               "imply",    "either", "oneof",  "increase",
                                               "decrease", "assign", "scale-up", "scale-down"};
    return heads.count(head) > 0;
}

class Parser {
public:
    Parser(const SourceFile& src, ParseOptions opts) : src_(src), opts_(opts) {}

    ParseResult<DomainAst> run_domain() {
        ParseResult<DomainAst> result;
        if (!start(result.diagnostics)) return result;
        DomainAst ast;
        try {
            parse_domain_structure(ast);
            validate_domain(ast);
        } catch (const ParseAbort&) {
        }
        finish(result, std::move(ast));
        return result;
    }

    ParseResult<ProblemAst> run_problem() {
        ParseResult<ProblemAst> result;
        if (!start(result.diagnostics)) return result;
        ProblemAst ast;
        try {
            parse_problem_structure(ast);
            validate_problem(ast);
        } catch (const ParseAbort&) {
        }
        finish(result, std::move(ast));
        return result;
    }

private:
    const SourceFile& src_;
    ParseOptions opts_;
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::vector<Diagnostic> diags_;
    std::vector<TypedName> type_decls_;

    bool start(std::vector<Diagnostic>& out) {
        if (auto lex_error = lex(src_, tokens_)) {
            out.push_back(*lex_error);
            return false;
        }
        return true;
    }

    template <typename AstT>
    void finish(ParseResult<AstT>& result, AstT&& ast) {
        result.diagnostics = std::move(diags_);
        if (!has_errors(result.diagnostics)) result.ast = std::move(ast);
    }

    // --- token plumbing ---------------------------------------------------

    const Token& peek() const { return tokens_[pos_]; }
    const Token& advance() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }
    bool at_end() const { return peek().kind == Token::Kind::end; }

    const Token& last_content_token() const {
        std::size_t i = pos_ < tokens_.size() ? pos_ : tokens_.size() - 1;
        while (i > 0 && tokens_[i].kind == Token::Kind::end) --i;
        return tokens_[i];
    }

    [[noreturn]] void fail(const Token& at, std::string message,
                           DiagCategory category = DiagCategory::structure) {
        if (at.kind == Token::Kind::end) {
            const Token& anchor = last_content_token();
            diags_.push_back({src_.kind(), anchor.line, anchor.text, std::move(message), category,
                              Severity::error});
        } else {
            diags_.push_back(
                {src_.kind(), at.line, at.text, std::move(message), category, Severity::error});
        }
        throw ParseAbort{};
    }

    void error_at(const Token& at, std::string message, DiagCategory category) {
        diags_.push_back(
            {src_.kind(), at.line, at.text, std::move(message), category, Severity::error});
    }

    void warn_at(const Token& at, std::string message, DiagCategory category) {
        diags_.push_back(
            {src_.kind(), at.line, at.text, std::move(message), category, Severity::warning});
    }

    const Token& expect_lparen(const char* what) {
        if (peek().kind != Token::Kind::lparen) fail(peek(), std::string(what) + " expected");
        return advance();
    }

    const Token& expect_rparen() {
        if (peek().kind != Token::Kind::rparen) {
            if (peek().kind == Token::Kind::end)
                fail(peek(), "')' expected", DiagCategory::lex);
            fail(peek(), "')' expected");
        }
        return advance();
    }

    const Token& expect_symbol(const char* what) {
        if (peek().kind != Token::Kind::symbol) fail(peek(), std::string(what) + " expected");
        return advance();
    }

    std::string lower(const Token& t) const { return to_lower_copy(t.text); }

    // --- shared pieces ----------------------------------------------------

    void parse_define_header(const char* kind_word, std::string& name) {
        expect_lparen("'(define'");
        const Token& def = expect_symbol("'define'");
        if (lower(def) != "define") fail(def, "'define' expected");
        expect_lparen(src_.kind() == FileKind::DF ? "'(domain'" : "'(problem'");
        const Token& kw = expect_symbol(kind_word);
        if (lower(kw) != (src_.kind() == FileKind::DF ? "domain" : "problem"))
            fail(kw, src_.kind() == FileKind::DF ? "domain definition expected"
                                                 : "problem definition expected");
        const Token& nm = expect_symbol("name");
        if (nm.text[0] == ':' || nm.text[0] == '?') fail(nm, "name expected");
        name = lower(nm);
        expect_rparen();
    }

    void expect_file_end() {
        if (!at_end()) fail(peek(), "end of file expected", DiagCategory::lex);
    }

    // Typed list of names or variables. `variables` selects which shape each
    // entry must have; a '(' after '-' is the multi-type form and a hard
    // typing error, per the one-type-per-parameter rule.
    template <typename Out>
    void parse_typed_list(std::vector<Out>& out, bool variables) {
        std::vector<Token> pending;
        while (true) {
            const Token& t = peek();
            if (t.kind == Token::Kind::rparen) {
                flush_typed(out, pending, "object", 0, "object");
                return;
            }
            if (t.kind == Token::Kind::end) fail(t, "')' expected", DiagCategory::lex);
            if (t.kind == Token::Kind::lparen) fail(t, variables ? "variable expected" : "constant expected");
            if (t.text == "-") {
                const Token& dash = advance();
                if (pending.empty())
                    fail(dash, "each parameter can only be assigned a single type",
                         DiagCategory::typing);
                const Token& ty = peek();
                if (ty.kind == Token::Kind::lparen)
                    fail(ty, "each parameter can only be assigned a single type",
                         DiagCategory::typing);
                const Token& ty_tok = expect_symbol("type name");
                if (ty_tok.text[0] == '?' || ty_tok.text[0] == ':') fail(ty_tok, "type name expected");
                flush_typed(out, pending, lower(ty_tok), ty_tok.line, ty_tok.text);
            } else {
                if (variables && t.text[0] != '?') fail(t, "variable expected");
                if (!variables && (t.text[0] == '?' || t.text[0] == ':'))
                    fail(t, "constant expected");
                pending.push_back(advance());
            }
        }
    }

    template <typename Out>
    void flush_typed(std::vector<Out>& out, std::vector<Token>& pending,
                     const std::string& type_name, int, const std::string&) {
        for (const Token& t : pending) {
            Out entry;
            entry.name = to_lower_copy(t.text);
            entry.type_name = type_name;
            entry.line = t.line;
            entry.spelling = t.text;
            out.push_back(entry);
        }
        pending.clear();
    }

    Atom parse_atom_body() {
        // caller consumed the '('; first symbol is the predicate name
        const Token& head = expect_symbol("predicate name");
        if (head.text[0] == ':' || head.text[0] == '?') fail(head, "predicate name expected");
        Atom atom;
        atom.pred = lower(head);
        atom.line = head.line;
        atom.spelling = head.text;
        while (peek().kind != Token::Kind::rparen) {
            if (peek().kind != Token::Kind::symbol) {
                if (peek().kind == Token::Kind::end) fail(peek(), "')' expected", DiagCategory::lex);
                fail(peek(), "term expected");
            }
            const Token& arg = advance();
            atom.args.push_back({to_lower_copy(arg.text), arg.line, arg.text});
        }
        expect_rparen();
        return atom;
    }

    // literal := (pred terms...) | (not (pred terms...))
    // conjunctions flatten: (and (and x)) has the same AST as (and x).
    void parse_formula_children(std::vector<Literal>& out) {
        while (peek().kind != Token::Kind::rparen) {
            expect_lparen("formula");
            parse_formula_element(out);
        }
        expect_rparen();
    }

    void parse_formula_element(std::vector<Literal>& out) {
        // caller consumed '('
        const Token& head = peek();
        if (head.kind != Token::Kind::symbol) fail(head, "atom expected");
        std::string h = lower(head);
        if (h == "and") {
            advance();
            parse_formula_children(out);
        } else if (h == "not") {
            advance();
            expect_lparen("atom");
            const Token& inner = peek();
            if (inner.kind == Token::Kind::symbol) {
                std::string ih = lower(inner);
                if (ih == "and" || ih == "not" || is_unsupported_formula_head(ih))
                    fail(inner, "atom expected");
            }
            out.push_back({parse_atom_body(), true});
            expect_rparen();
        } else if (is_unsupported_formula_head(h)) {
            fail(head, "conjunction, negation, or atom expected");
        } else {
            out.push_back({parse_atom_body(), false});
        }
    }

    Formula parse_formula() {
        expect_lparen("formula");
        const Token& head = peek();
        Formula f;
        if (head.kind == Token::Kind::symbol && lower(head) == "and") {
            advance();
            f.is_conjunction = true;
            parse_formula_children(f.literals);
        } else {
            f.is_conjunction = false;
            parse_formula_element(f.literals);
            if (f.literals.size() != 1) fail(head, "single literal expected");
        }
        return f;
    }

    // --- domain -----------------------------------------------------------

    void parse_domain_structure(DomainAst& ast) {
        parse_define_header("'domain'", ast.name);
        while (peek().kind != Token::Kind::rparen) {
            expect_lparen("domain definition");
            const Token& kw = expect_symbol("section keyword");
            std::string k = lower(kw);
            if (k == ":requirements") {
                parse_requirements(ast);
            } else if (k == ":types") {
                parse_types(ast);
            } else if (k == ":constants") {
                parse_typed_list(ast.constants, false);
                expect_rparen();
            } else if (k == ":predicates") {
                parse_predicates(ast);
            } else if (k == ":action") {
                parse_action(ast);
            } else {
                fail(kw, "domain definition expected");
            }
        }
        expect_rparen();
        expect_file_end();
    }

    void parse_requirements(DomainAst& ast) {
        while (peek().kind == Token::Kind::symbol) {
            const Token& req = advance();
            std::string r = lower(req);
            if (!supported_requirements().count(r)) fail(req, "supported requirement expected");
            ast.requirements.insert(r.substr(1));
        }
        expect_rparen();
    }

    void parse_types(DomainAst& ast) {
        std::vector<TypedName> entries;
        parse_typed_list(entries, false);
        expect_rparen();
        for (const auto& e : entries) {
            type_decls_.push_back(e);
            if (e.name == "object")
                error_at({Token::Kind::symbol, e.spelling, e.line}, "cannot retype 'object'",
                         DiagCategory::typing);
            auto it = ast.types.find(e.name);
            if (it != ast.types.end() && it->second != e.type_name)
                error_at({Token::Kind::symbol, e.spelling, e.line},
                         "each parameter can only be assigned a single type", DiagCategory::typing);
            else
                ast.types[e.name] = e.type_name;
            // a parent mentioned only on the right is implicitly a type
            if (e.type_name != "object" && !ast.types.count(e.type_name))
                ast.types[e.type_name] = "object";
        }
    }

    void parse_predicates(DomainAst& ast) {
        while (peek().kind != Token::Kind::rparen) {
            expect_lparen("predicate declaration");
            const Token& name = expect_symbol("predicate name");
            if (name.text[0] == ':' || name.text[0] == '?') fail(name, "predicate name expected");
            PredicateDecl decl;
            decl.name = lower(name);
            decl.line = name.line;
            decl.spelling = name.text;
            parse_typed_list(decl.parameters, true);
            expect_rparen();
            ast.predicates.push_back(std::move(decl));
        }
        expect_rparen();
    }

    void parse_action(DomainAst& ast) {
        const Token& name = expect_symbol("action name");
        if (name.text[0] == ':' || name.text[0] == '?') fail(name, "action name expected");
        ActionSchema action;
        action.name = lower(name);
        action.line = name.line;
        action.spelling = name.text;
        bool saw_precondition = false, saw_effect = false;
        while (peek().kind != Token::Kind::rparen) {
            const Token& kw = expect_symbol("action keyword");
            std::string k = lower(kw);
            if (k == ":parameters") {
                expect_lparen("parameter list");
                parse_typed_list(action.parameters, true);
                expect_rparen();
            } else if (k == ":precondition") {
                if (saw_precondition) fail(kw, "duplicate ':precondition' section");
                saw_precondition = true;
                action.precondition = parse_formula();
            } else if (k == ":effect" || k == ":effects") {
                if (k == ":effects") {
                    if (opts_.strict) fail(kw, "domain definition expected");
                    warn_at(kw, "nonstandard keyword, ':effect' assumed", DiagCategory::structure);
                }
                if (saw_effect) fail(kw, "duplicate ':effect' section");
                saw_effect = true;
                action.effect = parse_formula();
            } else {
                fail(kw, "domain definition expected");
            }
        }
        expect_rparen();
        ast.actions.push_back(std::move(action));
    }

    void validate_domain(DomainAst& ast) {
        std::set<std::string> seen;
        for (const auto& p : ast.predicates) {
            if (!seen.insert(p.name).second)
                error_at({Token::Kind::symbol, p.spelling, p.line}, "duplicate predicate name",
                         DiagCategory::naming);
            check_parameters(p.parameters, ast);
        }
        seen.clear();
        for (const auto& c : ast.constants) {
            if (!seen.insert(c.name).second)
                error_at({Token::Kind::symbol, c.spelling, c.line}, "duplicate constant name",
                         DiagCategory::naming);
            check_type_exists(c.type_name, c.line, c.spelling, ast);
        }
        check_type_acyclic(ast);
        seen.clear();
        for (const auto& a : ast.actions) {
            if (!seen.insert(a.name).second)
                error_at({Token::Kind::symbol, a.spelling, a.line}, "duplicate action name",
                         DiagCategory::naming);
            check_parameters(a.parameters, ast);
            check_action_formula(a, a.precondition, ast);
            check_action_formula(a, a.effect, ast);
        }
    }

    void check_parameters(const std::vector<TypedVariable>& params, const DomainAst& ast) {
        std::set<std::string> names;
        for (const auto& v : params) {
            if (!names.insert(v.name).second)
                error_at({Token::Kind::symbol, v.spelling, v.line}, "duplicate parameter name",
                         DiagCategory::naming);
            check_type_exists(v.type_name, v.line, v.spelling, ast);
        }
    }

    void check_type_exists(const std::string& type_name, int line, const std::string& spelling,
                           const DomainAst& ast) {
        if (type_name != "object" && !ast.types.count(type_name))
            error_at({Token::Kind::symbol, spelling, line}, "undeclared type '" + type_name + "'",
                     DiagCategory::typing);
    }

    void check_type_acyclic(DomainAst& ast) {
        std::set<std::string> reported;
        for (const auto& decl : type_decls_) {
            std::set<std::string> path;
            std::string cur = decl.name;
            while (cur != "object") {
                if (!path.insert(cur).second) {
                    if (reported.insert(decl.name).second)
                        error_at({Token::Kind::symbol, decl.spelling, decl.line},
                                 "cyclic type hierarchy involving '" + decl.name + "'",
                                 DiagCategory::typing);
                    break;
                }
                auto it = ast.types.find(cur);
                if (it == ast.types.end()) break;
                cur = it->second;
            }
        }
    }

    void check_action_formula(const ActionSchema& action, const Formula& f, const DomainAst& ast) {
        std::set<std::string> param_names;
        for (const auto& p : action.parameters) param_names.insert(p.name);
        std::set<std::string> constant_names;
        for (const auto& c : ast.constants) constant_names.insert(c.name);
        for (const auto& lit : f.literals) {
            const Atom& atom = lit.atom;
            const PredicateDecl* decl = ast.find_predicate(atom.pred);
            if (!decl) {
                error_at({Token::Kind::symbol, atom.spelling, atom.line},
                         "undeclared predicate '" + atom.pred + "'", DiagCategory::naming);
            } else if (decl->arity() != static_cast<int>(atom.args.size())) {
                error_at({Token::Kind::symbol, atom.spelling, atom.line},
                         "predicate '" + atom.pred + "' expects " + std::to_string(decl->arity()) +
                             " arguments",
                         DiagCategory::arity);
            }
            for (const auto& term : atom.args) {
                if (term.is_variable()) {
                    if (!param_names.count(term.value))
                        error_at({Token::Kind::symbol, term.spelling, term.line},
                                 "variable not declared in :parameters", DiagCategory::naming);
                } else if (!constant_names.count(term.value)) {
                    error_at({Token::Kind::symbol, term.spelling, term.line},
                             "undeclared constant '" + term.value + "'", DiagCategory::naming);
                }
            }
        }
    }

    // --- problem ----------------------------------------------------------

    void parse_problem_structure(ProblemAst& ast) {
        parse_define_header("'problem'", ast.name);
        bool saw_domain = false, saw_init = false, saw_goal = false;
        while (peek().kind != Token::Kind::rparen) {
            expect_lparen("problem definition");
            const Token& kw = expect_symbol("section keyword");
            std::string k = lower(kw);
            if (k == ":domain") {
                const Token& nm = expect_symbol("domain name");
                if (nm.text[0] == ':' || nm.text[0] == '?') fail(nm, "domain name expected");
                ast.domain_name = lower(nm);
                ast.domain_name_line = nm.line;
                ast.domain_name_spelling = nm.text;
                saw_domain = true;
                expect_rparen();
            } else if (k == ":objects") {
                parse_typed_list(ast.objects, false);
                expect_rparen();
            } else if (k == ":init") {
                saw_init = true;
                while (peek().kind != Token::Kind::rparen) {
                    expect_lparen("atom");
                    const Token& head = peek();
                    if (head.kind == Token::Kind::symbol && lower(head) == "not")
                        fail(head, "atom expected");
                    ast.init.push_back(parse_atom_body());
                }
                expect_rparen();
            } else if (k == ":goal") {
                saw_goal = true;
                if (peek().kind == Token::Kind::rparen) fail(peek(), "goal formula expected");
                ast.goal_line = kw.line;
                ast.goal = parse_formula();
                expect_rparen();
            } else if (k == ":requirements") {
                // tolerated and discarded; validators ignore it in problems
                while (peek().kind == Token::Kind::symbol) advance();
                expect_rparen();
            } else {
                fail(kw, "problem definition expected");
            }
        }
        const Token& closing = expect_rparen();
        expect_file_end();
        if (!saw_domain)
            error_at({Token::Kind::rparen, closing.text, closing.line}, "missing :domain",
                     DiagCategory::structure);
        if (!saw_init)
            error_at({Token::Kind::rparen, closing.text, closing.line}, "missing :init",
                     DiagCategory::structure);
        if (!saw_goal)
            error_at({Token::Kind::rparen, closing.text, closing.line}, "missing :goal",
                     DiagCategory::structure);
    }

    void validate_problem(ProblemAst& ast) {
        std::set<std::string> seen;
        for (const auto& o : ast.objects) {
            if (!seen.insert(o.name).second)
                error_at({Token::Kind::symbol, o.spelling, o.line}, "duplicate object name",
                         DiagCategory::naming);
        }
        for (const auto& atom : ast.init) {
            for (const auto& term : atom.args) {
                if (term.is_variable())
                    error_at({Token::Kind::symbol, term.spelling, term.line}, "constant expected",
                             DiagCategory::structure);
            }
        }
        for (const auto& lit : ast.goal.literals) {
            for (const auto& term : lit.atom.args) {
                if (term.is_variable())
                    error_at({Token::Kind::symbol, term.spelling, term.line}, "constant expected",
                             DiagCategory::structure);
            }
        }
    }
};

} // namespace detail

inline ParseResult<DomainAst> parse_domain(const SourceFile& src, ParseOptions opts = {}) {
    detail::Parser parser(src, opts);
    return parser.run_domain();
}

inline ParseResult<ProblemAst> parse_problem(const SourceFile& src, ParseOptions opts = {}) {
    detail::Parser parser(src, opts);
    return parser.run_problem();
}

inline ParseResult<DomainAst> parse_domain_text(const std::string& text, ParseOptions opts = {}) {
    return parse_domain(SourceFile(FileKind::DF, text), opts);
}

inline ParseResult<ProblemAst> parse_problem_text(const std::string& text, ParseOptions opts = {}) {
    return parse_problem(SourceFile(FileKind::PF, text), opts);
}

} // namespace pddlkit::syntax
