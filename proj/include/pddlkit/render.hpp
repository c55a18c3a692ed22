#pragma once

// Canonical pretty-printer. Output is deterministic (sections in fixed
// order, types sorted by name) and reparses to a structurally equal AST.
// Types equal to "object" are left implicit, matching classic untyped
// domain listings.

#include <sstream>
#include <string>

#include "pddlkit/ast.hpp"

namespace pddlkit::syntax {

namespace detail {

inline void render_term_list(std::ostringstream& out, const std::vector<Term>& terms) {
    for (const auto& t : terms) out << ' ' << t.value;
}

inline void render_atom(std::ostringstream& out, const Atom& atom) {
    out << '(' << atom.pred;
    render_term_list(out, atom.args);
    out << ')';
}

inline void render_literal(std::ostringstream& out, const Literal& lit) {
    if (lit.negated) {
        out << "(not ";
        render_atom(out, lit.atom);
        out << ')';
    } else {
        render_atom(out, lit.atom);
    }
}

inline void render_formula(std::ostringstream& out, const Formula& f) {
    if (f.is_conjunction) {
        out << "(and";
        for (const auto& lit : f.literals) {
            out << ' ';
            render_literal(out, lit);
        }
        out << ')';
    } else {
        render_literal(out, f.literals.front());
    }
}

template <typename TypedEntry>
inline void render_typed_list(std::ostringstream& out, const std::vector<TypedEntry>& entries) {
    // emit "- type" once per run of equally typed entries; "object" stays
    // implicit only on the final run, otherwise it would absorb the run into
    // the following one's type on reparse
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i > 0) out << ' ';
        out << entries[i].name;
        bool run_end = i + 1 == entries.size() || entries[i + 1].type_name != entries[i].type_name;
        bool final_run = i + 1 == entries.size();
        if (run_end && (entries[i].type_name != "object" || !final_run))
            out << " - " << entries[i].type_name;
    }
}

} // namespace detail

inline std::string render_domain(const DomainAst& ast) {
    std::ostringstream out;
    out << "(define (domain " << ast.name << ")\n";
    if (!ast.requirements.empty()) {
        out << "  (:requirements";
        for (const auto& r : ast.requirements) out << " :" << r;
        out << ")\n";
    }
    if (!ast.types.empty()) {
        out << "  (:types";
        for (const auto& [child, parent] : ast.types) {
            // parent kept explicit: an implicit entry would be absorbed into
            // the next line's "- parent" on reparse
            out << "\n    " << child << " - " << parent;
        }
        out << ")\n";
    }
    if (!ast.constants.empty()) {
        out << "  (:constants ";
        detail::render_typed_list(out, ast.constants);
        out << ")\n";
    }
    if (!ast.predicates.empty()) {
        out << "  (:predicates";
        for (const auto& p : ast.predicates) {
            out << "\n    (" << p.name;
            if (!p.parameters.empty()) {
                out << ' ';
                detail::render_typed_list(out, p.parameters);
            }
            out << ')';
        }
        out << ")\n";
    }
    for (const auto& a : ast.actions) {
        out << "  (:action " << a.name << "\n";
        out << "    :parameters (";
        detail::render_typed_list(out, a.parameters);
        out << ")\n";
        out << "    :precondition ";
        detail::render_formula(out, a.precondition);
        out << "\n    :effect ";
        detail::render_formula(out, a.effect);
        out << ")\n";
    }
    out << ")\n";
    return out.str();
}

inline std::string render_problem(const ProblemAst& ast) {
    std::ostringstream out;
    out << "(define (problem " << ast.name << ")\n";
    out << "  (:domain " << ast.domain_name << ")\n";
    if (!ast.objects.empty()) {
        out << "  (:objects ";
        detail::render_typed_list(out, ast.objects);
        out << ")\n";
    }
    out << "  (:init";
    for (const auto& atom : ast.init) {
        out << ' ';
        detail::render_atom(out, atom);
    }
    out << ")\n";
    out << "  (:goal ";
    detail::render_formula(out, ast.goal);
    out << ")\n";
    out << ")\n";
    return out.str();
}

} // namespace pddlkit::syntax
