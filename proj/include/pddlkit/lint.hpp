#pragma once

// Cross-file checks a solver performs before search: the domain reference,
// object typing, and every init/goal atom resolved against declarations.
// An empty result marks the pair solver-ready. Negated conditions used
// without :negative-preconditions are reported at warning level so that
// legacy files stay solver-ready while the omission is still visible.

#include <map>
#include <string>
#include <vector>

#include "pddlkit/ast.hpp"
#include "pddlkit/source.hpp"

namespace pddlkit::syntax {

namespace detail {

inline void lint_ground_atom(const DomainAst& d, const Atom& atom,
                             const std::map<std::string, std::string>& object_types,
                             std::vector<Diagnostic>& out) {
    const PredicateDecl* decl = d.find_predicate(atom.pred);
    if (!decl) {
        out.push_back({FileKind::PF, atom.line, atom.spelling,
                       "undeclared predicate '" + atom.pred + "'", DiagCategory::naming,
                       Severity::error});
        return;
    }
    if (decl->arity() != static_cast<int>(atom.args.size())) {
        out.push_back({FileKind::PF, atom.line, atom.spelling,
                       "predicate '" + atom.pred + "' expects " +
                           std::to_string(decl->arity()) + " arguments",
                       DiagCategory::arity, Severity::error});
        return;
    }
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
        const Term& term = atom.args[i];
        auto it = object_types.find(term.value);
        if (it == object_types.end()) {
            out.push_back({FileKind::PF, term.line, term.spelling,
                           "undeclared object '" + term.value + "'", DiagCategory::naming,
                           Severity::error});
            continue;
        }
        const std::string& expected = decl->parameters[i].type_name;
        if (!type_conforms(d, it->second, expected)) {
            out.push_back({FileKind::PF, term.line, term.spelling,
                           "object '" + term.value + "' has type '" + it->second +
                               "', expected '" + expected + "'",
                           DiagCategory::typing, Severity::error});
        }
    }
}

} // namespace detail

inline std::vector<Diagnostic> lint_pair(const DomainAst& d, const ProblemAst& p) {
    std::vector<Diagnostic> out;

    if (p.domain_name != d.name) {
        out.push_back({FileKind::PF, p.domain_name_line, p.domain_name_spelling,
                       "domain name mismatch: expected '" + d.name + "'", DiagCategory::naming,
                       Severity::error});
    }

    std::map<std::string, std::string> object_types;
    for (const auto& c : d.constants) object_types[c.name] = c.type_name;
    for (const auto& o : p.objects) {
        if (o.type_name != "object" && !d.types.count(o.type_name)) {
            out.push_back({FileKind::PF, o.line, o.spelling,
                           "undeclared type '" + o.type_name + "'", DiagCategory::typing,
                           Severity::error});
        }
        object_types[o.name] = o.type_name;
    }

    for (const auto& atom : p.init) detail::lint_ground_atom(d, atom, object_types, out);
    for (const auto& lit : p.goal.literals)
        detail::lint_ground_atom(d, lit.atom, object_types, out);

    bool negation_allowed = d.requirements.count("negative-preconditions") > 0;
    if (!negation_allowed) {
        for (const auto& a : d.actions) {
            for (const auto& lit : a.precondition.literals) {
                if (lit.negated) {
                    out.push_back({FileKind::DF, lit.atom.line, lit.atom.spelling,
                                   "negated precondition without :negative-preconditions",
                                   DiagCategory::structure, Severity::warning});
                }
            }
        }
        for (const auto& lit : p.goal.literals) {
            if (lit.negated) {
                out.push_back({FileKind::PF, lit.atom.line, lit.atom.spelling,
                               "negated goal without :negative-preconditions",
                               DiagCategory::structure, Severity::warning});
            }
        }
    }

    return out;
}

} // namespace pddlkit::syntax
