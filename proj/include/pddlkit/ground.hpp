#pragma once

// Grounding: one GroundAction per type-consistent substitution of each
// schema's parameters over objects and constants. Ordering is deterministic:
// schemas in declaration order, argument tuples lexicographic. Effects
// normalize to the add-after-delete convention, so an atom both deleted and
// added survives and add_set ∩ delete_set = ∅.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pddlkit/ast.hpp"
#include "pddlkit/errors.hpp"
#include "pddlkit/state.hpp"

namespace pddlkit::semantics {

struct GroundAction {
    std::string schema_name;
    std::vector<std::string> args;
    std::set<GroundAtom> precondition_pos;
    std::set<GroundAtom> precondition_neg;
    std::set<GroundAtom> add_set;
    std::set<GroundAtom> delete_set;
};

inline std::string to_string(const GroundAction& a) {
    std::string out = "(" + a.schema_name;
    for (const auto& arg : a.args) out += " " + arg;
    return out + ")";
}

constexpr std::size_t kDefaultGroundingCap = 5'000'000;

namespace detail {

inline GroundAtom substitute(const syntax::Atom& atom,
                             const std::map<std::string, std::string>& binding) {
    GroundAtom g;
    g.predicate = atom.pred;
    g.args.reserve(atom.args.size());
    for (const auto& term : atom.args) {
        if (term.is_variable())
            g.args.push_back(binding.at(term.value));
        else
            g.args.push_back(term.value);
    }
    return g;
}

inline GroundAction instantiate(const syntax::ActionSchema& schema,
                                const std::vector<std::string>& args) {
    std::map<std::string, std::string> binding;
    for (std::size_t i = 0; i < schema.parameters.size(); ++i)
        binding[schema.parameters[i].name] = args[i];
    GroundAction action;
    action.schema_name = schema.name;
    action.args = args;
    for (const auto& lit : schema.precondition.literals) {
        (lit.negated ? action.precondition_neg : action.precondition_pos)
            .insert(substitute(lit.atom, binding));
    }
    for (const auto& lit : schema.effect.literals) {
        (lit.negated ? action.delete_set : action.add_set).insert(substitute(lit.atom, binding));
    }
    for (const auto& added : action.add_set) action.delete_set.erase(added);
    return action;
}

// objects usable for a parameter of `type_name`, sorted by name
inline std::vector<std::string> candidates_for(
    const syntax::DomainAst& d, const std::vector<std::pair<std::string, std::string>>& universe,
    const std::string& type_name) {
    std::vector<std::string> out;
    for (const auto& [name, type] : universe)
        if (syntax::type_conforms(d, type, type_name)) out.push_back(name);
    return out;
}

} // namespace detail

inline std::vector<GroundAction> ground(const syntax::DomainAst& domain,
                                        const syntax::ProblemAst& problem,
                                        std::size_t cap = kDefaultGroundingCap) {
    // constants first, problem objects after; sorted once so every candidate
    // list comes out lexicographic
    std::vector<std::pair<std::string, std::string>> universe;
    for (const auto& c : domain.constants) universe.emplace_back(c.name, c.type_name);
    for (const auto& o : problem.objects) universe.emplace_back(o.name, o.type_name);
    std::sort(universe.begin(), universe.end());
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());

    // size check before materializing anything
    std::size_t total = 0;
    std::vector<std::vector<std::vector<std::string>>> per_schema_candidates;
    for (const auto& schema : domain.actions) {
        std::vector<std::vector<std::string>> lists;
        std::size_t count = 1;
        for (const auto& param : schema.parameters) {
            lists.push_back(detail::candidates_for(domain, universe, param.type_name));
            std::size_t n = lists.back().size();
            if (n == 0) {
                count = 0;
                break;
            }
            if (count > cap / n) {
                throw CapacityError("grounding exceeds cap of " + std::to_string(cap) +
                                    " actions");
            }
            count *= n;
        }
        total += count;
        if (total > cap)
            throw CapacityError("grounding exceeds cap of " + std::to_string(cap) + " actions");
        per_schema_candidates.push_back(std::move(lists));
    }

    std::vector<GroundAction> actions;
    actions.reserve(total);
    for (std::size_t si = 0; si < domain.actions.size(); ++si) {
        const auto& schema = domain.actions[si];
        const auto& lists = per_schema_candidates[si];
        std::size_t arity = schema.parameters.size();
        if (arity == 0) {
            actions.push_back(detail::instantiate(schema, {}));
            continue;
        }
        bool empty = false;
        for (const auto& l : lists)
            if (l.empty()) empty = true;
        if (empty || lists.size() != arity) continue;
        // odometer over candidate lists, rightmost position fastest
        std::vector<std::size_t> idx(arity, 0);
        while (true) {
            std::vector<std::string> args(arity);
            for (std::size_t i = 0; i < arity; ++i) args[i] = lists[i][idx[i]];
            actions.push_back(detail::instantiate(schema, args));
            std::size_t pos = arity;
            while (pos > 0) {
                --pos;
                if (++idx[pos] < lists[pos].size()) break;
                idx[pos] = 0;
                if (pos == 0) goto schema_done;
            }
        }
    schema_done:;
    }
    return actions;
}

inline bool applicable(const State& s, const GroundAction& a) {
    for (const auto& atom : a.precondition_pos)
        if (!s.contains(atom)) return false;
    for (const auto& atom : a.precondition_neg)
        if (s.contains(atom)) return false;
    return true;
}

inline State apply(const State& s, const GroundAction& a) {
    if (!applicable(s, a))
        throw std::logic_error("apply called on inapplicable action " + to_string(a));
    State result = s;
    for (const auto& atom : a.delete_set) result.atoms.erase(atom);
    for (const auto& atom : a.add_set) result.atoms.insert(atom);
    return result;
}

} // namespace pddlkit::semantics
