#pragma once

// Ground atoms and closed-world states. GroundAtom orders by (predicate,
// args) so sets iterate deterministically; absence from a State means false.

#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "pddlkit/ast.hpp"

namespace pddlkit::semantics {

struct GroundAtom {
    std::string predicate;
    std::vector<std::string> args;

    friend bool operator==(const GroundAtom& a, const GroundAtom& b) {
        return a.predicate == b.predicate && a.args == b.args;
    }
    friend bool operator!=(const GroundAtom& a, const GroundAtom& b) { return !(a == b); }
    friend bool operator<(const GroundAtom& a, const GroundAtom& b) {
        return std::tie(a.predicate, a.args) < std::tie(b.predicate, b.args);
    }
};

inline std::string to_string(const GroundAtom& atom) {
    std::string out = "(" + atom.predicate;
    for (const auto& a : atom.args) out += " " + a;
    return out + ")";
}

struct State {
    std::set<GroundAtom> atoms;

    bool contains(const GroundAtom& atom) const { return atoms.count(atom) > 0; }

    friend bool operator==(const State& a, const State& b) { return a.atoms == b.atoms; }
    friend bool operator!=(const State& a, const State& b) { return !(a == b); }
    friend bool operator<(const State& a, const State& b) { return a.atoms < b.atoms; }
};

inline GroundAtom ground_atom_from(const syntax::Atom& atom) {
    GroundAtom g;
    g.predicate = atom.pred;
    g.args.reserve(atom.args.size());
    for (const auto& t : atom.args) g.args.push_back(t.value);
    return g;
}

inline State initial_state(const syntax::ProblemAst& problem) {
    State s;
    for (const auto& atom : problem.init) s.atoms.insert(ground_atom_from(atom));
    return s;
}

} // namespace pddlkit::semantics
