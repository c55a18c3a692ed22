#pragma once

// ASTs for the STRIPS+typing subset. Names are normalized to lower case;
// each named occurrence keeps its source line and original spelling so
// later passes can attribute diagnostics. Equality is structural and
// ignores source locations.

#include <map>
#include <set>
#include <string>
#include <vector>

namespace pddlkit::syntax {

/// One term of an atom: a variable (leading '?') or an object/constant name.
struct Term {
    std::string value;     // normalized (lower case)
    int line = 0;
    std::string spelling;  // as written

    bool is_variable() const { return !value.empty() && value[0] == '?'; }

    friend bool operator==(const Term& a, const Term& b) { return a.value == b.value; }
    friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }
};

struct Atom {
    std::string pred;      // normalized
    std::vector<Term> args;
    int line = 0;
    std::string spelling;  // predicate name as written

    bool is_ground() const {
        for (const auto& t : args)
            if (t.is_variable()) return false;
        return true;
    }

    friend bool operator==(const Atom& a, const Atom& b) {
        return a.pred == b.pred && a.args == b.args;
    }
    friend bool operator!=(const Atom& a, const Atom& b) { return !(a == b); }
};

struct Literal {
    Atom atom;
    bool negated = false;

    friend bool operator==(const Literal& a, const Literal& b) {
        return a.negated == b.negated && a.atom == b.atom;
    }
    friend bool operator!=(const Literal& a, const Literal& b) { return !(a == b); }
};

/// A precondition/effect/goal formula. The grammar only admits a single
/// literal or a conjunction of literals; `is_conjunction` distinguishes a
/// bare literal from an explicit (and ...) so rendering round-trips.
struct Formula {
    bool is_conjunction = true;
    std::vector<Literal> literals;

    friend bool operator==(const Formula& a, const Formula& b) {
        return a.is_conjunction == b.is_conjunction && a.literals == b.literals;
    }
    friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }
};

/// Parameter of a predicate or action; name keeps the leading '?'.
struct TypedVariable {
    std::string name;                  // e.g. "?b", normalized
    std::string type_name = "object";  // normalized
    int line = 0;
    std::string spelling;

    friend bool operator==(const TypedVariable& a, const TypedVariable& b) {
        return a.name == b.name && a.type_name == b.type_name;
    }
    friend bool operator!=(const TypedVariable& a, const TypedVariable& b) { return !(a == b); }
};

/// A typed constant or object declaration.
struct TypedName {
    std::string name;
    std::string type_name = "object";
    int line = 0;
    std::string spelling;

    friend bool operator==(const TypedName& a, const TypedName& b) {
        return a.name == b.name && a.type_name == b.type_name;
    }
    friend bool operator!=(const TypedName& a, const TypedName& b) { return !(a == b); }
};

struct PredicateDecl {
    std::string name;
    std::vector<TypedVariable> parameters;
    int line = 0;
    std::string spelling;

    int arity() const { return static_cast<int>(parameters.size()); }

    friend bool operator==(const PredicateDecl& a, const PredicateDecl& b) {
        return a.name == b.name && a.parameters == b.parameters;
    }
    friend bool operator!=(const PredicateDecl& a, const PredicateDecl& b) { return !(a == b); }
};

struct ActionSchema {
    std::string name;
    std::vector<TypedVariable> parameters;
    Formula precondition;  // conjunction of literals
    Formula effect;        // conjunction of literals
    int line = 0;
    std::string spelling;

    friend bool operator==(const ActionSchema& a, const ActionSchema& b) {
        return a.name == b.name && a.parameters == b.parameters &&
               a.precondition == b.precondition && a.effect == b.effect;
    }
    friend bool operator!=(const ActionSchema& a, const ActionSchema& b) { return !(a == b); }
};

struct DomainAst {
    std::string name;
    std::set<std::string> requirements;           // without the leading ':'
    std::map<std::string, std::string> types;     // child -> parent, root "object"
    std::vector<TypedName> constants;
    std::vector<PredicateDecl> predicates;
    std::vector<ActionSchema> actions;

    const PredicateDecl* find_predicate(const std::string& n) const {
        for (const auto& p : predicates)
            if (p.name == n) return &p;
        return nullptr;
    }
    const ActionSchema* find_action(const std::string& n) const {
        for (const auto& a : actions)
            if (a.name == n) return &a;
        return nullptr;
    }

    friend bool operator==(const DomainAst& a, const DomainAst& b) {
        return a.name == b.name && a.requirements == b.requirements && a.types == b.types &&
               a.constants == b.constants && a.predicates == b.predicates && a.actions == b.actions;
    }
    friend bool operator!=(const DomainAst& a, const DomainAst& b) { return !(a == b); }
};

struct ProblemAst {
    std::string name;
    std::string domain_name;
    int domain_name_line = 0;
    std::string domain_name_spelling;
    std::vector<TypedName> objects;
    std::vector<Atom> init;
    Formula goal;
    int goal_line = 0;

    friend bool operator==(const ProblemAst& a, const ProblemAst& b) {
        return a.name == b.name && a.domain_name == b.domain_name && a.objects == b.objects &&
               a.init == b.init && a.goal == b.goal;
    }
    friend bool operator!=(const ProblemAst& a, const ProblemAst& b) { return !(a == b); }
};

/// true when `actual` equals `expected` or is a (transitive) subtype of it.
/// Every type conforms to "object". Guarded against malformed cyclic maps.
inline bool type_conforms(const DomainAst& d, const std::string& actual,
                          const std::string& expected) {
    if (expected == "object") return true;
    std::string cur = actual;
    std::set<std::string> visited;
    while (visited.insert(cur).second) {
        if (cur == expected) return true;
        auto it = d.types.find(cur);
        if (it == d.types.end()) return false;
        cur = it->second;
    }
    return false;
}

} // namespace pddlkit::syntax
