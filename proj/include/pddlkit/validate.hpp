#pragma once

// VAL-style plan validation: simulate the plan from the initial state and
// check the goal on the final state. Malformed steps (unknown schema, wrong
// arity, unknown or ill-typed argument) are validation errors, not verdicts;
// they are raised as PlanBindingError. failing_step is 1-based.

#include <map>
#include <optional>
#include <string>

#include "pddlkit/ast.hpp"
#include "pddlkit/errors.hpp"
#include "pddlkit/ground.hpp"
#include "pddlkit/plan.hpp"
#include "pddlkit/state.hpp"

namespace pddlkit::semantics {

struct PlanVerdict {
    enum class Status { valid, precondition_failure, goal_unsatisfied };

    Status status = Status::valid;
    std::optional<int> failing_step;     // 1-based, precondition_failure only
    std::optional<GroundAtom> witness;   // unsatisfied literal / violated goal atom

    bool valid() const { return status == Status::valid; }
};

inline std::string to_string(PlanVerdict::Status s) {
    switch (s) {
        case PlanVerdict::Status::valid: return "valid";
        case PlanVerdict::Status::precondition_failure: return "precondition_failure";
        case PlanVerdict::Status::goal_unsatisfied: return "goal_unsatisfied";
    }
    return "valid";
}

inline PlanVerdict validate_plan(const syntax::DomainAst& domain,
                                 const syntax::ProblemAst& problem,
                                 const planning::Plan& plan) {
    std::map<std::string, std::string> object_types;
    for (const auto& c : domain.constants) object_types[c.name] = c.type_name;
    for (const auto& o : problem.objects) object_types[o.name] = o.type_name;

    State state = initial_state(problem);

    int index = 0;
    for (const auto& step : plan.steps) {
        ++index;
        const syntax::ActionSchema* schema = domain.find_action(step.name);
        if (!schema)
            throw PlanBindingError("step " + std::to_string(index) + ": unknown action '" +
                                   step.name + "'");
        if (schema->parameters.size() != step.args.size())
            throw PlanBindingError("step " + std::to_string(index) + ": action '" + step.name +
                                   "' expects " + std::to_string(schema->parameters.size()) +
                                   " arguments, got " + std::to_string(step.args.size()));
        for (std::size_t i = 0; i < step.args.size(); ++i) {
            auto it = object_types.find(step.args[i]);
            if (it == object_types.end())
                throw PlanBindingError("step " + std::to_string(index) + ": unknown object '" +
                                       step.args[i] + "'");
            if (!syntax::type_conforms(domain, it->second, schema->parameters[i].type_name))
                throw PlanBindingError("step " + std::to_string(index) + ": object '" +
                                       step.args[i] + "' does not conform to type '" +
                                       schema->parameters[i].type_name + "'");
        }
        GroundAction action = detail::instantiate(*schema, step.args);
        if (!applicable(state, action)) {
            PlanVerdict verdict;
            verdict.status = PlanVerdict::Status::precondition_failure;
            verdict.failing_step = index;
            for (const auto& atom : action.precondition_pos) {
                if (!state.contains(atom)) {
                    verdict.witness = atom;
                    break;
                }
            }
            if (!verdict.witness) {
                for (const auto& atom : action.precondition_neg) {
                    if (state.contains(atom)) {
                        verdict.witness = atom;
                        break;
                    }
                }
            }
            return verdict;
        }
        state = apply(state, action);
    }

    for (const auto& lit : problem.goal.literals) {
        GroundAtom atom = ground_atom_from(lit.atom);
        bool holds = state.contains(atom);
        if (holds == lit.negated) {
            PlanVerdict verdict;
            verdict.status = PlanVerdict::Status::goal_unsatisfied;
            verdict.witness = atom;
            return verdict;
        }
    }
    return PlanVerdict{};
}

} // namespace pddlkit::semantics
