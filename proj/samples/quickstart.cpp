// Quickstart: one scripted pass through the formalize-check-refine loop.
//
// A replay provider stands in for the LLM: its first answer contains the
// classic ':PRECONDITIONS' typo, the planner reports the diagnostic, the
// pipeline localizes the offending snippet, retrieves the matching corpus
// section, and the scripted refinement answer repairs the domain. The final
// round plans and validates.

#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pddlkit/pddlkit.hpp"

using namespace pddlkit;

namespace {

const char* kBuggyDf = R"((define (domain minibw)
  (:requirements :strips)
  (:predicates (clear ?x) (on-table ?x) (holding ?x) (arm-empty) (on ?x ?y))
  (:action pickup
    :parameters (?x)
    :PRECONDITIONS (and (clear ?x) (on-table ?x) (arm-empty))
    :effect (and (holding ?x) (not (clear ?x)) (not (on-table ?x)) (not (arm-empty))))
  (:action stack
    :parameters (?x ?y)
    :precondition (and (holding ?x) (clear ?y))
    :effect (and (on ?x ?y) (clear ?x) (arm-empty) (not (holding ?x)) (not (clear ?y))))))";

const char* kFixedDf = R"((define (domain minibw)
  (:requirements :strips)
  (:predicates (clear ?x) (on-table ?x) (holding ?x) (arm-empty) (on ?x ?y))
  (:action pickup
    :parameters (?x)
    :precondition (and (clear ?x) (on-table ?x) (arm-empty))
    :effect (and (holding ?x) (not (clear ?x)) (not (on-table ?x)) (not (arm-empty))))
  (:action stack
    :parameters (?x ?y)
    :precondition (and (holding ?x) (clear ?y))
    :effect (and (on ?x ?y) (clear ?x) (arm-empty) (not (holding ?x)) (not (clear ?y))))))";

const char* kPf = R"((define (problem mini-1)
  (:domain minibw)
  (:objects a b)
  (:init (clear a) (on-table a) (clear b) (on-table b) (arm-empty))
  (:goal (and (on a b)))))";

std::string fenced(const std::string& df, const std::string& pf) {
    return "```pddl\n" + df + "\n```\n```pddl\n" + pf + "\n```\n";
}

} // namespace

int main() {
    docs::DocCorpus corpus =
        docs::load_corpus(std::string(PDDLKIT_DATA_DIR) + "/doc_corpus.json");

    auto provider = std::make_shared<gateway::ReplayProvider>(
        std::map<std::string, std::vector<std::string>>{
            {"base", {fenced(kBuggyDf, kPf)}},
            {"localize", {"(:action pickup\n  :PRECONDITIONS (and (clear ?x)))"}},
            {"refine-round-1", {fenced(kFixedDf, kPf)}}});
    gateway::LlmClient client(provider);

    pipeline::MethodVariant variant;
    variant.generation = pipeline::MethodVariant::Generation::base;
    variant.refinement = pipeline::MethodVariant::Refinement::code_retrieved;
    variant.max_rounds = 3;

    pipeline::Pipeline pipe(variant, &corpus, client);
    pipeline::PipelineTrace trace = pipe.run_task(
        {"quickstart", "Two blocks, a and b, sit on a table; a robot arm is free.",
         "Block a must end up stacked on block b."});

    for (const auto& round : trace.rounds) {
        std::cout << "round " << round.round << ": "
                  << planning::to_string(round.feedback.status);
        if (!round.feedback.ok()) std::cout << " — " << round.feedback.message;
        std::cout << "\n";
        for (const auto& hit : round.retrieved) {
            const docs::DocSection* section = corpus.find_by_id(hit.section_id);
            std::cout << "  retrieved: " << (section ? section->type_name : hit.section_id)
                      << "\n";
        }
    }

    const auto& final_round = trace.final_round();
    if (!final_round.feedback.ok()) {
        std::cout << "pipeline did not converge\n";
        return 1;
    }
    std::cout << "plan:\n" << planning::render_plan(*final_round.feedback.plan);

    auto df = syntax::parse_domain_text(final_round.pair_after.df_text);
    auto pf = syntax::parse_problem_text(final_round.pair_after.pf_text);
    auto verdict = semantics::validate_plan(*df.ast, *pf.ast, *final_round.feedback.plan);
    std::cout << "verdict: " << semantics::to_string(verdict.status) << "\n";
    return verdict.valid() ? 0 : 1;
}
