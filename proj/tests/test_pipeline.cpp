// The method variants and the iterative correction loop: branch selection
// per feedback kind, retrieval and localization bookkeeping, modular
// generation, and trace serialization.

#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "bw_oracle.hpp"
#include "helpers.hpp"
#include "pddlkit/pddlkit.hpp"

using namespace pddlkit;
using namespace pddlkit::pipeline;
using gateway::LlmClient;
using gateway::replay_provider;
using planning::SolveStatus;

namespace {

using Script = std::map<std::string, std::vector<std::string>>;

const char* kGoodDf =
    "(define (domain tinydom)\n"
    "  (:requirements :strips)\n"
    "  (:predicates (p) (q))\n"
    "  (:action step\n"
    "    :parameters ()\n"
    "    :precondition (p)\n"
    "    :effect (and (q) (not (p)))))";

const char* kGoodPf =
    "(define (problem tiny-1)\n"
    "  (:domain tinydom)\n"
    "  (:init (p))\n"
    "  (:goal (and (q))))";

// parses and lints cleanly but the goal is unreachable
const char* kStuckDf =
    "(define (domain stuckdom)\n"
    "  (:requirements :strips)\n"
    "  (:predicates (p) (q))\n"
    "  (:action wait\n"
    "    :parameters ()\n"
    "    :precondition (p)\n"
    "    :effect (and (p))))";

const char* kStuckPf =
    "(define (problem stuck-1)\n"
    "  (:domain stuckdom)\n"
    "  (:init (p))\n"
    "  (:goal (and (q))))";

const char* kD1Message =
    "domain: syntax error in line 12, ':PRECONDITIONS': domain definition expected";

std::string both(const std::string& df, const std::string& pf) {
    return "Here are the two files.\n\n```pddl\n" + df + "\n```\n\n```pddl\n" + pf + "\n```\n";
}

TaskInput tiny_task() {
    return {"task-1", "A robot arm flips a switch.", "The switch starts off and must end on."};
}

MethodVariant variant_of(MethodVariant::Generation g, MethodVariant::Refinement r,
                         bool strict = false) {
    MethodVariant v;
    v.generation = g;
    v.refinement = r;
    v.max_rounds = r == MethodVariant::Refinement::none ? 0 : 3;
    v.strict_algorithm = strict;
    return v;
}

const docs::DocCorpus& bundled_corpus() {
    static docs::DocCorpus corpus =
        docs::load_corpus((testutil::data_dir() / "doc_corpus.json").string());
    return corpus;
}

// PF references an object the problem never declares
const char* kBadPf =
    "(define (problem p)\n"
    "  (:domain blocksworld)\n"
    "  (:objects b1)\n"
    "  (:init (clear b9))\n"
    "  (:goal (and (clear b1))))";

const char* kFixedPf =
    "(define (problem p)\n"
    "  (:domain blocksworld)\n"
    "  (:objects b1)\n"
    "  (:init (clear b1) (on-table b1) (arm-empty))\n"
    "  (:goal (and (clear b1))))";

} // namespace

TEST_CASE("variant labels round-trip and validate") {
    using G = MethodVariant::Generation;
    using R = MethodVariant::Refinement;

    SECTION("labels join generation and refinement with a plus") {
        CHECK(variant_label(variant_of(G::base, R::none)) == "base+none");
        CHECK(variant_label(variant_of(G::modular_specific_doc, R::code_retrieved)) ==
              "modular+code-retrieved");
        CHECK(variant_label(variant_of(G::once_whole_examples, R::feedback_retrieved)) ==
              "once-whole-examples+feedback-retrieved");
    }
    SECTION("every name parses back to its enumerator") {
        for (G g : {G::base, G::once_whole_doc, G::once_whole_examples,
                    G::once_whole_descriptions, G::modular_specific_doc})
            CHECK(generation_from_string(to_string(g)) == g);
        for (R r : {R::none, R::no_doc, R::feedback_retrieved, R::code_retrieved})
            CHECK(refinement_from_string(to_string(r)) == r);
        CHECK_FALSE(generation_from_string("bogus"));
        CHECK_FALSE(refinement_from_string(""));
    }
    SECTION("max_rounds must agree with the refinement mode") {
        MethodVariant v = variant_of(G::base, R::none);
        v.max_rounds = 1;
        CHECK_THROWS_WITH(validate_variant(v),
                          "max_rounds must be 0 exactly when refinement is none");
        v = variant_of(G::base, R::no_doc);
        v.max_rounds = 0;
        CHECK_THROWS_WITH(validate_variant(v),
                          "max_rounds must be 0 exactly when refinement is none");
        v.max_rounds = 4;
        CHECK_THROWS_WITH(validate_variant(v), "max_rounds must be within [0, 3]");
        v.max_rounds = -1;
        CHECK_THROWS_AS(validate_variant(v), ConfigError);
    }
    SECTION("variants that consult documentation require a corpus") {
        auto client_provider = replay_provider({});
        LlmClient client(client_provider);
        CHECK_NOTHROW(Pipeline(variant_of(G::base, R::none), nullptr, client));
        CHECK_NOTHROW(Pipeline(variant_of(G::base, R::no_doc), nullptr, client));
        CHECK_THROWS_WITH(Pipeline(variant_of(G::once_whole_doc, R::none), nullptr, client),
                          "variant 'once-whole-doc+none' requires a corpus");
        CHECK_THROWS_WITH(
            Pipeline(variant_of(G::base, R::feedback_retrieved), nullptr, client),
            "variant 'base+feedback-retrieved' requires a corpus");
        CHECK_THROWS_AS(Pipeline(variant_of(G::base, R::code_retrieved), nullptr, client),
                        ConfigError);
    }
}

TEST_CASE("make_pair records which sides parse") {
    auto pair = pipeline::make_pair(kGoodDf, kGoodPf);
    CHECK(pair.df_ast.has_value());
    CHECK(pair.pf_ast.has_value());
    auto broken = pipeline::make_pair("(define (domain d)", kGoodPf);
    CHECK_FALSE(broken.df_ast.has_value());
    CHECK(broken.pf_ast.has_value());
}

TEST_CASE("PDDL blocks extract from free-form model output") {
    using syntax::extract_pddl_blocks;
    SECTION("fenced blocks of both kinds are found") {
        auto extracted = extract_pddl_blocks(both(kGoodDf, kGoodPf));
        REQUIRE(extracted.df_text);
        REQUIRE(extracted.pf_text);
        CHECK(*extracted.df_text == kGoodDf);
        CHECK(*extracted.pf_text == kGoodPf);
    }
    SECTION("the last block of a kind supersedes earlier drafts") {
        auto extracted = extract_pddl_blocks("(define (domain first))\n(define (domain second))");
        REQUIRE(extracted.df_text);
        CHECK(*extracted.df_text == "(define (domain second))");
    }
    SECTION("a missing kind stays unset") {
        auto extracted = extract_pddl_blocks("only prose, no files");
        CHECK_FALSE(extracted.df_text);
        CHECK_FALSE(extracted.pf_text);
    }
    SECTION("an unbalanced define is skipped") {
        auto extracted = extract_pddl_blocks("(define (domain broken)\nno closer");
        CHECK_FALSE(extracted.df_text);
    }
    SECTION("words that merely start with domain do not match") {
        auto extracted = extract_pddl_blocks("(define (domainx y))");
        CHECK_FALSE(extracted.df_text);
    }
}

TEST_CASE("fence stripping keeps the inner snippet") {
    using pipeline::detail::strip_fences;
    CHECK(strip_fences("```pddl\n(:action go)\n```") == "(:action go)");
    CHECK(strip_fences("  ```\n  ```") == "");
    CHECK(strip_fences("\n\n(a)\n(b)\n\n") == "(a)\n(b)");
    CHECK(strip_fences("keep\n   ```lisp\nand this\n```\ntail") == "keep\nand this\ntail");
}

TEST_CASE("the base variant generates once and stops on success") {
    auto provider = std::make_shared<gateway::ReplayProvider>(
        Script{{"base", {both(kGoodDf, kGoodPf)}}});
    LlmClient client(provider);
    Pipeline pipe(variant_of(MethodVariant::Generation::base, MethodVariant::Refinement::none),
                  nullptr, client);
    auto trace = pipe.run_task(tiny_task());

    REQUIRE(trace.rounds.size() == 1);
    const RoundRecord& round0 = trace.rounds[0];
    CHECK(round0.round == 0);
    CHECK(round0.prompt_tags == std::vector<std::string>{"base"});
    CHECK_FALSE(round0.generation_failure);
    CHECK(round0.pair_after.df_text == kGoodDf);
    CHECK(round0.pair_after.df_ast.has_value());
    CHECK(round0.feedback.status == SolveStatus::success);
    REQUIRE(round0.feedback.plan);
    CHECK(round0.feedback.plan->steps.size() == 1);

    auto captured = provider->captured_requests();
    REQUIRE(captured.size() == 1);
    CHECK(captured[0].tag == "base");
    CHECK(captured[0].messages[0].content.find("A robot arm flips a switch.") !=
          std::string::npos);
    CHECK(captured[0].messages[0].content.find("The switch starts off and must end on.") !=
          std::string::npos);
}

TEST_CASE("whole-doc variants bind the selected corpus view") {
    const auto& corpus = bundled_corpus();
    struct Case {
        MethodVariant::Generation generation;
        docs::ViewMode mode;
    };
    auto pick = GENERATE(
        Case{MethodVariant::Generation::once_whole_doc, docs::ViewMode::whole},
        Case{MethodVariant::Generation::once_whole_examples, docs::ViewMode::examples_only},
        Case{MethodVariant::Generation::once_whole_descriptions,
             docs::ViewMode::descriptions_only});

    auto provider = std::make_shared<gateway::ReplayProvider>(
        Script{{"whole-doc", {both(kGoodDf, kGoodPf)}}});
    LlmClient client(provider);
    Pipeline pipe(variant_of(pick.generation, MethodVariant::Refinement::none), &corpus, client);
    auto trace = pipe.run_task(tiny_task());

    CHECK(trace.rounds[0].prompt_tags == std::vector<std::string>{"whole-doc"});
    CHECK(trace.rounds[0].feedback.status == SolveStatus::success);
    auto captured = provider->captured_requests();
    REQUIRE(captured.size() == 1);
    CHECK(captured[0].tag == "whole-doc");
    CHECK(captured[0].messages[0].content.find(docs::view(corpus, pick.mode)) !=
          std::string::npos);
}

TEST_CASE("modular generation walks the six components and threads partials") {
    const auto& corpus = bundled_corpus();
    auto provider = std::make_shared<gateway::ReplayProvider>(Script{
        {"modular-types", {"```\n(define (domain tinydom) (:types))\n```"}},
        {"modular-predicates", {"```\n(define (domain tinydom) (:predicates (p) (q)))\n```"}},
        {"modular-actions", {"```\n" + std::string(kGoodDf) + "\n```"}},
        {"modular-objects", {"```\n(define (problem tiny-1) (:domain tinydom))\n```"}},
        {"modular-init", {"```\n(define (problem tiny-1) (:domain tinydom) (:init (p)))\n```"}},
        {"modular-goal", {"```\n" + std::string(kGoodPf) + "\n```"}}});
    LlmClient client(provider);
    Pipeline pipe(variant_of(MethodVariant::Generation::modular_specific_doc,
                             MethodVariant::Refinement::none),
                  &corpus, client);
    auto trace = pipe.run_task(tiny_task());

    REQUIRE(trace.rounds.size() == 1);
    CHECK(trace.rounds[0].prompt_tags ==
          std::vector<std::string>{"modular-types", "modular-predicates", "modular-actions",
                                   "modular-objects", "modular-init", "modular-goal"});
    CHECK(trace.rounds[0].pair_after.df_text == kGoodDf);
    CHECK(trace.rounds[0].pair_after.pf_text == kGoodPf);
    CHECK(trace.rounds[0].feedback.status == SolveStatus::success);

    auto captured = provider->captured_requests();
    REQUIRE(captured.size() == 6);
    // each stage sees the partial files accumulated so far
    CHECK(captured[1].tag == "modular-predicates");
    CHECK(captured[1].messages[0].content.find("(define (domain tinydom) (:types))") !=
          std::string::npos);
    CHECK(captured[2].messages[0].content.find("(:predicates (p) (q))") != std::string::npos);
    CHECK(captured[3].messages[0].content.find(kGoodDf) != std::string::npos);
    CHECK(captured[5].tag == "modular-goal");
    CHECK(captured[5].messages[0].content.find("(:init (p))") != std::string::npos);
    // each stage sees its own component's documentation card
    CHECK(captured[0].messages[0].content.find("type_name: Types") != std::string::npos);
    CHECK(captured[4].messages[0].content.find("type_name: InitialState") != std::string::npos);
}

TEST_CASE("a domain syntax error under code retrieval localizes, retrieves, and refines") {
    const auto& corpus = bundled_corpus();
    std::string bad_df = testutil::fixture("d1_bad_domain.pddl");
    std::string pf = testutil::fixture("d1_problem.pddl");
    std::string snippet = "(:action clean\n  :parameters (?x))";
    auto provider = std::make_shared<gateway::ReplayProvider>(Script{
        {"base", {both(bad_df, pf)}},
        {"localize", {"```\n" + snippet + "\n```"}},
        {"refine-round-1", {both(kGoodDf, kGoodPf)}}});
    LlmClient client(provider);
    Pipeline pipe(variant_of(MethodVariant::Generation::base,
                             MethodVariant::Refinement::code_retrieved),
                  &corpus, client);
    auto trace = pipe.run_task(tiny_task());

    REQUIRE(trace.rounds.size() == 2);
    const RoundRecord& round0 = trace.rounds[0];
    CHECK(round0.feedback.status == SolveStatus::syntax_error);
    REQUIRE(round0.feedback.file);
    CHECK(*round0.feedback.file == FileKind::DF);
    CHECK(round0.feedback.message == kD1Message);

    const RoundRecord& round1 = trace.rounds[1];
    CHECK(round1.prompt_tags == std::vector<std::string>{"localize", "refine-round-1"});
    REQUIRE(round1.localization);
    CHECK(round1.localization->snippet == snippet);
    CHECK(round1.localization->offending_token == ":PRECONDITIONS");
    CHECK(round1.retrieval_query == snippet + " :PRECONDITIONS");
    CHECK(round1.retrieved.size() == 1);
    CHECK(round1.pair_before.df_text == bad_df.substr(0, bad_df.rfind(')') + 1));
    CHECK(round1.feedback.status == SolveStatus::success);

    auto captured = provider->captured_requests();
    REQUIRE(captured.size() == 3);
    CHECK(captured[1].tag == "localize");
    CHECK(captured[1].messages[0].content.find(kD1Message) != std::string::npos);
    const std::string& refine_prompt = captured[2].messages[0].content;
    CHECK(refine_prompt.find("Offending code:") != std::string::npos);
    CHECK(refine_prompt.find(snippet) != std::string::npos);
    CHECK(refine_prompt.find("Relevant documentation:") != std::string::npos);
    CHECK(refine_prompt.find("type_name: ") != std::string::npos);
}

TEST_CASE("a problem syntax error under code retrieval refines without documentation") {
    const auto& corpus = bundled_corpus();
    std::string bw = oracle::bw_domain_text();
    auto provider = std::make_shared<gateway::ReplayProvider>(Script{
        {"base", {both(bw, kBadPf)}}, {"refine-round-1", {both(bw, kFixedPf)}}});
    LlmClient client(provider);
    Pipeline pipe(variant_of(MethodVariant::Generation::base,
                             MethodVariant::Refinement::code_retrieved),
                  &corpus, client);
    auto trace = pipe.run_task(tiny_task());

    REQUIRE(trace.rounds.size() == 2);
    REQUIRE(trace.rounds[0].feedback.file);
    CHECK(*trace.rounds[0].feedback.file == FileKind::PF);
    const RoundRecord& round1 = trace.rounds[1];
    CHECK(round1.prompt_tags == std::vector<std::string>{"refine-round-1"});
    CHECK_FALSE(round1.localization);
    CHECK_FALSE(round1.retrieval_query);
    CHECK(round1.retrieved.empty());
    CHECK(round1.feedback.status == SolveStatus::success);

    const std::string& prompt = provider->captured_requests()[1].messages[0].content;
    CHECK(prompt.find("Offending code:") == std::string::npos);
    CHECK(prompt.find("Relevant documentation:") == std::string::npos);
    CHECK(prompt.find("undeclared object 'b9'") != std::string::npos);
}

TEST_CASE("a syntax error under feedback retrieval queries with the message") {
    const auto& corpus = bundled_corpus();
    std::string bad_df = testutil::fixture("d1_bad_domain.pddl");
    std::string pf = testutil::fixture("d1_problem.pddl");
    auto provider = std::make_shared<gateway::ReplayProvider>(Script{
        {"base", {both(bad_df, pf)}}, {"refine-round-1", {both(kGoodDf, kGoodPf)}}});
    LlmClient client(provider);
    Pipeline pipe(variant_of(MethodVariant::Generation::base,
                             MethodVariant::Refinement::feedback_retrieved),
                  &corpus, client);
    auto trace = pipe.run_task(tiny_task());

    REQUIRE(trace.rounds.size() == 2);
    const RoundRecord& round1 = trace.rounds[1];
    CHECK(round1.prompt_tags == std::vector<std::string>{"refine-round-1"});
    CHECK_FALSE(round1.localization);
    CHECK(round1.retrieval_query == kD1Message);
    REQUIRE(round1.retrieved.size() == 1);
    const docs::DocSection* top = corpus.find_by_id(round1.retrieved[0].section_id);
    REQUIRE(top != nullptr);
    CHECK(top->type_name == "Actions");
    CHECK(round1.feedback.status == SolveStatus::success);

    const std::string& prompt = provider->captured_requests()[1].messages[0].content;
    CHECK(prompt.find("Offending code:") == std::string::npos);
    CHECK(prompt.find("Relevant documentation:") != std::string::npos);
    CHECK(prompt.find("type_name: Actions") != std::string::npos);
}

TEST_CASE("feedback retrieval on problem errors depends on strictness") {
    const auto& corpus = bundled_corpus();
    std::string bw = oracle::bw_domain_text();
    Script script{{"base", {both(bw, kBadPf)}}, {"refine-round-1", {both(bw, kFixedPf)}}};

    SECTION("by default a problem-file message is still a usable query") {
        auto provider = std::make_shared<gateway::ReplayProvider>(script);
        LlmClient client(provider);
        Pipeline pipe(variant_of(MethodVariant::Generation::base,
                                 MethodVariant::Refinement::feedback_retrieved),
                      &corpus, client);
        auto trace = pipe.run_task(tiny_task());
        REQUIRE(trace.rounds.size() == 2);
        CHECK(trace.rounds[1].retrieval_query ==
              "problem: syntax error in line 4, 'B9': undeclared object 'b9'");
        CHECK(trace.rounds[1].retrieved.size() == 1);
        CHECK(provider->captured_requests()[1].messages[0].content.find(
                  "Relevant documentation:") != std::string::npos);
    }
    SECTION("under the strict algorithm only domain errors retrieve") {
        auto provider = std::make_shared<gateway::ReplayProvider>(script);
        LlmClient client(provider);
        Pipeline pipe(variant_of(MethodVariant::Generation::base,
                                 MethodVariant::Refinement::feedback_retrieved,
                                 /*strict=*/true),
                      &corpus, client);
        auto trace = pipe.run_task(tiny_task());
        REQUIRE(trace.rounds.size() == 2);
        CHECK_FALSE(trace.rounds[1].retrieval_query);
        CHECK(trace.rounds[1].retrieved.empty());
        CHECK(provider->captured_requests()[1].messages[0].content.find(
                  "Relevant documentation:") == std::string::npos);
        CHECK(trace.rounds[1].feedback.status == SolveStatus::success);
    }
}

TEST_CASE("semantic errors refine without retrieval even when retrieval is enabled") {
    const auto& corpus = bundled_corpus();
    auto provider = std::make_shared<gateway::ReplayProvider>(Script{
        {"base", {both(kStuckDf, kStuckPf)}}, {"refine-round-1", {both(kGoodDf, kGoodPf)}}});
    LlmClient client(provider);
    Pipeline pipe(variant_of(MethodVariant::Generation::base,
                             MethodVariant::Refinement::feedback_retrieved),
                  &corpus, client);
    auto trace = pipe.run_task(tiny_task());

    REQUIRE(trace.rounds.size() == 2);
    CHECK(trace.rounds[0].feedback.status == SolveStatus::semantic_error);
    CHECK_FALSE(trace.rounds[0].feedback.file);
    CHECK(trace.rounds[0].feedback.message == "no plan found");
    CHECK_FALSE(trace.rounds[1].retrieval_query);
    const std::string& prompt = provider->captured_requests()[1].messages[0].content;
    CHECK(prompt.find("no plan found") != std::string::npos);
    CHECK(prompt.find("Relevant documentation:") == std::string::npos);
    CHECK(trace.rounds[1].feedback.status == SolveStatus::success);
}

TEST_CASE("a timeout ends the loop without refinement") {
    std::string big =
        "(define (problem stuck6)\n  (:domain blocksworld)\n"
        "  (:objects b1 b2 b3 b4 b5 b6)\n"
        "  (:init (arm-empty) (on-table b1) (clear b1) (on-table b2) (clear b2)"
        " (on-table b3) (clear b3) (on-table b4) (clear b4)"
        " (on-table b5) (clear b5) (on-table b6) (clear b6))\n"
        "  (:goal (and (on b1 b1))))";
    auto provider = std::make_shared<gateway::ReplayProvider>(
        Script{{"base", {both(oracle::bw_domain_text(), big)}}});
    LlmClient client(provider);
    planning::PlannerConfig cfg;
    cfg.timeout_seconds = 0.0;
    Pipeline pipe(
        variant_of(MethodVariant::Generation::base, MethodVariant::Refinement::no_doc),
        nullptr, client, cfg);
    auto trace = pipe.run_task(tiny_task());

    // no refinement script exists, so reaching a refinement would throw
    REQUIRE(trace.rounds.size() == 1);
    CHECK(trace.rounds[0].feedback.status == SolveStatus::timeout);
    CHECK(trace.rounds[0].feedback.message == "builtin planner timed out after 0.000000s");
}

TEST_CASE("a refinement with no extractable files keeps the previous pair") {
    std::string bad_df = testutil::fixture("d1_bad_domain.pddl");
    std::string pf = testutil::fixture("d1_problem.pddl");
    auto useless = GENERATE(std::string("Sorry, I cannot produce PDDL right now."),
                            std::string("```\n(define (domain only-a-domain))\n```"));
    auto provider = std::make_shared<gateway::ReplayProvider>(Script{
        {"base", {both(bad_df, pf)}},
        {"refine-round-1", {useless}},
        {"refine-round-2", {both(kGoodDf, kGoodPf)}}});
    LlmClient client(provider);
    Pipeline pipe(
        variant_of(MethodVariant::Generation::base, MethodVariant::Refinement::no_doc),
        nullptr, client);
    auto trace = pipe.run_task(tiny_task());

    REQUIRE(trace.rounds.size() == 3);
    const RoundRecord& round1 = trace.rounds[1];
    CHECK(round1.failed_refinement);
    CHECK(round1.pair_after.df_text == round1.pair_before.df_text);
    CHECK(round1.feedback.message == kD1Message);  // the retained pair re-solves the same
    const RoundRecord& round2 = trace.rounds[2];
    CHECK_FALSE(round2.failed_refinement);
    CHECK(round2.prompt_tags == std::vector<std::string>{"refine-round-2"});
    CHECK(round2.feedback.status == SolveStatus::success);
}

TEST_CASE("the loop exhausts max_rounds when feedback never improves") {
    std::string bad_df = testutil::fixture("d1_bad_domain.pddl");
    std::string pf = testutil::fixture("d1_problem.pddl");
    std::string response = both(bad_df, pf);
    auto provider = std::make_shared<gateway::ReplayProvider>(Script{
        {"base", {response}},
        {"refine-round-1", {response}},
        {"refine-round-2", {response}},
        {"refine-round-3", {response}}});
    LlmClient client(provider);
    Pipeline pipe(
        variant_of(MethodVariant::Generation::base, MethodVariant::Refinement::no_doc),
        nullptr, client);
    auto trace = pipe.run_task(tiny_task());

    REQUIRE(trace.rounds.size() == 4);
    for (const RoundRecord& round : trace.rounds) {
        CHECK(round.feedback.status == SolveStatus::syntax_error);
        CHECK_FALSE(round.failed_refinement);
    }
    CHECK(trace.final_round().round == 3);
    CHECK(provider->captured_requests().size() == 4);
}

TEST_CASE("an empty generation is flagged and still enters the loop") {
    auto provider = std::make_shared<gateway::ReplayProvider>(Script{
        {"base", {"I refuse to write any files."}},
        {"refine-round-1", {both(kGoodDf, kGoodPf)}}});
    LlmClient client(provider);
    Pipeline pipe(
        variant_of(MethodVariant::Generation::base, MethodVariant::Refinement::no_doc),
        nullptr, client);
    auto trace = pipe.run_task(tiny_task());

    REQUIRE(trace.rounds.size() == 2);
    CHECK(trace.rounds[0].generation_failure);
    CHECK(trace.rounds[0].pair_after.df_text.empty());
    CHECK(trace.rounds[0].feedback.status == SolveStatus::syntax_error);
    REQUIRE(trace.rounds[0].feedback.file);
    CHECK(*trace.rounds[0].feedback.file == FileKind::DF);
    CHECK(trace.rounds[1].feedback.status == SolveStatus::success);
}

TEST_CASE("inconsistent or conclusive feedback cannot be refined") {
    auto provider = replay_provider({});
    LlmClient client(provider);
    Pipeline pipe(
        variant_of(MethodVariant::Generation::base, MethodVariant::Refinement::no_doc),
        nullptr, client);
    auto pair = pipeline::make_pair(kGoodDf, kGoodPf);
    RoundRecord record;
    record.round = 1;

    planning::SolverFeedback feedback;
    feedback.status = SolveStatus::syntax_error;
    feedback.message = "somewhere, something";
    CHECK_THROWS_WITH(pipe.refine_once(pair, feedback, record),
                      "syntax_error feedback without a file attribution");
    CHECK_THROWS_AS(pipe.refine_once(pair, feedback, record), UnknownErrorTypeError);

    feedback.status = SolveStatus::semantic_error;
    feedback.file = FileKind::DF;
    CHECK_THROWS_WITH(pipe.refine_once(pair, feedback, record),
                      "semantic_error feedback with a file attribution");

    feedback.file.reset();
    feedback.status = SolveStatus::success;
    CHECK_THROWS_WITH(pipe.refine_once(pair, feedback, record),
                      "refine_once called on status 'success'");
    feedback.status = SolveStatus::timeout;
    CHECK_THROWS_WITH(pipe.refine_once(pair, feedback, record),
                      "refine_once called on status 'timeout'");
}

TEST_CASE("an empty localization falls back to the feedback message") {
    const auto& corpus = bundled_corpus();
    std::string bad_df = testutil::fixture("d1_bad_domain.pddl");
    auto provider = std::make_shared<gateway::ReplayProvider>(Script{
        {"localize", {"```\n```"}}, {"refine-round-1", {both(kGoodDf, kGoodPf)}}});
    LlmClient client(provider);
    Pipeline pipe(variant_of(MethodVariant::Generation::base,
                             MethodVariant::Refinement::code_retrieved),
                  &corpus, client);

    planning::SolverFeedback feedback;
    feedback.status = SolveStatus::syntax_error;
    feedback.file = FileKind::DF;
    feedback.message = kD1Message;
    feedback.line = 12;
    feedback.token = ":PRECONDITIONS";
    RoundRecord record;
    record.round = 1;
    auto refined = pipe.refine_once(pipeline::make_pair(bad_df, kGoodPf), feedback, record);

    REQUIRE(record.localization);
    CHECK(record.localization->snippet == kD1Message);
    CHECK(record.retrieval_query == std::string(kD1Message) + " :PRECONDITIONS");
    CHECK(refined.df_text == kGoodDf);
}

TEST_CASE("an unavailable embedder falls back to lexical retrieval") {
    const auto& corpus = bundled_corpus();
    std::string bad_df = testutil::fixture("d1_bad_domain.pddl");
    std::string pf = testutil::fixture("d1_problem.pddl");
    auto provider = std::make_shared<gateway::ReplayProvider>(Script{
        {"base", {both(bad_df, pf)}}, {"refine-round-1", {both(kGoodDf, kGoodPf)}}});
    LlmClient client(provider);
    retrieval::RetrieverConfig retriever;
    retriever.kind = retrieval::RetrieverConfig::Kind::embedding;
    Pipeline pipe(variant_of(MethodVariant::Generation::base,
                             MethodVariant::Refinement::feedback_retrieved),
                  &corpus, client, {}, retriever);
    auto trace = pipe.run_task(tiny_task());

    REQUIRE(trace.rounds.size() == 2);
    const RoundRecord& round1 = trace.rounds[1];
    CHECK(round1.retrieval_fallback);
    REQUIRE(round1.retrieved.size() == 1);
    const docs::DocSection* top = corpus.find_by_id(round1.retrieved[0].section_id);
    REQUIRE(top != nullptr);
    CHECK(top->type_name == "Actions");
    CHECK(round1.feedback.status == SolveStatus::success);
}

TEST_CASE("traces serialize every round without timing details") {
    const auto& corpus = bundled_corpus();
    std::string bad_df = testutil::fixture("d1_bad_domain.pddl");
    std::string pf = testutil::fixture("d1_problem.pddl");
    std::string snippet = "(:action clean\n  :parameters (?x))";
    auto provider = std::make_shared<gateway::ReplayProvider>(Script{
        {"base", {both(bad_df, pf)}},
        {"localize", {snippet}},
        {"refine-round-1", {both(kGoodDf, kGoodPf)}}});
    LlmClient client(provider);
    Pipeline pipe(variant_of(MethodVariant::Generation::base,
                             MethodVariant::Refinement::code_retrieved),
                  &corpus, client);
    auto trace = pipe.run_task(tiny_task());
    auto j = trace_to_json(trace);

    CHECK(j["task_id"] == "task-1");
    CHECK(j["variant"]["generation"] == "base");
    CHECK(j["variant"]["refinement"] == "code-retrieved");
    CHECK(j["variant"]["max_rounds"] == 3);
    CHECK(j["variant"]["strict_algorithm"] == false);
    REQUIRE(j["rounds"].size() == 2);

    const auto& r0 = j["rounds"][0];
    CHECK(r0["round"] == 0);
    CHECK(r0["pair_before"]["df_text"] == "");
    CHECK(r0["pair_after"]["df_parses"] == false);
    CHECK(r0["feedback"]["status"] == "syntax_error");
    CHECK(r0["feedback"]["file"] == "domain");
    CHECK(r0["feedback"]["line"] == 12);
    CHECK(r0["feedback"]["token"] == ":PRECONDITIONS");
    CHECK_FALSE(r0["feedback"].contains("plan"));
    CHECK_FALSE(r0.contains("retrieval_query"));
    CHECK(r0["prompt_tags"] == nlohmann::ordered_json::array({"base"}));

    const auto& r1 = j["rounds"][1];
    CHECK(r1["pair_after"]["df_parses"] == true);
    CHECK(r1["feedback"]["status"] == "success");
    CHECK(r1["feedback"]["file"] == "none");
    REQUIRE(r1["feedback"].contains("plan"));
    CHECK(r1["feedback"]["plan"] == nlohmann::ordered_json::array({"(step)"}));
    CHECK(r1["retrieval_query"] == snippet + " :PRECONDITIONS");
    REQUIRE(r1["retrieved"].size() == 1);
    CHECK(r1["retrieved"][0].contains("section_id"));
    CHECK(r1["retrieved"][0].contains("score"));
    CHECK(r1["localization"]["snippet"] == snippet);
    CHECK(r1["localization"]["offending_token"] == ":PRECONDITIONS");

    CHECK(j.dump().find("latency") == std::string::npos);
}
