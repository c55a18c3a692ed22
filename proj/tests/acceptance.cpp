// Acceptance checks. Each criterion prints exactly one [PASS]/[FAIL] line
// with its measured runtime and pinned budget; the exit code is the number
// of failed criteria. Oracles (naive simulator, iterative deepening, Okapi
// reference) are independent implementations shared with the unit suites.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bm25_reference.hpp"
#include "bw_oracle.hpp"
#include "helpers.hpp"
#include "pddlkit/pddlkit.hpp"

using namespace pddlkit;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome fail(std::string detail) { return {false, std::move(detail)}; }
Outcome pass(std::string detail) { return {true, std::move(detail)}; }

// --- shared fixtures ------------------------------------------------------

const char* kTinyDf =
    "(define (domain tinydom)\n"
    "  (:requirements :strips)\n"
    "  (:predicates (p) (q))\n"
    "  (:action step\n"
    "    :parameters ()\n"
    "    :precondition (p)\n"
    "    :effect (and (q) (not (p)))))";

const char* kTinyPf =
    "(define (problem tiny-1)\n"
    "  (:domain tinydom)\n"
    "  (:init (p))\n"
    "  (:goal (and (q))))";

const char* kStuckDf =
    "(define (domain stuckdom)\n"
    "  (:requirements :strips)\n"
    "  (:predicates (p) (q))\n"
    "  (:action wait :parameters () :precondition (p) :effect (and (p))))";

const char* kStuckPf =
    "(define (problem stuck-1)\n  (:domain stuckdom)\n  (:init (p))\n  (:goal (and (q))))";

const char* kD1Message =
    "domain: syntax error in line 12, ':PRECONDITIONS': domain definition expected";

std::string wrap_both(const std::string& df, const std::string& pf) {
    return "```pddl\n" + df + "\n```\n```pddl\n" + pf + "\n```\n";
}

pipeline::MethodVariant refined_variant(pipeline::MethodVariant::Refinement r) {
    pipeline::MethodVariant v;
    v.refinement = r;
    v.max_rounds = 3;
    return v;
}

// --- criterion 1: the d1/d2 error-listing fixtures ------------------------

Outcome check_parser_fixtures() {
    auto d1 = syntax::parse_domain_text(testutil::fixture("d1_bad_domain.pddl"));
    if (d1.ok() || d1.diagnostics.empty()) return fail("D.1 listing parsed without error");
    if (format_diagnostic(d1.diagnostics.front()) != kD1Message)
        return fail("D.1 diagnostic was: " + format_diagnostic(d1.diagnostics.front()));

    auto d2 = syntax::parse_domain_text(testutil::fixture("d2_bad_domain.pddl"));
    if (d2.ok() || d2.diagnostics.empty()) return fail("D.2 listing parsed without error");
    const Diagnostic& diag = d2.diagnostics.front();
    if (format_diagnostic(diag) !=
        "domain: syntax error in line 14, '(': each parameter can only be assigned a single type")
        return fail("D.2 diagnostic was: " + format_diagnostic(diag));
    if (diag.category != DiagCategory::typing) return fail("D.2 diagnostic is not typing");

    auto d1_fixed = syntax::parse_domain_text(testutil::fixture("d1_fixed_domain.pddl"));
    auto d1_pf = syntax::parse_problem_text(testutil::fixture("d1_problem.pddl"));
    if (!d1_fixed.ok() || !d1_pf.ok()) return fail("corrected D.1 listing does not parse");
    for (const auto& d : syntax::lint_pair(*d1_fixed.ast, *d1_pf.ast))
        if (d.severity == Severity::error)
            return fail("corrected D.1 listing does not lint: " + format_diagnostic(d));
    auto d2_fixed = syntax::parse_domain_text(testutil::fixture("d2_fixed_domain.pddl"));
    if (!d2_fixed.ok()) return fail("corrected D.2 listing does not parse");
    return pass("D.1 (:PRECONDITIONS) and D.2 (single-type) diagnostics match; "
                "corrected listings clean");
}

// --- criterion 2: gold acceptance -----------------------------------------

Outcome check_gold_acceptance() {
    auto bw = harness::load_dataset((testutil::data_dir() / "blocksworld").string());
    if (bw.size() < 20)
        return fail("expected >= 20 blocksworld tasks, found " + std::to_string(bw.size()));
    auto lg = harness::load_dataset((testutil::data_dir() / "logistics").string());
    auto cv = harness::load_dataset((testutil::data_dir() / "curve_demo").string());
    std::size_t total = bw.size() + lg.size() + cv.size();
    return pass(std::to_string(total) + " gold pairs parse and lint clean (" +
                std::to_string(bw.size()) + " blocksworld)");
}

// --- criterion 3: validator vs naive simulator ----------------------------

Outcome check_validator_oracle() {
    auto parsed = syntax::parse_domain_text(oracle::bw_domain_text());
    if (!parsed.ok()) return fail("oracle domain does not parse");
    const syntax::DomainAst& domain = *parsed.ast;

    std::mt19937 rng(987501);
    std::uniform_int_distribution<int> blocks_dist(1, 4);
    int agreements = 0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial) {
        int n = blocks_dist(rng);
        auto pf = syntax::parse_problem_text(
            oracle::random_bw_problem_text(rng, n, "acc-" + std::to_string(trial)));
        if (!pf.ok()) return fail("random problem does not parse");
        planning::Plan plan = oracle::random_bw_plan(rng, n, 8);

        semantics::PlanVerdict verdict = semantics::validate_plan(domain, *pf.ast, plan);
        oracle::SimVerdict naive = oracle::simulate(domain, *pf.ast, plan);

        bool same = false;
        using Status = semantics::PlanVerdict::Status;
        switch (naive.kind) {
            case oracle::SimVerdict::Kind::valid:
                same = verdict.status == Status::valid;
                break;
            case oracle::SimVerdict::Kind::precondition_failure:
                same = verdict.status == Status::precondition_failure &&
                       verdict.failing_step == naive.failing_step && verdict.witness &&
                       !naive.violated.empty() &&
                       to_string(*verdict.witness) == naive.violated.front();
                break;
            case oracle::SimVerdict::Kind::goal_unsatisfied: {
                same = verdict.status == Status::goal_unsatisfied && verdict.witness;
                if (same) {
                    std::string w = to_string(*verdict.witness);
                    bool found = false;
                    for (const auto& v : naive.violated) found = found || v == w;
                    same = found;
                }
                break;
            }
        }
        if (same) ++agreements;
    }
    if (agreements != trials)
        return fail(std::to_string(agreements) + "/" + std::to_string(trials) + " agreed");
    return pass("100/100 randomized verdicts agree with the naive simulator "
                "(<=4 blocks, plans <=8 steps)");
}

// --- criterion 4: builtin planner optimality ------------------------------

Outcome check_builtin_planner() {
    auto tasks = harness::load_dataset((testutil::data_dir() / "blocksworld").string());
    int solved = 0;
    for (const auto& task : tasks) {
        planning::SolverFeedback fb = planning::solve(task.gold_df_text, task.gold_pf_text);
        if (!fb.ok() || !fb.plan) return fail(task.task_id + ": no plan returned");

        auto df = syntax::parse_domain_text(task.gold_df_text);
        auto pf = syntax::parse_problem_text(task.gold_pf_text);
        auto verdict = semantics::validate_plan(*df.ast, *pf.ast, *fb.plan);
        if (!verdict.valid())
            return fail(task.task_id + ": plan invalid on gold files (" +
                        to_string(verdict.status) + ")");

        int length = static_cast<int>(fb.plan->steps.size());
        std::optional<int> optimal = oracle::iddfs_optimal_length(*df.ast, *pf.ast, length);
        if (!optimal || *optimal != length)
            return fail(task.task_id + ": got length " + std::to_string(length) +
                        ", iterative deepening found " +
                        (optimal ? std::to_string(*optimal) : std::string("none")));
        ++solved;
    }
    return pass(std::to_string(solved) + "/20 tasks solved; every plan validates on gold "
                "and matches the iterative-deepening length");
}

// --- criterion 5: retrieval fixtures --------------------------------------

Outcome check_retrieval() {
    docs::DocCorpus corpus =
        docs::load_corpus((testutil::data_dir() / "doc_corpus.json").string());
    retrieval::RetrieverConfig cfg;
    cfg.top_k = 1;
    retrieval::Bm25Index index(corpus, cfg);

    auto d1 = syntax::parse_domain_text(testutil::fixture("d1_bad_domain.pddl"));
    auto hits1 = retrieval::retrieve(index, format_diagnostic(d1.diagnostics.front()), cfg);
    if (hits1.empty() || hits1[0].section_id != "actions")
        return fail("D.1 query did not rank Actions first");
    auto d2 = syntax::parse_domain_text(testutil::fixture("d2_bad_domain.pddl"));
    auto hits2 = retrieval::retrieve(index, format_diagnostic(d2.diagnostics.front()), cfg);
    if (hits2.empty() || hits2[0].section_id != "predicates")
        return fail("D.2 query did not rank Predicates first");

    static const std::vector<std::string> vocab = {
        "action", "domain", "predicate", "object", "goal",    "init",
        "type",   "block",  "stack",     "clear",  "problem", "plan"};
    std::mt19937 rng(771203);
    std::uniform_int_distribution<int> n_docs_dist(2, 9);
    std::uniform_int_distribution<int> doc_len_dist(3, 30);
    std::uniform_int_distribution<int> query_len_dist(1, 6);
    std::uniform_int_distribution<std::size_t> word_dist(0, vocab.size() - 1);
    for (int trial = 0; trial < 50; ++trial) {
        docs::DocCorpus random_corpus;
        int n_docs = n_docs_dist(rng);
        for (int d = 0; d < n_docs; ++d) {
            std::string body;
            int len = doc_len_dist(rng);
            for (int w = 0; w < len; ++w) {
                if (!body.empty()) body += " ";
                body += vocab[word_dist(rng)];
            }
            random_corpus.sections.push_back(
                {"sec-" + std::to_string(d),
                 docs::canonical_type_names()[static_cast<std::size_t>(d)], body, {}});
        }
        retrieval::Bm25Index random_index(random_corpus, cfg);
        std::string query;
        int qlen = query_len_dist(rng);
        for (int w = 0; w < qlen; ++w) {
            if (!query.empty()) query += " ";
            query += (w == 0 && trial % 7 == 0) ? "outofvocab" : vocab[word_dist(rng)];
        }
        std::vector<std::vector<std::string>> docs;
        for (const auto& s : random_corpus.sections)
            docs.push_back(retrieval::tokenize(s.type_name + " " + s.description));
        auto expected = testutil::reference_bm25(docs, retrieval::tokenize(query), cfg.k1, cfg.b);
        auto actual = random_index.scores(query);
        if (actual.size() != expected.size()) return fail("score vector size mismatch");
        for (std::size_t i = 0; i < actual.size(); ++i) {
            double tol =
                1e-9 * std::max({1.0, std::fabs(actual[i]), std::fabs(expected[i])});
            if (std::fabs(actual[i] - expected[i]) > tol)
                return fail("trial " + std::to_string(trial) + " doc " + std::to_string(i) +
                            " off by " + std::to_string(actual[i] - expected[i]));
        }
    }
    return pass("D.1 -> Actions and D.2 -> Predicates top-1; 50 randomized corpora match "
                "the Okapi reference within 1e-9 relative");
}

// --- criterion 6: Algorithm 1 conformance ---------------------------------

Outcome check_algorithm_conformance() {
    docs::DocCorpus corpus =
        docs::load_corpus((testutil::data_dir() / "doc_corpus.json").string());
    std::string bad_df = testutil::fixture("d1_bad_domain.pddl");
    std::string d1_pf = testutil::fixture("d1_problem.pddl");
    using Script = std::map<std::string, std::vector<std::string>>;

    {  // (a) the D.1 bug heals in exactly one localize->retrieve->refine round
        auto provider = std::make_shared<gateway::ReplayProvider>(Script{
            {"base", {wrap_both(bad_df, d1_pf)}},
            {"localize", {"(:action mistyped)"}},
            {"refine-round-1", {wrap_both(kTinyDf, kTinyPf)}}});
        gateway::LlmClient client(provider);
        pipeline::Pipeline pipe(
            refined_variant(pipeline::MethodVariant::Refinement::code_retrieved), &corpus,
            client);
        auto trace = pipe.run_task({"acc-a", "dd", "pd"});
        if (trace.rounds.size() != 2) return fail("(a) did not succeed after 1 refinement");
        const auto& round = trace.rounds[1];
        if (round.prompt_tags !=
            std::vector<std::string>{"localize", "refine-round-1"})
            return fail("(a) trace lacks the localize->refine tag order");
        if (!round.retrieval_query || round.retrieved.empty())
            return fail("(a) trace lacks a retrieval step");
        if (round.feedback.status != planning::SolveStatus::success)
            return fail("(a) final round is not a success");
    }
    {  // (b) a PF syntax error under code_retrieved triggers no retrieval
        std::string bad_pf =
            "(define (problem p)\n  (:domain tinydom)\n  (:init (zap))\n"
            "  (:goal (and (q))))";
        auto provider = std::make_shared<gateway::ReplayProvider>(Script{
            {"base", {wrap_both(kTinyDf, bad_pf)}},
            {"refine-round-1", {wrap_both(kTinyDf, kTinyPf)}}});
        gateway::LlmClient client(provider);
        pipeline::Pipeline pipe(
            refined_variant(pipeline::MethodVariant::Refinement::code_retrieved), &corpus,
            client);
        auto trace = pipe.run_task({"acc-b", "dd", "pd"});
        if (trace.rounds.size() != 2 ||
            trace.rounds[0].feedback.file != std::optional<FileKind>(FileKind::PF))
            return fail("(b) setup did not produce a PF syntax error");
        if (trace.rounds[1].retrieval_query || !trace.rounds[1].retrieved.empty() ||
            trace.rounds[1].localization)
            return fail("(b) a PF error retrieved documentation");
    }
    {  // (c) a semantic error refines with the no-doc template
        auto provider = std::make_shared<gateway::ReplayProvider>(Script{
            {"base", {wrap_both(kStuckDf, kStuckPf)}},
            {"refine-round-1", {wrap_both(kTinyDf, kTinyPf)}}});
        gateway::LlmClient client(provider);
        pipeline::Pipeline pipe(
            refined_variant(pipeline::MethodVariant::Refinement::code_retrieved), &corpus,
            client);
        auto trace = pipe.run_task({"acc-c", "dd", "pd"});
        if (trace.rounds.size() != 2 ||
            trace.rounds[0].feedback.status != planning::SolveStatus::semantic_error)
            return fail("(c) setup did not produce a semantic error");
        if (trace.rounds[1].retrieval_query) return fail("(c) a semantic error retrieved");
        std::string prompt = provider->captured_requests().back().messages[0].content;
        if (prompt.find("Relevant documentation:") != std::string::npos)
            return fail("(c) refinement prompt carries documentation");
    }
    {  // (d) a never-fixed bug stops after exactly three refinements
        std::string broken = wrap_both(bad_df, d1_pf);
        auto provider = std::make_shared<gateway::ReplayProvider>(Script{
            {"base", {broken}},
            {"localize", {"(:a)", "(:a)", "(:a)"}},
            {"refine-round-1", {broken}},
            {"refine-round-2", {broken}},
            {"refine-round-3", {broken}}});
        gateway::LlmClient client(provider);
        pipeline::Pipeline pipe(
            refined_variant(pipeline::MethodVariant::Refinement::code_retrieved), &corpus,
            client);
        auto trace = pipe.run_task({"acc-d", "dd", "pd"});
        if (trace.rounds.size() != 4)
            return fail("(d) ran " + std::to_string(trace.rounds.size() - 1) +
                        " refinements, expected 3");
        if (trace.final_round().feedback.status != planning::SolveStatus::syntax_error)
            return fail("(d) final status is not a syntax error");
    }
    return pass("4/4 sub-cases: localize->retrieve->refine on D.1, PF error skips "
                "retrieval, semantic error uses no-doc, 3-round cap holds");
}

// --- criterion 7: metrics constants and the accuracy inequality -----------

harness::RunRecord random_record(std::mt19937& rng) {
    using planning::SolveStatus;
    harness::TaskInstance task;
    task.task_id = "t";
    task.gold_df_text = kTinyDf;
    task.gold_pf_text = kTinyPf;

    pipeline::PipelineTrace trace;
    trace.task_id = "t";
    trace.variant.max_rounds = 0;
    pipeline::RoundRecord round;
    switch (rng() % 6) {
        case 0: {
            round.feedback.status = SolveStatus::success;
            planning::Plan plan;
            plan.steps.push_back({"step", {}});
            round.feedback.plan = plan;
            break;
        }
        case 1: {
            // success on the generated files, but the plan misses the gold goal
            round.feedback.status = SolveStatus::success;
            round.feedback.plan = planning::Plan{};
            break;
        }
        case 2:
            round.feedback.status = SolveStatus::syntax_error;
            round.feedback.file = FileKind::DF;
            break;
        case 3:
            round.feedback.status = SolveStatus::semantic_error;
            break;
        case 4:
            round.feedback.status = SolveStatus::timeout;
            break;
        default:
            return harness::errored_record("t", "base+none", "provider failure");
    }
    trace.rounds.push_back(round);
    return harness::evaluate_record(trace, task);
}

Outcome check_metrics() {
    std::vector<harness::RunRecord> canned;
    for (int i = 0; i < 100; ++i) {
        harness::RunRecord r;
        r.task_id = "t" + std::to_string(i);
        r.variant = "base+none";
        r.syntactic_ok = i < 96;
        r.semantic_ok = i < 86;
        if (r.syntactic_ok) r.first_syntactic_round = 0;
        r.status = r.syntactic_ok ? planning::SolveStatus::success
                                  : planning::SolveStatus::syntax_error;
        canned.push_back(r);
    }
    auto report = harness::aggregate(canned);
    if (report.syntactic_accuracy != 96.0 || report.semantic_accuracy != 86.0)
        return fail("canned set reported " + std::to_string(report.syntactic_accuracy) +
                    "/" + std::to_string(report.semantic_accuracy));

    std::mt19937 rng(20250822);
    for (int set = 0; set < 1000; ++set) {
        std::vector<harness::RunRecord> records;
        int n = 3 + static_cast<int>(rng() % 10);
        for (int i = 0; i < n; ++i) {
            records.push_back(random_record(rng));
            records.back().task_id = "t" + std::to_string(i);
        }
        auto r = harness::aggregate(records);
        if (r.semantic_accuracy > r.syntactic_accuracy)
            return fail("set " + std::to_string(set) + " has semantic " +
                        std::to_string(r.semantic_accuracy) + " > syntactic " +
                        std::to_string(r.syntactic_accuracy));
    }
    return pass("96/100 and 86/100 report exactly 96.0 and 86.0; semantic <= syntactic "
                "held on 1000 randomized record sets");
}

// --- criteria 8 and 9: replay batches -------------------------------------

Outcome check_determinism() {
    auto cfg = harness::load_run_config(
        (testutil::data_dir() / "configs" / "replay_blocksworld.json").string());
    testutil::TempDir tmp;
    std::ostringstream human;
    cfg.output_dir = (tmp.path / "one").string();
    auto first = harness::run_batch(cfg, human);
    cfg.output_dir = (tmp.path / "two").string();
    harness::run_batch(cfg, human);

    if (testutil::read_file(tmp.path / "one" / "records.jsonl") !=
        testutil::read_file(tmp.path / "two" / "records.jsonl"))
        return fail("records.jsonl differs between executions");
    int traces = 0;
    for (const auto& record : first.records) {
        std::filesystem::path name = record.task_id + ".json";
        if (testutil::read_file(tmp.path / "one" / "traces" / name) !=
            testutil::read_file(tmp.path / "two" / "traces" / name))
            return fail("trace " + record.task_id + " differs between executions");
        ++traces;
    }
    return pass("records.jsonl and " + std::to_string(traces) +
                " traces byte-identical across two replay executions");
}

Outcome check_curve() {
    auto cfg = harness::load_run_config(
        (testutil::data_dir() / "configs" / "replay_curve_demo.json").string());
    testutil::TempDir tmp;
    std::ostringstream human;
    cfg.output_dir = (tmp.path / "out").string();
    auto result = harness::run_batch(cfg, human);

    std::istringstream curve(testutil::read_file(tmp.path / "out" / "curve.csv"));
    std::string line;
    if (!std::getline(curve, line) || line != "round,accuracy")
        return fail("curve.csv header is '" + line + "'");
    double previous = -1.0;
    double last = -1.0;
    int rows = 0;
    while (std::getline(curve, line)) {
        auto comma = line.find(',');
        if (comma == std::string::npos) return fail("malformed curve row '" + line + "'");
        double value = std::stod(line.substr(comma + 1));
        if (value < previous)
            return fail("curve decreases at round " + std::to_string(rows));
        previous = last = value;
        ++rows;
    }
    if (rows != 4) return fail("expected 4 curve rows, found " + std::to_string(rows));
    if (last != result.report.syntactic_accuracy)
        return fail("final curve value " + std::to_string(last) +
                    " != headline syntactic accuracy " +
                    std::to_string(result.report.syntactic_accuracy));
    return pass("curve 25 -> 50 -> 75 -> 100 is nondecreasing and its final value equals "
                "the headline syntactic accuracy");
}

struct Criterion {
    int id;
    const char* label;
    double budget_seconds;
    Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "d1/d2 parser fixtures", 1.0, check_parser_fixtures},
    {2, "gold pairs parse and lint clean", 5.0, check_gold_acceptance},
    {3, "validator agrees with the naive simulator", 30.0, check_validator_oracle},
    {4, "builtin planner is optimal on bundled tasks", 120.0, check_builtin_planner},
    {5, "retrieval anchors and Okapi reference", 5.0, check_retrieval},
    {6, "correction loop conformance", 10.0, check_algorithm_conformance},
    {7, "metrics constants and accuracy inequality", 5.0, check_metrics},
    {8, "replay determinism", 60.0, check_determinism},
    {9, "per-round curve shape", 60.0, check_curve},
};

} // namespace

int main() {
    int failures = 0;
    for (const Criterion& criterion : kCriteria) {
        auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& e) {
            outcome = fail(std::string("exception: ") + e.what());
        }
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (outcome.pass && elapsed > criterion.budget_seconds) {
            outcome.pass = false;
            outcome.detail = "over budget";
        }
        std::printf("[%s] criterion %d: %s — %s (%.2fs, budget %.0fs)\n",
                    outcome.pass ? "PASS" : "FAIL", criterion.id, criterion.label,
                    outcome.detail.c_str(), elapsed, criterion.budget_seconds);
        if (!outcome.pass) ++failures;
    }
    return failures;
}
