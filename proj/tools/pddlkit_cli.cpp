// Command-line surface over the toolkit: syntax checking, plan validation,
// planning, corpus ingestion, retrieval, batch runs, and report emission.
// Exit codes: 0 on success, 1 on a domain failure (diagnostics, an invalid
// plan, a failed solve), 2 on a usage or configuration error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pddlkit/pddlkit.hpp"

namespace {

using namespace pddlkit;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

bool print_diagnostics(const std::vector<Diagnostic>& diags) {
    bool any_error = false;
    for (const auto& d : diags) {
        std::cout << format_diagnostic(d) << "\n";
        any_error = any_error || d.severity == Severity::error;
    }
    return any_error;
}

int cmd_check(const std::string& df_path, const std::string& pf_path) {
    auto df = syntax::parse_domain_text(slurp(df_path));
    auto pf = syntax::parse_problem_text(slurp(pf_path));
    std::vector<Diagnostic> diags = df.diagnostics;
    diags.insert(diags.end(), pf.diagnostics.begin(), pf.diagnostics.end());
    if (df.ok() && pf.ok()) {
        auto lint = syntax::lint_pair(*df.ast, *pf.ast);
        diags.insert(diags.end(), lint.begin(), lint.end());
    }
    if (print_diagnostics(diags)) return 1;
    std::cout << (diags.empty() ? "ok: both files parse and lint clean\n"
                                : "ok: warnings only\n");
    return 0;
}

int cmd_validate(const std::string& df_path, const std::string& pf_path,
                 const std::string& plan_path) {
    auto df = syntax::parse_domain_text(slurp(df_path));
    auto pf = syntax::parse_problem_text(slurp(pf_path));
    if (!df.ok() || !pf.ok()) {
        print_diagnostics(df.diagnostics);
        print_diagnostics(pf.diagnostics);
        return 1;
    }
    planning::Plan plan = planning::parse_plan_text(slurp(plan_path));
    auto verdict = semantics::validate_plan(*df.ast, *pf.ast, plan);
    std::string line = to_string(verdict.status);
    if (verdict.failing_step) line += " at step " + std::to_string(*verdict.failing_step);
    if (verdict.witness) line += ", witness " + to_string(*verdict.witness);
    std::cout << line << "\n";
    return verdict.valid() ? 0 : 1;
}

int cmd_solve(const std::string& df_path, const std::string& pf_path,
              const planning::PlannerConfig& cfg) {
    planning::SolverFeedback fb = planning::solve(slurp(df_path), slurp(pf_path), cfg);
    if (fb.ok()) {
        std::cout << planning::render_plan(*fb.plan);
        return 0;
    }
    std::cout << fb.message << "\n";
    return 1;
}

int cmd_ingest(const std::string& src, const std::string& out) {
    docs::DocCorpus corpus = docs::load_corpus(src);
    docs::save_corpus(corpus, out);
    std::cout << "ingested " << corpus.sections.size() << " sections -> " << out << "\n";
    return 0;
}

int cmd_retrieve(const std::string& corpus_path, const std::string& query, int top_k) {
    docs::DocCorpus corpus = docs::load_corpus(corpus_path);
    retrieval::RetrieverConfig cfg;
    cfg.top_k = top_k;
    retrieval::Bm25Index index(corpus, cfg);
    auto hits = retrieval::retrieve(index, query, cfg);
    int rank = 1;
    for (const auto& hit : hits) {
        const docs::DocSection* section = corpus.find_by_id(hit.section_id);
        std::cout << rank++ << ". " << (section ? section->type_name : hit.section_id)
                  << " [" << hit.section_id << "] score=" << hit.score << "\n";
    }
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_override) {
    harness::RunConfig cfg;
    try {
        cfg = harness::load_run_config(config_path);
    } catch (const Error& e) {
        throw ConfigError(e.what());  // any load failure is a configuration error
    }
    if (!out_override.empty()) cfg.output_dir = out_override;
    harness::run_batch(cfg, std::cout);
    std::cout << "outputs written to " << cfg.output_dir << "\n";
    return 0;
}

int cmd_report(const std::string& records_path, const std::string& out_dir) {
    auto records = harness::load_records_jsonl(records_path);
    auto report = harness::aggregate(records);
    harness::emit_report(report, records, out_dir, std::cout);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PDDL formalization toolkit"};
    app.require_subcommand(1);

    std::string df_path, pf_path, plan_path;
    std::string src_path, out_path = "corpus.json";
    std::string corpus_path, query;
    std::string config_path, records_path;
    std::string out_dir = "out";
    std::string out_override;
    int top_k = 3;
    planning::PlannerConfig planner_cfg;
    std::string external_command;

    auto* check = app.add_subcommand("check", "Parse and lint a domain/problem pair");
    check->add_option("df", df_path, "domain file")->required();
    check->add_option("pf", pf_path, "problem file")->required();

    auto* validate = app.add_subcommand("validate", "Validate a plan against a pair");
    validate->add_option("df", df_path, "domain file")->required();
    validate->add_option("pf", pf_path, "problem file")->required();
    validate->add_option("plan", plan_path, "plan file, one (action args) per line")
        ->required();

    auto* solve = app.add_subcommand("solve", "Plan for a domain/problem pair");
    solve->add_option("df", df_path, "domain file")->required();
    solve->add_option("pf", pf_path, "problem file")->required();
    solve->add_option("--timeout", planner_cfg.timeout_seconds, "seconds before giving up");
    solve->add_option("--external", external_command,
                      "external planner command with {df} and {pf} placeholders");

    auto* ingest = app.add_subcommand("ingest-docs", "Build a corpus file from a source");
    ingest->add_option("src", src_path, "corpus JSON file or directory of sections")
        ->required();
    ingest->add_option("out", out_path, "output corpus file")->required();

    auto* retrieve = app.add_subcommand("retrieve", "Rank corpus sections for a query");
    retrieve->add_option("corpus", corpus_path, "corpus JSON file")->required();
    retrieve->add_option("--query", query, "query text")->required();
    retrieve->add_option("--top-k", top_k, "sections to return");

    auto* run = app.add_subcommand("run", "Execute a batch pipeline from a config");
    run->add_option("config", config_path, "run config JSON")->required();
    run->add_option("--out", out_override, "override the configured output directory");

    auto* report = app.add_subcommand("report", "Aggregate persisted run records");
    report->add_option("records", records_path, "records.jsonl file")->required();
    report->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(check)) return cmd_check(df_path, pf_path);
        if (app.got_subcommand(validate)) return cmd_validate(df_path, pf_path, plan_path);
        if (app.got_subcommand(solve)) {
            if (!external_command.empty()) {
                planner_cfg.mode = planning::PlannerConfig::Mode::external;
                planner_cfg.external_command = external_command;
            }
            return cmd_solve(df_path, pf_path, planner_cfg);
        }
        if (app.got_subcommand(ingest)) return cmd_ingest(src_path, out_path);
        if (app.got_subcommand(retrieve)) return cmd_retrieve(corpus_path, query, top_k);
        if (app.got_subcommand(run)) return cmd_run(config_path, out_override);
        if (app.got_subcommand(report)) return cmd_report(records_path, out_dir);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
