#pragma once

// Scoring and reporting. Syntactic accuracy counts tasks whose final feedback
// is not a syntax error (and not a generation failure); semantic accuracy
// additionally requires the found plan to validate against the task's GOLD
// files, not the generated ones. The per-round curve is cumulative: round r
// counts tasks first syntactically clean at some round <= r, which keeps it
// nondecreasing by construction.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pddlkit/dataset.hpp"
#include "pddlkit/errors.hpp"
#include "pddlkit/pipeline.hpp"
#include "pddlkit/plan.hpp"
#include "pddlkit/planner.hpp"
#include "pddlkit/validate.hpp"

namespace pddlkit::harness {

struct RunRecord {
    std::string task_id;
    std::string variant;
    int rounds_used = 0;            // refinement rounds; round 0 is generation
    std::optional<planning::SolveStatus> status;  // absent iff the run errored out
    std::optional<planning::Plan> plan;
    bool syntactic_ok = false;
    bool semantic_ok = false;       // implies syntactic_ok and plan present
    std::optional<int> first_syntactic_round;  // absent iff never clean
    std::optional<std::string> error_note;

    bool operator==(const RunRecord&) const = default;
};

struct MetricsReport {
    std::string variant;
    int n_tasks = 0;
    double syntactic_accuracy = 0.0;   // percentage
    double semantic_accuracy = 0.0;    // percentage
    std::vector<double> per_round_syntactic;  // index = round, cumulative

    bool operator==(const MetricsReport&) const = default;
};

namespace detail {

inline bool round_is_clean(const pipeline::RoundRecord& round) {
    return round.feedback.status != planning::SolveStatus::syntax_error &&
           !round.generation_failure;
}

} // namespace detail

inline RunRecord evaluate_record(const pipeline::PipelineTrace& trace,
                                 const TaskInstance& task) {
    if (trace.rounds.empty()) throw DatasetError("trace for '" + trace.task_id + "' is empty");
    RunRecord record;
    record.task_id = trace.task_id;
    record.variant = pipeline::variant_label(trace.variant);
    record.rounds_used = static_cast<int>(trace.rounds.size()) - 1;

    const pipeline::RoundRecord& final_round = trace.final_round();
    record.status = final_round.feedback.status;
    record.syntactic_ok = detail::round_is_clean(final_round);
    for (const auto& round : trace.rounds) {
        if (detail::round_is_clean(round)) {
            record.first_syntactic_round = round.round;
            break;
        }
    }

    if (final_round.feedback.status == planning::SolveStatus::success &&
        final_round.feedback.plan) {
        record.plan = final_round.feedback.plan;
        auto gold_df = syntax::parse_domain_text(task.gold_df_text);
        auto gold_pf = syntax::parse_problem_text(task.gold_pf_text);
        if (!gold_df.ok() || !gold_pf.ok())
            throw DatasetError("task '" + task.task_id + "': gold files failed to parse");
        try {
            semantics::PlanVerdict verdict =
                semantics::validate_plan(*gold_df.ast, *gold_pf.ast, *record.plan);
            record.semantic_ok = verdict.valid();
            if (!verdict.valid()) {
                std::string note = "plan invalid on gold files: " + to_string(verdict.status);
                if (verdict.failing_step)
                    note += " at step " + std::to_string(*verdict.failing_step);
                if (verdict.witness) note += ", witness " + to_string(*verdict.witness);
                record.error_note = note;
            }
        } catch (const PlanBindingError& e) {
            record.semantic_ok = false;
            record.error_note = std::string("plan does not bind to gold files: ") + e.what();
        }
    }
    return record;
}

inline RunRecord errored_record(const std::string& task_id, const std::string& variant,
                                const std::string& note) {
    RunRecord record;
    record.task_id = task_id;
    record.variant = variant;
    record.error_note = note;
    return record;
}

inline MetricsReport aggregate(const std::vector<RunRecord>& records) {
    if (records.empty()) throw DatasetError("cannot aggregate an empty record set");
    MetricsReport report;
    report.variant = records.front().variant;
    report.n_tasks = static_cast<int>(records.size());
    int max_round = 0;
    int syntactic = 0;
    int semantic = 0;
    for (const auto& r : records) {
        if (r.variant != report.variant)
            throw DatasetError("record set mixes variants '" + report.variant + "' and '" +
                               r.variant + "'");
        if (r.syntactic_ok) ++syntactic;
        if (r.semantic_ok) ++semantic;
        if (r.rounds_used > max_round) max_round = r.rounds_used;
    }
    double n = static_cast<double>(report.n_tasks);
    report.syntactic_accuracy = 100.0 * syntactic / n;
    report.semantic_accuracy = 100.0 * semantic / n;
    for (int round = 0; round <= max_round; ++round) {
        int count = 0;
        for (const auto& r : records)
            if (r.first_syntactic_round && *r.first_syntactic_round <= round) ++count;
        report.per_round_syntactic.push_back(100.0 * count / n);
    }
    return report;
}

// --- serialization --------------------------------------------------------

inline nlohmann::ordered_json record_to_json(const RunRecord& r) {
    nlohmann::ordered_json j;
    j["task_id"] = r.task_id;
    j["variant"] = r.variant;
    j["rounds_used"] = r.rounds_used;
    j["status"] = r.status ? planning::to_string(*r.status) : "errored";
    if (r.plan) {
        auto steps = nlohmann::ordered_json::array();
        for (const auto& step : r.plan->steps) {
            std::string s = "(" + step.name;
            for (const auto& a : step.args) s += " " + a;
            steps.push_back(s + ")");
        }
        j["plan"] = std::move(steps);
    }
    j["syntactic_ok"] = r.syntactic_ok;
    j["semantic_ok"] = r.semantic_ok;
    if (r.first_syntactic_round) j["first_syntactic_round"] = *r.first_syntactic_round;
    if (r.error_note) j["error_note"] = *r.error_note;
    return j;
}

inline RunRecord record_from_json(const nlohmann::json& j) {
    try {
        RunRecord r;
        r.task_id = j.at("task_id").get<std::string>();
        r.variant = j.at("variant").get<std::string>();
        r.rounds_used = j.at("rounds_used").get<int>();
        std::string status = j.at("status").get<std::string>();
        if (status != "errored") {
            r.status = planning::solve_status_from_string(status);
            if (!r.status) throw DatasetError("unknown status '" + status + "'");
        }
        if (j.contains("plan")) {
            planning::Plan plan;
            for (const auto& line : j.at("plan")) {
                auto step = planning::parse_plan_step_line(line.get<std::string>());
                if (!step) throw DatasetError("malformed plan step in record");
                plan.steps.push_back(*step);
            }
            r.plan = std::move(plan);
        }
        r.syntactic_ok = j.at("syntactic_ok").get<bool>();
        r.semantic_ok = j.at("semantic_ok").get<bool>();
        if (j.contains("first_syntactic_round"))
            r.first_syntactic_round = j.at("first_syntactic_round").get<int>();
        if (j.contains("error_note")) r.error_note = j.at("error_note").get<std::string>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError(std::string("malformed run record: ") + e.what());
    }
}

inline nlohmann::ordered_json report_to_json(const MetricsReport& report) {
    return {{"variant", report.variant},
            {"n_tasks", report.n_tasks},
            {"syntactic_accuracy", report.syntactic_accuracy},
            {"semantic_accuracy", report.semantic_accuracy},
            {"per_round_syntactic", report.per_round_syntactic}};
}

inline std::vector<RunRecord> load_records_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::vector<RunRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw DatasetError("'" + path + "' line " + std::to_string(line_no) +
                               ": invalid JSON");
        records.push_back(record_from_json(j));
    }
    return records;
}

namespace detail {

// default stream formatting: integral percentages print without a decimal part
inline std::string format_number(double value) {
    std::ostringstream out;
    out << value;
    return out.str();
}

} // namespace detail

inline void write_human_table(const MetricsReport& report, std::ostream& out) {
    out << std::left << std::setw(32) << "variant" << std::right << std::setw(8) << "tasks"
        << std::setw(26) << "syntactic / semantic" << "\n";
    std::string cell = detail::format_number(report.syntactic_accuracy) + " / " +
                       detail::format_number(report.semantic_accuracy);
    out << std::left << std::setw(32) << report.variant << std::right << std::setw(8)
        << report.n_tasks << std::setw(26) << cell << "\n";
}

inline void emit_report(const MetricsReport& report, const std::vector<RunRecord>& records,
                        const std::string& out_dir, std::ostream& human_out) {
    std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir + "'");

    {
        std::ofstream out(dir / "records.jsonl");
        if (!out) throw IoError("cannot write '" + (dir / "records.jsonl").string() + "'");
        for (const auto& r : records) out << record_to_json(r).dump() << "\n";
    }
    {
        std::ofstream out(dir / "report.json");
        if (!out) throw IoError("cannot write '" + (dir / "report.json").string() + "'");
        out << report_to_json(report).dump(2) << "\n";
    }
    {
        std::ofstream out(dir / "curve.csv");
        if (!out) throw IoError("cannot write '" + (dir / "curve.csv").string() + "'");
        out << "round,accuracy\n";
        for (std::size_t round = 0; round < report.per_round_syntactic.size(); ++round)
            out << round << "," << detail::format_number(report.per_round_syntactic[round])
                << "\n";
    }
    write_human_table(report, human_out);
}

} // namespace pddlkit::harness
