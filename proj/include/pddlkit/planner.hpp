#pragma once

// The solver seam: produce a plan or structured error feedback from a DF/PF
// pair. Syntax feedback comes from a deterministic pre-flight parse+lint
// with our own front end; search runs either in the builtin BFS planner or
// through an external command. All outcomes normalize into SolverFeedback,
// the single object the correction loop branches on. DF errors take
// precedence over PF errors within a round.

#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "pddlkit/errors.hpp"
#include "pddlkit/ground.hpp"
#include "pddlkit/lint.hpp"
#include "pddlkit/parse.hpp"
#include "pddlkit/plan.hpp"
#include "pddlkit/source.hpp"
#include "pddlkit/state.hpp"
#include "pddlkit/subprocess.hpp"
#include "pddlkit/validate.hpp"

namespace pddlkit::planning {

enum class SolveStatus { success, syntax_error, semantic_error, timeout };

inline std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::success: return "success";
        case SolveStatus::syntax_error: return "syntax_error";
        case SolveStatus::semantic_error: return "semantic_error";
        case SolveStatus::timeout: return "timeout";
    }
    return "semantic_error";
}

inline std::optional<SolveStatus> solve_status_from_string(const std::string& s) {
    if (s == "success") return SolveStatus::success;
    if (s == "syntax_error") return SolveStatus::syntax_error;
    if (s == "semantic_error") return SolveStatus::semantic_error;
    if (s == "timeout") return SolveStatus::timeout;
    return std::nullopt;
}

struct SolverFeedback {
    SolveStatus status = SolveStatus::semantic_error;
    std::optional<FileKind> file;       // engaged iff status = syntax_error
    std::string message;
    std::optional<int> line;            // extracted from the message when present
    std::optional<std::string> token;   // upper-cased, as solvers echo it
    std::optional<Plan> plan;           // engaged iff status = success

    bool ok() const { return status == SolveStatus::success; }
};

struct PlannerConfig {
    enum class Mode { builtin, external };

    Mode mode = Mode::builtin;
    double timeout_seconds = 60.0;
    std::string external_command;       // template with {df} and {pf} placeholders
    std::size_t search_node_cap = 2'000'000;
    std::size_t grounding_cap = semantics::kDefaultGroundingCap;
    std::string scratch_dir;            // external mode temp files; "" = system temp
};

// --- feedback construction ----------------------------------------------

namespace detail {

inline SolverFeedback feedback_from_diagnostic(const Diagnostic& diag) {
    SolverFeedback fb;
    fb.status = SolveStatus::syntax_error;
    fb.file = diag.file;
    fb.message = format_diagnostic(diag);
    fb.line = diag.line;
    fb.token = to_upper_copy(diag.token);
    return fb;
}

inline const Diagnostic* first_error(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags)
        if (d.severity == Severity::error) return &d;
    return nullptr;
}

// DF-attributed errors first, then PF, preserving relative order
inline const Diagnostic* first_error_df_first(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags)
        if (d.severity == Severity::error && d.file == FileKind::DF) return &d;
    return first_error(diags);
}

} // namespace detail

// --- normalization --------------------------------------------------------

enum class FeedbackOrigin { preflight, builtin, external };

/// Total, deterministic classification of raw solver output. Order of
/// matching: "domain: syntax error" line, "problem: syntax error" line, a
/// plan block, otherwise semantic_error carrying the raw text.
inline SolverFeedback normalize_feedback(const std::string& raw, FeedbackOrigin origin) {
    (void)origin;  // provenance only; classification is origin-independent

    std::vector<std::string> lines;
    {
        std::istringstream in(raw);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            lines.push_back(line);
        }
    }

    auto trimmed = [](const std::string& s) {
        std::size_t a = s.find_first_not_of(" \t");
        if (a == std::string::npos) return std::string();
        std::size_t b = s.find_last_not_of(" \t");
        return s.substr(a, b - a + 1);
    };

    for (const auto& line : lines) {
        std::string t = trimmed(line);
        bool df = t.rfind("domain: syntax error", 0) == 0;
        bool pf = !df && t.rfind("problem: syntax error", 0) == 0;
        if (!df && !pf) continue;
        SolverFeedback fb;
        fb.status = SolveStatus::syntax_error;
        fb.file = df ? FileKind::DF : FileKind::PF;
        fb.message = t;
        static const std::regex line_re("in line ([0-9]+)");
        std::smatch m;
        if (std::regex_search(t, m, line_re)) fb.line = std::stoi(m[1].str());
        static const std::regex token_re("'([^']*)'");
        if (std::regex_search(t, m, token_re)) fb.token = to_upper_copy(m[1].str());
        return fb;
    }

    // longest run of plan-step lines; blank and ';' lines are neutral
    // (they neither extend nor break a run), other lines break it
    std::vector<PlanStep> best, current;
    auto neutral = [&](const std::string& s) {
        std::string t = trimmed(s);
        return t.empty() || t[0] == ';';
    };
    auto flush = [&] {
        if (current.size() > best.size()) best = current;
        current.clear();
    };
    for (const auto& line : lines) {
        if (auto step = parse_plan_step_line(line)) {
            current.push_back(std::move(*step));
        } else if (!neutral(line)) {
            flush();
        }
    }
    flush();
    if (!best.empty()) {
        SolverFeedback fb;
        fb.status = SolveStatus::success;
        fb.message = raw;
        fb.plan = Plan{std::move(best)};
        return fb;
    }

    SolverFeedback fb;
    fb.status = SolveStatus::semantic_error;
    fb.message = raw;
    return fb;
}

// --- builtin search -------------------------------------------------------

struct BuiltinResult {
    enum class Outcome { plan_found, no_plan, node_cap, timeout };
    Outcome outcome = Outcome::no_plan;
    Plan plan;
};

/// Breadth-first search with duplicate detection over the deterministic
/// ground-action order; returns a shortest plan by step count.
inline BuiltinResult solve_builtin(const syntax::DomainAst& domain,
                                   const syntax::ProblemAst& problem,
                                   const PlannerConfig& cfg = {}) {
    using semantics::GroundAction;
    using semantics::State;

    std::vector<GroundAction> actions = semantics::ground(domain, problem, cfg.grounding_cap);

    auto goal_satisfied = [&](const State& s) {
        for (const auto& lit : problem.goal.literals) {
            bool holds = s.contains(semantics::ground_atom_from(lit.atom));
            if (holds == lit.negated) return false;
        }
        return true;
    };

    auto plan_for = [&](const std::vector<std::pair<int, int>>& nodes, int index) {
        std::vector<PlanStep> steps;
        for (int at = index; at >= 0 && nodes[at].second >= 0; at = nodes[at].first) {
            const GroundAction& a = actions[static_cast<std::size_t>(nodes[at].second)];
            steps.push_back({a.schema_name, a.args});
        }
        std::reverse(steps.begin(), steps.end());
        return Plan{std::move(steps)};
    };

    State init = semantics::initial_state(problem);
    BuiltinResult result;
    if (goal_satisfied(init)) {
        result.outcome = BuiltinResult::Outcome::plan_found;
        return result;
    }

    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::duration<double>(cfg.timeout_seconds);

    std::vector<State> states;
    std::vector<std::pair<int, int>> nodes;  // (parent index, action index)
    std::map<State, int> seen;
    states.push_back(init);
    nodes.emplace_back(-1, -1);
    seen.emplace(init, 0);
    std::deque<int> frontier{0};

    std::size_t expansions = 0;
    while (!frontier.empty()) {
        if ((++expansions & 1023) == 0 && std::chrono::steady_clock::now() > deadline) {
            result.outcome = BuiltinResult::Outcome::timeout;
            return result;
        }
        int current = frontier.front();
        frontier.pop_front();
        State state = states[static_cast<std::size_t>(current)];
        for (std::size_t ai = 0; ai < actions.size(); ++ai) {
            const GroundAction& action = actions[ai];
            if (!semantics::applicable(state, action)) continue;
            State next = semantics::apply(state, action);
            if (seen.count(next)) continue;
            int index = static_cast<int>(states.size());
            states.push_back(next);
            nodes.emplace_back(current, static_cast<int>(ai));
            seen.emplace(std::move(next), index);
            if (goal_satisfied(states.back())) {
                result.outcome = BuiltinResult::Outcome::plan_found;
                result.plan = plan_for(nodes, index);
                return result;
            }
            if (states.size() > cfg.search_node_cap) {
                result.outcome = BuiltinResult::Outcome::node_cap;
                return result;
            }
            frontier.push_back(index);
        }
    }
    result.outcome = BuiltinResult::Outcome::no_plan;
    return result;
}

// --- external adapter -----------------------------------------------------

namespace detail {

inline std::string substitute_placeholder(std::string text, const std::string& key,
                                          const std::string& value) {
    std::string needle = "{" + key + "}";
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), value);
        pos += value.size();
    }
    return text;
}

inline std::filesystem::path scratch_file(const std::string& scratch_dir,
                                          const std::string& stem) {
    static std::atomic<unsigned long> counter{0};
    std::filesystem::path dir = scratch_dir.empty()
                                    ? std::filesystem::temp_directory_path()
                                    : std::filesystem::path(scratch_dir);
    std::filesystem::create_directories(dir);
    unsigned long id = counter.fetch_add(1);
    return dir / (stem + "-" + std::to_string(::getpid()) + "-" + std::to_string(id) + ".pddl");
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

} // namespace detail

struct ExternalResult {
    std::string output;
    int exit_code = -1;
    bool timed_out = false;
};

inline ExternalResult solve_external(const std::string& df_path, const std::string& pf_path,
                                     const PlannerConfig& cfg) {
    if (cfg.external_command.empty())
        throw ConfigError("external planner mode requires external_command");
    std::string command = detail::substitute_placeholder(cfg.external_command, "df", df_path);
    command = detail::substitute_placeholder(command, "pf", pf_path);
    CommandResult run = run_command(command, cfg.timeout_seconds);
    if (!run.timed_out && run.exit_code == 127)
        throw ConfigError("external planner not found: " + command +
                          (run.output.empty() ? "" : "\n" + run.output));
    return {std::move(run.output), run.exit_code, run.timed_out};
}

// --- entry point ----------------------------------------------------------

inline SolverFeedback solve(const std::string& df_text, const std::string& pf_text,
                            const PlannerConfig& cfg = {}) {
    auto df = syntax::parse_domain_text(df_text);
    if (auto* diag = detail::first_error(df.diagnostics))
        return detail::feedback_from_diagnostic(*diag);
    auto pf = syntax::parse_problem_text(pf_text);
    if (auto* diag = detail::first_error(pf.diagnostics))
        return detail::feedback_from_diagnostic(*diag);

    auto lint = syntax::lint_pair(*df.ast, *pf.ast);
    if (auto* diag = detail::first_error_df_first(lint))
        return detail::feedback_from_diagnostic(*diag);

    if (cfg.mode == PlannerConfig::Mode::external) {
        auto df_file = detail::scratch_file(cfg.scratch_dir, "df");
        auto pf_file = detail::scratch_file(cfg.scratch_dir, "pf");
        detail::write_file(df_file, df_text);
        detail::write_file(pf_file, pf_text);
        ExternalResult run;
        try {
            run = solve_external(df_file.string(), pf_file.string(), cfg);
        } catch (...) {
            std::error_code ec;
            std::filesystem::remove(df_file, ec);
            std::filesystem::remove(pf_file, ec);
            throw;
        }
        std::error_code ec;
        std::filesystem::remove(df_file, ec);
        std::filesystem::remove(pf_file, ec);
        if (run.timed_out) {
            SolverFeedback fb;
            fb.status = SolveStatus::timeout;
            fb.message = "external planner timed out after " +
                         std::to_string(cfg.timeout_seconds) + "s";
            return fb;
        }
        return normalize_feedback(run.output, FeedbackOrigin::external);
    }

    BuiltinResult search;
    try {
        search = solve_builtin(*df.ast, *pf.ast, cfg);
    } catch (const CapacityError& e) {
        SolverFeedback fb;
        fb.status = SolveStatus::timeout;
        fb.message = e.what();
        return fb;
    }
    switch (search.outcome) {
        case BuiltinResult::Outcome::plan_found: {
            SolverFeedback fb;
            fb.status = SolveStatus::success;
            std::ostringstream msg;
            for (std::size_t i = 0; i < search.plan.steps.size(); ++i) {
                msg << i << ": (" << search.plan.steps[i].name;
                for (const auto& a : search.plan.steps[i].args) msg << ' ' << a;
                msg << ")\n";
            }
            fb.message = msg.str();
            fb.plan = std::move(search.plan);
            return fb;
        }
        case BuiltinResult::Outcome::no_plan: {
            SolverFeedback fb;
            fb.status = SolveStatus::semantic_error;
            fb.message = "no plan found";
            return fb;
        }
        case BuiltinResult::Outcome::node_cap: {
            SolverFeedback fb;
            fb.status = SolveStatus::timeout;
            fb.message = "search node cap of " + std::to_string(cfg.search_node_cap) +
                         " exceeded";
            return fb;
        }
        case BuiltinResult::Outcome::timeout: {
            SolverFeedback fb;
            fb.status = SolveStatus::timeout;
            fb.message = "builtin planner timed out after " +
                         std::to_string(cfg.timeout_seconds) + "s";
            return fb;
        }
    }
    SolverFeedback fb;
    fb.message = "unreachable";
    return fb;
}

} // namespace pddlkit::planning
