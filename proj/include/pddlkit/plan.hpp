#pragma once

// Plan representation and the plan text format: one step per line,
// "(action-name arg1 arg2 ...)", case-insensitive, with an optional "N:"
// step index prefix as many planners print. Blank lines and lines starting
// with ';' are ignored, so external planner output validates unmodified.

#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pddlkit/errors.hpp"
#include "pddlkit/source.hpp"

namespace pddlkit::planning {

struct PlanStep {
    std::string name;               // normalized lower case
    std::vector<std::string> args;  // normalized lower case

    friend bool operator==(const PlanStep& a, const PlanStep& b) {
        return a.name == b.name && a.args == b.args;
    }
    friend bool operator!=(const PlanStep& a, const PlanStep& b) { return !(a == b); }
};

struct Plan {
    std::vector<PlanStep> steps;

    bool empty() const { return steps.empty(); }
    std::size_t size() const { return steps.size(); }

    friend bool operator==(const Plan& a, const Plan& b) { return a.steps == b.steps; }
    friend bool operator!=(const Plan& a, const Plan& b) { return !(a == b); }
};

namespace detail {

inline bool is_step_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
}

} // namespace detail

/// Parses a single line as a plan step. Returns nullopt when the line is not
/// step-shaped; comment and blank lines are also nullopt (callers decide how
/// to treat them).
inline std::optional<PlanStep> parse_plan_step_line(const std::string& line) {
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    };
    skip_ws();
    // optional "N:" prefix
    std::size_t digits_start = i;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > digits_start && i < line.size() && line[i] == ':') {
        ++i;
        skip_ws();
    } else {
        i = digits_start;
    }
    if (i >= line.size() || line[i] != '(') return std::nullopt;
    ++i;
    skip_ws();
    PlanStep step;
    std::size_t name_start = i;
    while (i < line.size() && detail::is_step_name_char(line[i])) ++i;
    if (i == name_start) return std::nullopt;
    step.name = to_lower_copy(line.substr(name_start, i - name_start));
    while (true) {
        skip_ws();
        if (i >= line.size()) return std::nullopt;  // unclosed
        if (line[i] == ')') {
            ++i;
            break;
        }
        std::size_t arg_start = i;
        while (i < line.size() && detail::is_step_name_char(line[i])) ++i;
        if (i == arg_start) return std::nullopt;
        step.args.push_back(to_lower_copy(line.substr(arg_start, i - arg_start)));
    }
    skip_ws();
    if (i != line.size()) return std::nullopt;  // trailing junk
    return step;
}

/// Parses whole plan text. Throws PlanFormatError on the first line that is
/// neither blank, a ';' comment, nor a well-formed step.
inline Plan parse_plan_text(const std::string& text) {
    Plan plan;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == ';') continue;
        auto step = parse_plan_step_line(line);
        if (!step)
            throw PlanFormatError("plan line " + std::to_string(line_no) +
                                  " is not a well-formed step: " + line);
        plan.steps.push_back(std::move(*step));
    }
    return plan;
}

inline std::string render_plan(const Plan& plan) {
    std::ostringstream out;
    for (const auto& step : plan.steps) {
        out << '(' << step.name;
        for (const auto& a : step.args) out << ' ' << a;
        out << ")\n";
    }
    return out.str();
}

} // namespace pddlkit::planning
