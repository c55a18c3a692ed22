#pragma once

// Dataset loading. A dataset is a directory of task directories, each holding
// the natural-language pair (dd.txt, pd.txt) and the gold PDDL pair
// (gold_domain.pddl, gold_problem.pddl). Gold files must parse and lint
// clean; tasks load in lexicographic id order.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pddlkit/errors.hpp"
#include "pddlkit/lint.hpp"
#include "pddlkit/parse.hpp"

namespace pddlkit::harness {

struct TaskInstance {
    std::string task_id;
    std::string dd_text;
    std::string pd_text;
    std::string gold_df_text;
    std::string gold_pf_text;

    bool operator==(const TaskInstance&) const = default;
};

namespace detail {

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

} // namespace detail

inline TaskInstance load_task(const std::filesystem::path& dir) {
    TaskInstance task;
    task.task_id = dir.filename().string();
    const std::pair<const char*, std::string TaskInstance::*> files[] = {
        {"dd.txt", &TaskInstance::dd_text},
        {"pd.txt", &TaskInstance::pd_text},
        {"gold_domain.pddl", &TaskInstance::gold_df_text},
        {"gold_problem.pddl", &TaskInstance::gold_pf_text},
    };
    for (const auto& [name, member] : files) {
        std::filesystem::path path = dir / name;
        if (!std::filesystem::is_regular_file(path))
            throw DatasetError("task '" + task.task_id + "': missing " + name);
        task.*member = detail::read_text_file(path);
    }

    auto df = syntax::parse_domain_text(task.gold_df_text);
    auto pf = syntax::parse_problem_text(task.gold_pf_text);
    std::vector<Diagnostic> diags = df.diagnostics;
    diags.insert(diags.end(), pf.diagnostics.begin(), pf.diagnostics.end());
    if (df.ok() && pf.ok()) {
        auto lint = syntax::lint_pair(*df.ast, *pf.ast);
        diags.insert(diags.end(), lint.begin(), lint.end());
    }
    for (const auto& d : diags) {
        if (d.severity != Severity::error) continue;
        throw DatasetError("task '" + task.task_id + "': gold files are not clean: " +
                           format_diagnostic(d));
    }
    return task;
}

inline void require_unique_ids(const std::vector<TaskInstance>& tasks) {
    std::vector<std::string> ids;
    ids.reserve(tasks.size());
    for (const auto& t : tasks) ids.push_back(t.task_id);
    std::sort(ids.begin(), ids.end());
    auto dup = std::adjacent_find(ids.begin(), ids.end());
    if (dup != ids.end()) throw DatasetError("duplicate task id '" + *dup + "'");
}

inline std::vector<TaskInstance> load_dataset(const std::string& path) {
    std::filesystem::path root(path);
    if (!std::filesystem::is_directory(root))
        throw IoError("dataset directory '" + path + "' not found");
    std::vector<std::filesystem::path> dirs;
    for (const auto& entry : std::filesystem::directory_iterator(root))
        if (entry.is_directory()) dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end(),
              [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
    if (dirs.empty()) throw DatasetError("no task directories in '" + path + "'");

    std::vector<TaskInstance> tasks;
    tasks.reserve(dirs.size());
    for (const auto& dir : dirs) tasks.push_back(load_task(dir));
    require_unique_ids(tasks);
    return tasks;
}

} // namespace pddlkit::harness
