#pragma once

// Batch execution driven by a JSON run configuration. One task's rounds are
// sequential; distinct tasks may run concurrently with isolated clients,
// traces, and transcripts. Provider or gateway failures abort the single
// task with an errored record, never the batch.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pddlkit/dataset.hpp"
#include "pddlkit/errors.hpp"
#include "pddlkit/gateway.hpp"
#include "pddlkit/http_provider.hpp"
#include "pddlkit/metrics.hpp"
#include "pddlkit/pipeline.hpp"

namespace pddlkit::harness {

struct ProviderSpec {
    enum class Type { replay, http };

    Type type = Type::replay;
    std::string script_path;      // replay mode
    gateway::ProviderConfig http; // http mode
};

struct RunConfig {
    pipeline::MethodVariant variant;
    planning::PlannerConfig planner;
    retrieval::RetrieverConfig retriever;
    ProviderSpec provider;
    std::string corpus_path;      // may be empty for variants that need no corpus
    std::string dataset_path;
    int max_concurrent_tasks = 4;
    unsigned random_seed = 0;     // reserved
    std::string output_dir = "out";
};

// Replay scripts: {"tasks": {id: {tag: [responses]}}, "default": {tag: [...]},
// "embeddings": {text: [floats]}}. A task's provider sees the default tags
// overridden per tag by its own entry.
struct ReplayScript {
    std::map<std::string, std::map<std::string, std::vector<std::string>>> tasks;
    std::map<std::string, std::vector<std::string>> defaults;
    std::map<std::string, std::vector<double>> embeddings;
};

namespace detail {

inline std::map<std::string, std::vector<std::string>> tag_map_from_json(
    const nlohmann::json& j, const std::string& where) {
    std::map<std::string, std::vector<std::string>> out;
    if (!j.is_object()) throw ConfigError(where + " must be an object of tag -> responses");
    for (const auto& [tag, responses] : j.items()) {
        if (!responses.is_array())
            throw ConfigError(where + " tag '" + tag + "' must map to an array");
        for (const auto& r : responses) out[tag].push_back(r.get<std::string>());
    }
    return out;
}

} // namespace detail

inline ReplayScript load_replay_script(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read replay script '" + path + "'");
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ConfigError("replay script '" + path + "' is not a JSON object");
    ReplayScript script;
    try {
        if (j.contains("default"))
            script.defaults = detail::tag_map_from_json(j.at("default"), "default");
        if (j.contains("tasks")) {
            for (const auto& [task_id, tags] : j.at("tasks").items())
                script.tasks[task_id] =
                    detail::tag_map_from_json(tags, "tasks." + task_id);
        }
        if (j.contains("embeddings")) {
            for (const auto& [text, vec] : j.at("embeddings").items())
                script.embeddings[text] = vec.get<std::vector<double>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("replay script '" + path + "': " + e.what());
    }
    return script;
}

inline std::shared_ptr<gateway::Provider> provider_for_task(const ReplayScript& script,
                                                            const std::string& task_id) {
    std::map<std::string, std::vector<std::string>> merged = script.defaults;
    auto it = script.tasks.find(task_id);
    if (it != script.tasks.end())
        for (const auto& [tag, responses] : it->second) merged[tag] = responses;
    return gateway::replay_provider(std::move(merged), script.embeddings);
}

namespace detail {

inline std::string resolve_against(const std::filesystem::path& base, const std::string& path) {
    if (path.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (base / p).lexically_normal().string();
}

} // namespace detail

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read run config '" + path + "'");
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ConfigError("run config '" + path + "' is not a JSON object");
    std::filesystem::path base = std::filesystem::path(path).parent_path();

    RunConfig cfg;
    try {
        if (j.contains("variant")) {
            const auto& v = j.at("variant");
            if (v.contains("generation")) {
                auto g = pipeline::generation_from_string(v.at("generation").get<std::string>());
                if (!g) throw ConfigError("unknown generation '" +
                                          v.at("generation").get<std::string>() + "'");
                cfg.variant.generation = *g;
            }
            if (v.contains("refinement")) {
                auto r = pipeline::refinement_from_string(v.at("refinement").get<std::string>());
                if (!r) throw ConfigError("unknown refinement '" +
                                          v.at("refinement").get<std::string>() + "'");
                cfg.variant.refinement = *r;
            }
            cfg.variant.max_rounds =
                cfg.variant.refinement == pipeline::MethodVariant::Refinement::none ? 0 : 3;
            if (v.contains("max_rounds")) cfg.variant.max_rounds = v.at("max_rounds").get<int>();
            if (v.contains("strict_algorithm"))
                cfg.variant.strict_algorithm = v.at("strict_algorithm").get<bool>();
        } else {
            cfg.variant.max_rounds = 0;
        }
        pipeline::validate_variant(cfg.variant);

        if (j.contains("planner")) {
            const auto& p = j.at("planner");
            if (p.contains("mode")) {
                std::string mode = p.at("mode").get<std::string>();
                if (mode == "builtin") cfg.planner.mode = planning::PlannerConfig::Mode::builtin;
                else if (mode == "external")
                    cfg.planner.mode = planning::PlannerConfig::Mode::external;
                else throw ConfigError("unknown planner mode '" + mode + "'");
            }
            cfg.planner.timeout_seconds =
                p.value("timeout_seconds", cfg.planner.timeout_seconds);
            cfg.planner.external_command =
                p.value("external_command", cfg.planner.external_command);
            cfg.planner.search_node_cap =
                p.value("search_node_cap", cfg.planner.search_node_cap);
            cfg.planner.grounding_cap = p.value("grounding_cap", cfg.planner.grounding_cap);
            cfg.planner.scratch_dir =
                detail::resolve_against(base, p.value("scratch_dir", std::string()));
        }

        if (j.contains("retriever")) {
            const auto& r = j.at("retriever");
            if (r.contains("kind")) {
                std::string kind = r.at("kind").get<std::string>();
                if (kind == "bm25") cfg.retriever.kind = retrieval::RetrieverConfig::Kind::bm25;
                else if (kind == "embedding")
                    cfg.retriever.kind = retrieval::RetrieverConfig::Kind::embedding;
                else throw ConfigError("unknown retriever kind '" + kind + "'");
            }
            cfg.retriever.k1 = r.value("k1", cfg.retriever.k1);
            cfg.retriever.b = r.value("b", cfg.retriever.b);
            cfg.retriever.top_k = r.value("top_k", cfg.retriever.top_k);
            cfg.retriever.embedder_model =
                r.value("embedder_model", cfg.retriever.embedder_model);
            cfg.retriever.vector_cache_path = detail::resolve_against(
                base, r.value("vector_cache_path", std::string()));
        }

        if (!j.contains("provider")) throw ConfigError("run config needs a provider block");
        const auto& p = j.at("provider");
        std::string type = p.value("type", "replay");
        if (type == "replay") {
            cfg.provider.type = ProviderSpec::Type::replay;
            if (!p.contains("script_path"))
                throw ConfigError("replay provider needs script_path");
            cfg.provider.script_path =
                detail::resolve_against(base, p.at("script_path").get<std::string>());
        } else if (type == "http") {
            cfg.provider.type = ProviderSpec::Type::http;
            cfg.provider.http.endpoint_url = p.value("endpoint_url", std::string());
            cfg.provider.http.model_name = p.value("model_name", std::string());
            cfg.provider.http.credential_env_var =
                p.value("credential_env_var", cfg.provider.http.credential_env_var);
            cfg.provider.http.request_timeout_seconds =
                p.value("request_timeout_seconds", cfg.provider.http.request_timeout_seconds);
            cfg.provider.http.max_retries = p.value("max_retries", cfg.provider.http.max_retries);
            cfg.provider.http.embedding_model =
                p.value("embedding_model", cfg.provider.http.embedding_model);
        } else {
            throw ConfigError("unknown provider type '" + type + "'");
        }

        cfg.corpus_path = detail::resolve_against(base, j.value("corpus_path", std::string()));
        if (!j.contains("dataset_path")) throw ConfigError("run config needs dataset_path");
        cfg.dataset_path =
            detail::resolve_against(base, j.at("dataset_path").get<std::string>());
        cfg.max_concurrent_tasks = j.value("max_concurrent_tasks", 4);
        if (cfg.max_concurrent_tasks < 1)
            throw ConfigError("max_concurrent_tasks must be >= 1");
        cfg.random_seed = j.value("random_seed", 0u);
        cfg.output_dir = detail::resolve_against(base, j.value("output_dir", std::string("out")));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("run config '" + path + "': " + e.what());
    }
    return cfg;
}

struct BatchResult {
    std::vector<RunRecord> records;
    MetricsReport report;
};

inline BatchResult run_batch(const RunConfig& cfg, std::ostream& human_out) {
    if (cfg.retriever.kind == retrieval::RetrieverConfig::Kind::embedding &&
        !cfg.retriever.vector_cache_path.empty() && cfg.max_concurrent_tasks > 1)
        throw ConfigError("a shared embedding vector cache requires max_concurrent_tasks = 1");

    std::vector<TaskInstance> tasks = load_dataset(cfg.dataset_path);

    docs::DocCorpus corpus;
    const docs::DocCorpus* corpus_ptr = nullptr;
    if (!cfg.corpus_path.empty()) {
        corpus = docs::load_corpus(cfg.corpus_path);
        corpus_ptr = &corpus;
    }

    ReplayScript script;
    std::shared_ptr<gateway::Provider> shared_provider;
    if (cfg.provider.type == ProviderSpec::Type::replay)
        script = load_replay_script(cfg.provider.script_path);
    else
        shared_provider = std::make_shared<gateway::HttpProvider>(cfg.provider.http);

    std::filesystem::path out_dir(cfg.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "traces", ec);
    if (!ec) std::filesystem::create_directories(out_dir / "transcripts", ec);
    if (ec) throw IoError("cannot create output directory '" + cfg.output_dir + "'");

    std::string label = pipeline::variant_label(cfg.variant);
    std::vector<RunRecord> records(tasks.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
            const TaskInstance& task = tasks[i];
            std::shared_ptr<gateway::Provider> provider =
                shared_provider ? shared_provider : provider_for_task(script, task.task_id);
            gateway::RetryPolicy retry;
            if (cfg.provider.type == ProviderSpec::Type::http)
                retry.max_retries = cfg.provider.http.max_retries;
            gateway::LlmClient client(provider, retry);
            try {
                pipeline::Pipeline pipe(cfg.variant, corpus_ptr, client, cfg.planner,
                                        cfg.retriever);
                pipeline::TaskInput input{task.task_id, task.dd_text, task.pd_text};
                pipeline::PipelineTrace trace = pipe.run_task(input);
                {
                    std::ofstream trace_out(out_dir / "traces" / (task.task_id + ".json"));
                    if (!trace_out)
                        throw IoError("cannot write trace for '" + task.task_id + "'");
                    trace_out << pipeline::trace_to_json(trace).dump(2) << "\n";
                }
                records[i] = evaluate_record(trace, task);
            } catch (const std::exception& e) {
                records[i] = errored_record(task.task_id, label, e.what());
            }
            try {
                client.save_transcript_jsonl(
                    (out_dir / "transcripts" / (task.task_id + ".jsonl")).string());
            } catch (const std::exception& e) {
                if (!records[i].error_note) records[i].error_note = e.what();
            }
        }
    };

    std::size_t n_workers = std::min<std::size_t>(
        tasks.size(), static_cast<std::size_t>(cfg.max_concurrent_tasks));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    BatchResult result;
    result.records = std::move(records);
    result.report = aggregate(result.records);
    emit_report(result.report, result.records, cfg.output_dir, human_out);
    return result;
}

} // namespace pddlkit::harness
