#pragma once

// The six method variants and the iterative correction loop. Round 0 is
// initial generation; each later round refines on the previous round's
// solver feedback, up to max_rounds refinements or first success.
//
// Branching per round, by refinement mode and feedback:
//   code_retrieved  + DF syntax error  -> localize, retrieve (snippet+token
//                                         as query), refine_with_doc with
//                                         ERR_CODE and REL_DOC
//   feedback_retrieved + syntax error  -> retrieve (message as query),
//                                         refine_with_doc without ERR_CODE;
//                                         under strict_algorithm PF errors
//                                         drop to refine_no_doc instead
//   everything else that refines       -> refine_no_doc (no_doc mode, PF
//                                         errors under code_retrieved, all
//                                         semantic errors)
// Inconsistent feedback (syntax_error without a file, semantic_error with
// one) raises UnknownErrorTypeError. A timeout ends the loop without
// refinement: it carries no actionable error and the files may be correct.
//
// A refinement whose output yields no extractable DF or PF retains the
// previous pair and the round is recorded as a failed refinement.

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pddlkit/corpus.hpp"
#include "pddlkit/errors.hpp"
#include "pddlkit/extract.hpp"
#include "pddlkit/gateway.hpp"
#include "pddlkit/lint.hpp"
#include "pddlkit/parse.hpp"
#include "pddlkit/planner.hpp"
#include "pddlkit/prompts.hpp"
#include "pddlkit/retrieval.hpp"

namespace pddlkit::pipeline {

struct MethodVariant {
    enum class Generation {
        base,
        once_whole_doc,
        once_whole_examples,
        once_whole_descriptions,
        modular_specific_doc,
    };
    enum class Refinement { none, no_doc, feedback_retrieved, code_retrieved };

    Generation generation = Generation::base;
    Refinement refinement = Refinement::none;
    int max_rounds = 3;  // refinement rounds; 0 iff refinement == none
    bool strict_algorithm = false;
};

inline const char* to_string(MethodVariant::Generation g) {
    switch (g) {
        case MethodVariant::Generation::base: return "base";
        case MethodVariant::Generation::once_whole_doc: return "once-whole-doc";
        case MethodVariant::Generation::once_whole_examples: return "once-whole-examples";
        case MethodVariant::Generation::once_whole_descriptions:
            return "once-whole-descriptions";
        case MethodVariant::Generation::modular_specific_doc: return "modular";
    }
    return "base";
}

inline const char* to_string(MethodVariant::Refinement r) {
    switch (r) {
        case MethodVariant::Refinement::none: return "none";
        case MethodVariant::Refinement::no_doc: return "no-doc";
        case MethodVariant::Refinement::feedback_retrieved: return "feedback-retrieved";
        case MethodVariant::Refinement::code_retrieved: return "code-retrieved";
    }
    return "none";
}

inline std::optional<MethodVariant::Generation> generation_from_string(const std::string& s) {
    using G = MethodVariant::Generation;
    for (G g : {G::base, G::once_whole_doc, G::once_whole_examples, G::once_whole_descriptions,
                G::modular_specific_doc})
        if (s == to_string(g)) return g;
    return std::nullopt;
}

inline std::optional<MethodVariant::Refinement> refinement_from_string(const std::string& s) {
    using R = MethodVariant::Refinement;
    for (R r : {R::none, R::no_doc, R::feedback_retrieved, R::code_retrieved})
        if (s == to_string(r)) return r;
    return std::nullopt;
}

inline std::string variant_label(const MethodVariant& v) {
    return std::string(to_string(v.generation)) + "+" + to_string(v.refinement);
}

inline void validate_variant(const MethodVariant& v) {
    if (v.max_rounds < 0 || v.max_rounds > 3)
        throw ConfigError("max_rounds must be within [0, 3]");
    bool none = v.refinement == MethodVariant::Refinement::none;
    if (none != (v.max_rounds == 0))
        throw ConfigError("max_rounds must be 0 exactly when refinement is none");
}

struct TaskInput {
    std::string task_id;
    std::string dd_text;
    std::string pd_text;
};

struct GeneratedPair {
    std::string df_text;
    std::string pf_text;
    std::optional<syntax::DomainAst> df_ast;  // engaged iff df_text parses cleanly
    std::optional<syntax::ProblemAst> pf_ast;
};

inline GeneratedPair make_pair(std::string df_text, std::string pf_text) {
    GeneratedPair pair;
    pair.df_text = std::move(df_text);
    pair.pf_text = std::move(pf_text);
    auto df = syntax::parse_domain_text(pair.df_text);
    if (df.ok()) pair.df_ast = std::move(df.ast);
    auto pf = syntax::parse_problem_text(pair.pf_text);
    if (pf.ok()) pair.pf_ast = std::move(pf.ast);
    return pair;
}

struct ErrorLocalization {
    std::string snippet;
    std::optional<std::string> offending_token;
};

struct RoundRecord {
    int round = 0;  // 0 = initial generation
    GeneratedPair pair_before;
    GeneratedPair pair_after;
    planning::SolverFeedback feedback;
    std::optional<std::string> retrieval_query;
    std::vector<retrieval::ScoredSection> retrieved;
    std::optional<ErrorLocalization> localization;
    std::vector<std::string> prompt_tags;
    bool generation_failure = false;
    bool failed_refinement = false;
    bool retrieval_fallback = false;  // embedding retriever unavailable, BM25 used
};

struct PipelineTrace {
    std::string task_id;
    MethodVariant variant;
    std::vector<RoundRecord> rounds;

    const RoundRecord& final_round() const { return rounds.back(); }
};

namespace detail {

// strips markdown code fences; a localization answer is often fenced
inline std::string strip_fences(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        std::size_t first = line.find_first_not_of(" \t");
        if (first != std::string::npos && line.compare(first, 3, "```") == 0) continue;
        out << line << "\n";
    }
    std::string result = out.str();
    std::size_t begin = result.find_first_not_of(" \t\n\r");
    if (begin == std::string::npos) return "";
    std::size_t end = result.find_last_not_of(" \t\n\r");
    return result.substr(begin, end - begin + 1);
}

} // namespace detail

class Pipeline {
public:
    Pipeline(MethodVariant variant, const docs::DocCorpus* corpus, gateway::LlmClient& client,
             planning::PlannerConfig planner_cfg = {},
             retrieval::RetrieverConfig retriever_cfg = {})
        : variant_(variant),
          corpus_(corpus),
          client_(client),
          planner_cfg_(std::move(planner_cfg)),
          retriever_cfg_(retriever_cfg) {
        validate_variant(variant_);
        bool needs_corpus = variant_.generation != MethodVariant::Generation::base ||
                            variant_.refinement == MethodVariant::Refinement::feedback_retrieved ||
                            variant_.refinement == MethodVariant::Refinement::code_retrieved;
        if (needs_corpus && corpus_ == nullptr)
            throw ConfigError("variant '" + variant_label(variant_) + "' requires a corpus");
    }

    PipelineTrace run_task(const TaskInput& task) {
        PipelineTrace trace;
        trace.task_id = task.task_id;
        trace.variant = variant_;

        RoundRecord round0;
        round0.round = 0;
        round0.pair_after = generate_initial(task, round0);
        round0.generation_failure =
            round0.pair_after.df_text.empty() || round0.pair_after.pf_text.empty();
        round0.feedback =
            planning::solve(round0.pair_after.df_text, round0.pair_after.pf_text, planner_cfg_);
        trace.rounds.push_back(round0);

        GeneratedPair pair = trace.rounds.back().pair_after;
        for (int round = 1; round <= variant_.max_rounds; ++round) {
            const planning::SolverFeedback& previous = trace.rounds.back().feedback;
            if (previous.status == planning::SolveStatus::success ||
                previous.status == planning::SolveStatus::timeout)
                break;
            RoundRecord record;
            record.round = round;
            record.pair_before = pair;
            GeneratedPair refined = refine_once(pair, previous, record);
            if (refined.df_text.empty() || refined.pf_text.empty()) {
                record.failed_refinement = true;
                record.pair_after = pair;
            } else {
                pair = std::move(refined);
                record.pair_after = pair;
            }
            record.feedback =
                planning::solve(record.pair_after.df_text, record.pair_after.pf_text,
                                planner_cfg_);
            trace.rounds.push_back(std::move(record));
        }
        return trace;
    }

    /// Initial generation per the variant; prompt tags and modular call
    /// structure are recorded into `record`.
    GeneratedPair generate_initial(const TaskInput& task, RoundRecord& record) {
        using Generation = MethodVariant::Generation;
        if (variant_.generation == Generation::modular_specific_doc)
            return generate_modular(task, record);

        std::map<std::string, std::string> bindings{{"DD", task.dd_text}, {"PD", task.pd_text}};
        TemplateId id = TemplateId::base_generate;
        std::string tag = "base";
        if (variant_.generation != Generation::base) {
            id = TemplateId::whole_doc_generate;
            tag = "whole-doc";
            docs::ViewMode mode = docs::ViewMode::whole;
            if (variant_.generation == Generation::once_whole_examples)
                mode = docs::ViewMode::examples_only;
            else if (variant_.generation == Generation::once_whole_descriptions)
                mode = docs::ViewMode::descriptions_only;
            bindings["DOC"] = docs::view(*corpus_, mode);
        }
        record.prompt_tags.push_back(tag);
        std::string response = client_.complete(render_prompt(id, bindings, tag));
        auto extracted = syntax::extract_pddl_blocks(response);
        return make_pair(extracted.df_text.value_or(""), extracted.pf_text.value_or(""));
    }

    /// One refinement step on `feedback`. Retrieval, localization, and tags
    /// are recorded into `record`.
    GeneratedPair refine_once(const GeneratedPair& pair,
                              const planning::SolverFeedback& feedback, RoundRecord& record) {
        using planning::SolveStatus;
        using Refinement = MethodVariant::Refinement;

        if (feedback.status == SolveStatus::syntax_error && !feedback.file)
            throw UnknownErrorTypeError("syntax_error feedback without a file attribution");
        if (feedback.status == SolveStatus::semantic_error && feedback.file)
            throw UnknownErrorTypeError("semantic_error feedback with a file attribution");
        if (feedback.status == SolveStatus::success ||
            feedback.status == SolveStatus::timeout)
            throw UnknownErrorTypeError(std::string("refine_once called on status '") +
                                        planning::to_string(feedback.status) + "'");

        std::string refine_tag = "refine-round-" + std::to_string(record.round);
        std::map<std::string, std::string> bindings{
            {"DF", pair.df_text}, {"PF", pair.pf_text}, {"FEEDBACK", feedback.message}};

        bool syntax = feedback.status == SolveStatus::syntax_error;
        bool df_error = syntax && feedback.file == FileKind::DF;
        bool with_doc = false;

        if (syntax && variant_.refinement == Refinement::code_retrieved && df_error) {
            ErrorLocalization loc = localize(pair.df_text, feedback, record);
            std::string query = loc.snippet;
            if (loc.offending_token) query += " " + *loc.offending_token;
            bindings["ERR_CODE"] = loc.snippet;
            bindings["REL_DOC"] = retrieve_for(query, record);
            with_doc = true;
        } else if (syntax && variant_.refinement == Refinement::feedback_retrieved &&
                   (df_error || !variant_.strict_algorithm)) {
            bindings["REL_DOC"] = retrieve_for(feedback.message, record);
            with_doc = true;
        }

        record.prompt_tags.push_back(refine_tag);
        TemplateId id = with_doc ? TemplateId::refine_with_doc : TemplateId::refine_no_doc;
        std::string response = client_.complete(render_prompt(id, bindings, refine_tag));
        auto extracted = syntax::extract_pddl_blocks(response);
        return make_pair(extracted.df_text.value_or(""), extracted.pf_text.value_or(""));
    }

private:
    MethodVariant variant_;
    const docs::DocCorpus* corpus_;
    gateway::LlmClient& client_;
    planning::PlannerConfig planner_cfg_;
    retrieval::RetrieverConfig retriever_cfg_;
    std::optional<retrieval::Bm25Index> bm25_;
    std::optional<retrieval::EmbeddingRetriever> embedding_;

    GeneratedPair generate_modular(const TaskInput& task, RoundRecord& record) {
        static const docs::Component order[] = {
            docs::Component::types,   docs::Component::predicates, docs::Component::actions,
            docs::Component::objects, docs::Component::init,       docs::Component::goal};
        std::string partial_df, partial_pf;
        for (docs::Component component : order) {
            const docs::DocSection& section = docs::section_for_component(*corpus_, component);
            std::string tag = std::string("modular-") + docs::to_string(component);
            record.prompt_tags.push_back(tag);
            std::map<std::string, std::string> bindings{
                {"DD", task.dd_text},
                {"PD", task.pd_text},
                {"SECTION_DOC", docs::render_section_text(section)},
                {"COMPONENT_KIND", docs::to_string(component)},
                {"PARTIAL_DF", partial_df},
                {"PARTIAL_PF", partial_pf}};
            std::string response = client_.complete(
                render_prompt(TemplateId::modular_generate, bindings, tag));
            auto extracted = syntax::extract_pddl_blocks(response);
            if (extracted.df_text) partial_df = *extracted.df_text;
            if (extracted.pf_text) partial_pf = *extracted.pf_text;
        }
        return make_pair(partial_df, partial_pf);
    }

    ErrorLocalization localize(const std::string& df_text,
                               const planning::SolverFeedback& feedback, RoundRecord& record) {
        record.prompt_tags.push_back("localize");
        std::map<std::string, std::string> bindings{{"DF", df_text},
                                                    {"FEEDBACK", feedback.message}};
        std::string response = client_.complete(
            render_prompt(TemplateId::localize_error_code, bindings, "localize"));
        ErrorLocalization loc;
        loc.snippet = detail::strip_fences(response);
        if (loc.snippet.empty()) loc.snippet = feedback.message;
        loc.offending_token = feedback.token;
        record.localization = loc;
        return loc;
    }

    // runs retrieval, records query and results, renders REL_DOC text
    std::string retrieve_for(const std::string& query, RoundRecord& record) {
        record.retrieval_query = query;
        std::vector<retrieval::ScoredSection> results;
        if (retriever_cfg_.kind == retrieval::RetrieverConfig::Kind::embedding) {
            try {
                if (!embedding_) {
                    embedding_.emplace(
                        *corpus_,
                        [this](const std::string& text) { return client_.embed(text); },
                        retriever_cfg_);
                }
                results = embedding_->retrieve(query);
            } catch (const RetrievalUnavailableError&) {
                record.retrieval_fallback = true;
                results = bm25_retrieve(query);
            }
        } else {
            results = bm25_retrieve(query);
        }
        record.retrieved = results;
        std::ostringstream rel_doc;
        bool first = true;
        for (const auto& scored : results) {
            const docs::DocSection* section = corpus_->find_by_id(scored.section_id);
            if (!section) continue;
            if (!first) rel_doc << "\n";
            first = false;
            rel_doc << docs::render_section_text(*section);
        }
        return rel_doc.str();
    }

    std::vector<retrieval::ScoredSection> bm25_retrieve(const std::string& query) {
        if (!bm25_) bm25_.emplace(*corpus_, retriever_cfg_);
        return retrieval::retrieve(*bm25_, query, retriever_cfg_);
    }
};

// --- trace serialization --------------------------------------------------

inline nlohmann::ordered_json pair_to_json(const GeneratedPair& pair) {
    return {{"df_text", pair.df_text},
            {"pf_text", pair.pf_text},
            {"df_parses", pair.df_ast.has_value()},
            {"pf_parses", pair.pf_ast.has_value()}};
}

inline nlohmann::ordered_json feedback_to_json(const planning::SolverFeedback& feedback) {
    nlohmann::ordered_json j;
    j["status"] = planning::to_string(feedback.status);
    j["file"] = feedback.file ? file_kind_label(*feedback.file) : "none";
    j["message"] = feedback.message;
    if (feedback.line) j["line"] = *feedback.line;
    if (feedback.token) j["token"] = *feedback.token;
    if (feedback.plan) {
        auto steps = nlohmann::ordered_json::array();
        for (const auto& step : feedback.plan->steps) {
            std::string s = "(" + step.name;
            for (const auto& a : step.args) s += " " + a;
            steps.push_back(s + ")");
        }
        j["plan"] = std::move(steps);
    }
    return j;
}

inline nlohmann::ordered_json trace_to_json(const PipelineTrace& trace) {
    nlohmann::ordered_json j;
    j["task_id"] = trace.task_id;
    j["variant"] = {{"generation", to_string(trace.variant.generation)},
                    {"refinement", to_string(trace.variant.refinement)},
                    {"max_rounds", trace.variant.max_rounds},
                    {"strict_algorithm", trace.variant.strict_algorithm}};
    auto rounds = nlohmann::ordered_json::array();
    for (const auto& r : trace.rounds) {
        nlohmann::ordered_json rj;
        rj["round"] = r.round;
        rj["pair_before"] = pair_to_json(r.pair_before);
        rj["pair_after"] = pair_to_json(r.pair_after);
        rj["feedback"] = feedback_to_json(r.feedback);
        if (r.retrieval_query) rj["retrieval_query"] = *r.retrieval_query;
        if (!r.retrieved.empty()) {
            auto sections = nlohmann::ordered_json::array();
            for (const auto& s : r.retrieved)
                sections.push_back({{"section_id", s.section_id}, {"score", s.score}});
            rj["retrieved"] = std::move(sections);
        }
        if (r.localization) {
            rj["localization"] = {{"snippet", r.localization->snippet}};
            if (r.localization->offending_token)
                rj["localization"]["offending_token"] = *r.localization->offending_token;
        }
        rj["prompt_tags"] = r.prompt_tags;
        rj["generation_failure"] = r.generation_failure;
        rj["failed_refinement"] = r.failed_refinement;
        rj["retrieval_fallback"] = r.retrieval_fallback;
        rounds.push_back(std::move(rj));
    }
    j["rounds"] = std::move(rounds);
    return j;
}

} // namespace pddlkit::pipeline
