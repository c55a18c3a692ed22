#pragma once

// Prompt templates for every method variant. Placeholders use {{NAME}};
// rendering binds them all or fails. Bodies are marked [ADAPTED]: the
// wording is our reconstruction — kept faithful to the documented method
// stages (generate, localize, retrieve, refine) rather than quoted from any
// single source. Temperature is 0 for every template.

#include <map>
#include <string>

#include "pddlkit/errors.hpp"
#include "pddlkit/gateway.hpp"

namespace pddlkit::pipeline {

enum class TemplateId {
    base_generate,
    whole_doc_generate,
    modular_generate,
    refine_no_doc,
    refine_with_doc,
    localize_error_code,
};

inline const char* to_string(TemplateId id) {
    switch (id) {
        case TemplateId::base_generate: return "base_generate";
        case TemplateId::whole_doc_generate: return "whole_doc_generate";
        case TemplateId::modular_generate: return "modular_generate";
        case TemplateId::refine_no_doc: return "refine_no_doc";
        case TemplateId::refine_with_doc: return "refine_with_doc";
        case TemplateId::localize_error_code: return "localize_error_code";
    }
    return "base_generate";
}

namespace detail {

// [ADAPTED]
inline constexpr const char* kBaseGenerate = R"(You are given a natural language description of a planning domain and one of its planning problems. Write the corresponding PDDL domain file and problem file.

Domain description:
{{DD}}

Problem description:
{{PD}}

Use only STRIPS constructs with typing and negative preconditions. Output the complete domain file in one ```pddl code block beginning with (define (domain and the complete problem file in a second ```pddl code block beginning with (define (problem.)";

// [ADAPTED]
inline constexpr const char* kWholeDocGenerate = R"(You are given PDDL documentation, a natural language description of a planning domain, and one of its planning problems. Write the corresponding PDDL domain file and problem file, following the documentation.

Documentation:
{{DOC}}

Domain description:
{{DD}}

Problem description:
{{PD}}

Use only STRIPS constructs with typing and negative preconditions. Output the complete domain file in one ```pddl code block beginning with (define (domain and the complete problem file in a second ```pddl code block beginning with (define (problem.)";

// [ADAPTED]
inline constexpr const char* kModularGenerate = R"(You are writing PDDL files incrementally, one section at a time. Below are the partial files produced so far, the documentation for the next section, and the task descriptions.

Partial domain file:
{{PARTIAL_DF}}

Partial problem file:
{{PARTIAL_PF}}

Documentation for the next section:
{{SECTION_DOC}}

Domain description:
{{DD}}

Problem description:
{{PD}}

Extend the files with the {{COMPONENT_KIND}} section, keeping everything already written. Output the complete updated domain file in one ```pddl code block and the complete updated problem file in a second ```pddl code block.)";

// [ADAPTED]
inline constexpr const char* kRefineNoDoc = R"(The planning solver rejected the PDDL files below. Correct them.

Domain file:
{{DF}}

Problem file:
{{PF}}

Solver feedback:
{{FEEDBACK}}

Fix the error the solver reported without changing the modeled task. Output the corrected complete domain file in one ```pddl code block and the corrected complete problem file in a second ```pddl code block.)";

// [ADAPTED]
inline constexpr const char* kRefineWithDoc = R"(The planning solver rejected the PDDL files below. Correct them using the retrieved documentation.

Domain file:
{{DF}}

Problem file:
{{PF}}

Solver feedback:
{{FEEDBACK}}

Offending code:
{{ERR_CODE}}

Relevant documentation:
{{REL_DOC}}

Fix the error the solver reported without changing the modeled task. Output the corrected complete domain file in one ```pddl code block and the corrected complete problem file in a second ```pddl code block.)";

// [ADAPTED] — variant of kRefineWithDoc without the offending-code block,
// used when no localized snippet accompanies the feedback
inline constexpr const char* kRefineWithDocNoCode = R"(The planning solver rejected the PDDL files below. Correct them using the retrieved documentation.

Domain file:
{{DF}}

Problem file:
{{PF}}

Solver feedback:
{{FEEDBACK}}

Relevant documentation:
{{REL_DOC}}

Fix the error the solver reported without changing the modeled task. Output the corrected complete domain file in one ```pddl code block and the corrected complete problem file in a second ```pddl code block.)";

// [ADAPTED]
inline constexpr const char* kLocalizeErrorCode = R"(The planning solver rejected the domain file below.

Domain file:
{{DF}}

Solver feedback:
{{FEEDBACK}}

Quote the exact snippet of the domain file that caused this error. Output only the offending snippet, with no explanation.)";

inline const char* body_for(TemplateId id, bool has_err_code) {
    switch (id) {
        case TemplateId::base_generate: return kBaseGenerate;
        case TemplateId::whole_doc_generate: return kWholeDocGenerate;
        case TemplateId::modular_generate: return kModularGenerate;
        case TemplateId::refine_no_doc: return kRefineNoDoc;
        case TemplateId::refine_with_doc:
            return has_err_code ? kRefineWithDoc : kRefineWithDocNoCode;
        case TemplateId::localize_error_code: return kLocalizeErrorCode;
    }
    return kBaseGenerate;
}

} // namespace detail

/// Renders a template into a single-user-message ChatRequest at temperature
/// 0. Every placeholder in the body must be bound and every binding must be
/// used; ERR_CODE is the one optional binding (refine_with_doc only).
inline gateway::ChatRequest render_prompt(TemplateId id,
                                          const std::map<std::string, std::string>& bindings,
                                          const std::string& tag) {
    bool has_err_code = bindings.count("ERR_CODE") > 0;
    std::string body = detail::body_for(id, has_err_code);

    std::map<std::string, bool> used;
    for (const auto& [key, _] : bindings) used[key] = false;

    std::string rendered;
    rendered.reserve(body.size());
    std::size_t pos = 0;
    while (pos < body.size()) {
        std::size_t open = body.find("{{", pos);
        if (open == std::string::npos) {
            rendered.append(body, pos, std::string::npos);
            break;
        }
        rendered.append(body, pos, open - pos);
        std::size_t close = body.find("}}", open + 2);
        if (close == std::string::npos)
            throw ConfigError(std::string("template ") + to_string(id) +
                              " has an unterminated placeholder");
        std::string name = body.substr(open + 2, close - open - 2);
        auto it = bindings.find(name);
        if (it == bindings.end())
            throw ConfigError(std::string("unbound placeholder '") + name + "' in template " +
                              to_string(id));
        rendered += it->second;
        used[name] = true;
        pos = close + 2;
    }
    for (const auto& [key, was_used] : used) {
        if (!was_used)
            throw ConfigError(std::string("binding '") + key + "' is not used by template " +
                              to_string(id));
    }

    gateway::ChatRequest request;
    request.messages.push_back({"user", std::move(rendered)});
    request.temperature = 0.0;
    request.tag = tag;
    return request;
}

} // namespace pddlkit::pipeline
