#pragma once

// Documentation corpus: typed sections of PDDL documentation served in the
// views the generation and retrieval stages consume. Storage is a JSON
// array of {section_id, type_name, documentation, examples[]} records (the
// struct field is `description`; the storage key follows the documentation
// card layout). A directory of one-record-per-file JSON is accepted too.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pddlkit/errors.hpp"

namespace pddlkit::docs {

inline const std::vector<std::string>& canonical_type_names() {
    static const std::vector<std::string> names = {
        "Domain", "Requirements", "Types",   "Predicates",   "Actions",
        "Problem", "Objects",      "InitialState", "Goal"};
    return names;
}

struct DocSection {
    std::string section_id;
    std::string type_name;
    std::string description;
    std::vector<std::string> examples;

    friend bool operator==(const DocSection& a, const DocSection& b) {
        return a.section_id == b.section_id && a.type_name == b.type_name &&
               a.description == b.description && a.examples == b.examples;
    }
    friend bool operator!=(const DocSection& a, const DocSection& b) { return !(a == b); }
};

struct DocCorpus {
    std::vector<DocSection> sections;
    std::string source_label;  // provenance only; excluded from equality

    const DocSection* find(const std::string& type_name) const {
        for (const auto& s : sections)
            if (s.type_name == type_name) return &s;
        return nullptr;
    }

    const DocSection* find_by_id(const std::string& section_id) const {
        for (const auto& s : sections)
            if (s.section_id == section_id) return &s;
        return nullptr;
    }

    friend bool operator==(const DocCorpus& a, const DocCorpus& b) {
        return a.sections == b.sections;
    }
    friend bool operator!=(const DocCorpus& a, const DocCorpus& b) { return !(a == b); }
};

namespace detail {

inline DocSection section_from_json(const nlohmann::json& j, const std::string& origin) {
    if (!j.is_object()) throw DatasetError(origin + ": corpus record is not an object");
    DocSection s;
    try {
        s.section_id = j.at("section_id").get<std::string>();
        s.type_name = j.at("type_name").get<std::string>();
        s.description = j.at("documentation").get<std::string>();
        if (j.contains("examples"))
            s.examples = j.at("examples").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError(origin + ": malformed corpus record: " + e.what());
    }
    return s;
}

inline void validate_corpus(const DocCorpus& corpus, const std::string& origin) {
    if (corpus.sections.empty()) throw DatasetError(origin + ": corpus is empty");
    const auto& canonical = canonical_type_names();
    std::vector<std::string> ids, types;
    for (const auto& s : corpus.sections) {
        if (std::find(canonical.begin(), canonical.end(), s.type_name) == canonical.end())
            throw DatasetError(origin + ": unknown type_name '" + s.type_name + "'");
        if (s.description.empty())
            throw DatasetError(origin + ": empty documentation in section '" + s.section_id +
                               "'");
        ids.push_back(s.section_id);
        types.push_back(s.type_name);
    }
    auto has_dup = [](std::vector<std::string>& v) {
        std::sort(v.begin(), v.end());
        return std::adjacent_find(v.begin(), v.end()) != v.end();
    };
    if (has_dup(ids)) throw DatasetError(origin + ": duplicate section_id");
    if (has_dup(types)) throw DatasetError(origin + ": duplicate type_name");
}

} // namespace detail

inline DocCorpus load_corpus(const std::string& path) {
    namespace fs = std::filesystem;
    DocCorpus corpus;
    corpus.source_label = path;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            std::ifstream in(file);
            if (!in) throw IoError("cannot read " + file.string());
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw DatasetError(file.string() + ": invalid JSON: " + e.what());
            }
            corpus.sections.push_back(detail::section_from_json(j, file.string()));
        }
    } else {
        std::ifstream in(path);
        if (!in) throw IoError("cannot read " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw DatasetError(path + ": invalid JSON: " + e.what());
        }
        if (!j.is_array()) throw DatasetError(path + ": corpus file must be a JSON array");
        for (const auto& rec : j) corpus.sections.push_back(detail::section_from_json(rec, path));
    }
    detail::validate_corpus(corpus, path);
    return corpus;
}

inline void save_corpus(const DocCorpus& corpus, const std::string& path) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& s : corpus.sections) {
        nlohmann::ordered_json rec;
        rec["section_id"] = s.section_id;
        rec["type_name"] = s.type_name;
        rec["documentation"] = s.description;
        rec["examples"] = s.examples;
        out.push_back(std::move(rec));
    }
    std::ofstream file(path);
    if (!file) throw IoError("cannot write " + path);
    file << out.dump(2) << "\n";
}

// --- views ----------------------------------------------------------------

enum class ViewMode { whole, examples_only, descriptions_only };

namespace detail {

inline void render_section(std::ostringstream& out, const DocSection& s, bool description,
                           bool examples) {
    out << "type_name: " << s.type_name << "\n";
    if (description) out << "documentation: " << s.description << "\n";
    if (examples) {
        for (const auto& ex : s.examples) {
            out << "Example:\n" << ex;
            if (ex.empty() || ex.back() != '\n') out << "\n";
        }
    }
}

} // namespace detail

inline std::string view(const DocCorpus& corpus, ViewMode mode) {
    std::ostringstream out;
    bool first = true;
    for (const auto& s : corpus.sections) {
        if (!first) out << "\n";
        first = false;
        detail::render_section(out, s, mode != ViewMode::examples_only,
                               mode != ViewMode::descriptions_only);
    }
    return out.str();
}

inline std::string view_section(const DocCorpus& corpus, const std::string& type_name) {
    const DocSection* s = corpus.find(type_name);
    if (!s) throw DatasetError("no section with type_name '" + type_name + "'");
    std::ostringstream out;
    detail::render_section(out, *s, true, true);
    return out.str();
}

inline std::string render_section_text(const DocSection& section) {
    std::ostringstream out;
    detail::render_section(out, section, true, true);
    return out.str();
}

// --- component mapping ----------------------------------------------------

enum class Component { types, predicates, actions, objects, init, goal };

inline const char* to_string(Component c) {
    switch (c) {
        case Component::types: return "types";
        case Component::predicates: return "predicates";
        case Component::actions: return "actions";
        case Component::objects: return "objects";
        case Component::init: return "init";
        case Component::goal: return "goal";
    }
    return "types";
}

inline const DocSection& section_for_component(const DocCorpus& corpus, Component component) {
    const char* type_name = nullptr;
    switch (component) {
        case Component::types: type_name = "Types"; break;
        case Component::predicates: type_name = "Predicates"; break;
        case Component::actions: type_name = "Actions"; break;
        case Component::objects: type_name = "Objects"; break;
        case Component::init: type_name = "InitialState"; break;
        case Component::goal: type_name = "Goal"; break;
    }
    const DocSection* s = corpus.find(type_name);
    if (!s)
        throw DatasetError(std::string("corpus lacks section '") + type_name +
                           "' required for component '" + to_string(component) + "'");
    return *s;
}

} // namespace pddlkit::docs
