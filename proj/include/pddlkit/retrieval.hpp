#pragma once

// BM25 ranking of documentation sections against error feedback or code
// snippets, plus a cosine-similarity retriever over a configured embedder.
// Scores are deterministic; ties break by corpus order. The Okapi IDF here
// is ln(1 + (N - df + 0.5)/(df + 0.5)), clamped at zero defensively.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "pddlkit/corpus.hpp"
#include "pddlkit/errors.hpp"

namespace pddlkit::retrieval {

struct RetrieverConfig {
    enum class Kind { bm25, embedding };

    Kind kind = Kind::bm25;
    double k1 = 1.2;
    double b = 0.75;
    int top_k = 1;
    std::string embedder_model;   // embedding mode
    std::string vector_cache_path;  // optional sidecar for section vectors
};

struct ScoredSection {
    std::string section_id;
    double score = 0.0;

    friend bool operator==(const ScoredSection& a, const ScoredSection& b) {
        return a.section_id == b.section_id && a.score == b.score;
    }
};

/// lower-case, split on non-alphanumeric, drop a trailing 's' from terms of
/// length >= 4 so ":PRECONDITIONS" and "precondition" meet at one stem
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> terms;
    std::string current;
    auto flush = [&] {
        if (current.empty()) return;
        if (current.size() >= 4 && current.back() == 's') current.pop_back();
        terms.push_back(std::move(current));
        current.clear();
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        else
            flush();
    }
    flush();
    return terms;
}

class Bm25Index {
public:
    Bm25Index(const docs::DocCorpus& corpus, RetrieverConfig cfg = {}) : cfg_(cfg) {
        if (corpus.sections.empty()) throw ConfigError("cannot index an empty corpus");
        if (cfg_.k1 < 0) throw ConfigError("BM25 k1 must be >= 0");
        if (cfg_.b < 0 || cfg_.b > 1) throw ConfigError("BM25 b must be within [0, 1]");
        for (const auto& section : corpus.sections) {
            std::string text = section.type_name + " " + section.description;
            for (const auto& ex : section.examples) text += " " + ex;
            std::vector<std::string> terms = tokenize(text);
            std::map<std::string, int> counts;
            for (const auto& t : terms) ++counts[t];
            for (const auto& [term, _] : counts) ++doc_freq_[term];
            doc_len_.push_back(static_cast<double>(terms.size()));
            term_counts_.push_back(std::move(counts));
            section_ids_.push_back(section.section_id);
        }
        avg_len_ = std::accumulate(doc_len_.begin(), doc_len_.end(), 0.0) /
                   static_cast<double>(doc_len_.size());
    }

    std::size_t size() const { return section_ids_.size(); }
    double average_length() const { return avg_len_; }
    int document_frequency(const std::string& term) const {
        auto it = doc_freq_.find(term);
        return it == doc_freq_.end() ? 0 : it->second;
    }

    /// BM25 score of every section for the query, in corpus order. Each
    /// query term occurrence contributes (duplicates are not collapsed).
    std::vector<double> scores(const std::string& query) const {
        std::vector<double> out(size(), 0.0);
        std::vector<std::string> terms = tokenize(query);
        double n = static_cast<double>(size());
        for (const auto& term : terms) {
            auto df_it = doc_freq_.find(term);
            if (df_it == doc_freq_.end()) continue;
            double df = static_cast<double>(df_it->second);
            double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
            if (idf < 0.0) idf = 0.0;
            for (std::size_t d = 0; d < size(); ++d) {
                auto tf_it = term_counts_[d].find(term);
                if (tf_it == term_counts_[d].end()) continue;
                double tf = static_cast<double>(tf_it->second);
                double denom =
                    tf + cfg_.k1 * (1.0 - cfg_.b + cfg_.b * doc_len_[d] / avg_len_);
                out[d] += idf * tf * (cfg_.k1 + 1.0) / denom;
            }
        }
        return out;
    }

    const std::vector<std::string>& section_ids() const { return section_ids_; }
    const RetrieverConfig& config() const { return cfg_; }

private:
    RetrieverConfig cfg_;
    std::vector<std::map<std::string, int>> term_counts_;
    std::vector<double> doc_len_;
    std::map<std::string, int> doc_freq_;
    std::vector<std::string> section_ids_;
    double avg_len_ = 0.0;
};

inline Bm25Index build_index(const docs::DocCorpus& corpus, RetrieverConfig cfg = {}) {
    return Bm25Index(corpus, cfg);
}

namespace detail {

inline std::vector<ScoredSection> top_k_by_score(const std::vector<double>& scores,
                                                 const std::vector<std::string>& ids,
                                                 int top_k) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];  // stable: equal scores keep corpus order
    });
    std::vector<ScoredSection> out;
    for (std::size_t i = 0; i < order.size() && static_cast<int>(i) < top_k; ++i)
        out.push_back({ids[order[i]], scores[order[i]]});
    return out;
}

} // namespace detail

inline std::vector<ScoredSection> retrieve(const Bm25Index& index, const std::string& query,
                                           const RetrieverConfig& cfg) {
    if (tokenize(query).empty()) return {};
    return detail::top_k_by_score(index.scores(query), index.section_ids(), cfg.top_k);
}

inline std::vector<ScoredSection> retrieve(const Bm25Index& index, const std::string& query) {
    return retrieve(index, query, index.config());
}

// --- embedding retriever --------------------------------------------------

using EmbedFn = std::function<std::vector<double>(const std::string&)>;

class EmbeddingRetriever {
public:
    EmbeddingRetriever(const docs::DocCorpus& corpus, EmbedFn embed, RetrieverConfig cfg = {})
        : cfg_(cfg), embed_(std::move(embed)) {
        if (corpus.sections.empty()) throw ConfigError("cannot index an empty corpus");
        for (const auto& section : corpus.sections) {
            std::string text = section.type_name + " " + section.description;
            for (const auto& ex : section.examples) text += " " + ex;
            section_ids_.push_back(section.section_id);
            section_texts_.push_back(std::move(text));
        }
        if (!cfg_.vector_cache_path.empty()) load_cache();
    }

    std::vector<ScoredSection> retrieve(const std::string& query) {
        ensure_vectors();
        std::vector<double> qv = embed_checked(query);
        std::vector<double> scores;
        scores.reserve(section_ids_.size());
        for (const auto& sv : vectors_) scores.push_back(cosine(qv, sv));
        auto out = detail::top_k_by_score(scores, section_ids_, cfg_.top_k);
        if (!cfg_.vector_cache_path.empty() && cache_dirty_) save_cache();
        return out;
    }

    const std::vector<std::vector<double>>& section_vectors() {
        ensure_vectors();
        return vectors_;
    }

private:
    RetrieverConfig cfg_;
    EmbedFn embed_;
    std::vector<std::string> section_ids_;
    std::vector<std::string> section_texts_;
    std::vector<std::vector<double>> vectors_;
    bool cache_dirty_ = false;

    std::vector<double> embed_checked(const std::string& text) {
        try {
            return embed_(text);
        } catch (const std::exception& e) {
            throw RetrievalUnavailableError(std::string("embedder failed: ") + e.what());
        }
    }

    void ensure_vectors() {
        if (!vectors_.empty()) return;
        vectors_.reserve(section_ids_.size());
        for (const auto& text : section_texts_) vectors_.push_back(embed_checked(text));
        cache_dirty_ = true;
    }

    static double cosine(const std::vector<double>& a, const std::vector<double>& b) {
        if (a.size() != b.size() || a.empty()) return 0.0;
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            dot += a[i] * b[i];
            na += a[i] * a[i];
            nb += b[i] * b[i];
        }
        if (na == 0.0 || nb == 0.0) return 0.0;
        return dot / (std::sqrt(na) * std::sqrt(nb));
    }

    void load_cache() {
        std::ifstream in(cfg_.vector_cache_path);
        if (!in) return;  // no sidecar yet
        try {
            nlohmann::json j;
            in >> j;
            if (j.value("model", "") != cfg_.embedder_model) return;
            std::vector<std::vector<double>> loaded;
            for (const auto& id : section_ids_) {
                if (!j["vectors"].contains(id)) return;  // stale cache
                loaded.push_back(j["vectors"][id].get<std::vector<double>>());
            }
            vectors_ = std::move(loaded);
        } catch (const nlohmann::json::exception&) {
            // unreadable sidecar: recompute
        }
    }

    void save_cache() {
        nlohmann::json j;
        j["model"] = cfg_.embedder_model;
        j["vectors"] = nlohmann::json::object();
        for (std::size_t i = 0; i < section_ids_.size(); ++i)
            j["vectors"][section_ids_[i]] = vectors_[i];
        std::ofstream out(cfg_.vector_cache_path);
        if (out) out << j.dump() << "\n";
        cache_dirty_ = false;
    }
};

inline std::vector<ScoredSection> retrieve_embedding(const docs::DocCorpus& corpus,
                                                     const std::string& query,
                                                     const RetrieverConfig& cfg,
                                                     const EmbedFn& embedder) {
    EmbeddingRetriever retriever(corpus, embedder, cfg);
    return retriever.retrieve(query);
}

} // namespace pddlkit::retrieval
