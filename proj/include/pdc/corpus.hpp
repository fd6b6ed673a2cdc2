#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace pdc {

// Terms live in three disjoint namespaces:
//   unigrams   lowercase alphanumeric tokens, length >= 2
//   bigrams    two unigrams joined by kBigramSep (a char illegal in unigrams)
//   tags       curated strings, lowercased verbatim, prefixed with kTagPrefix
inline constexpr std::string_view kBigramSep = "▁";
inline constexpr std::string_view kTagPrefix = "tag:";

struct Document {
    std::string id;
    std::string title;
    std::string abstract;
    std::vector<std::string> tags;
};

// 2x2 presence table for a term pair over N documents.
struct TermStats {
    std::int64_t n = 0;     // documents in the collection
    std::int64_t n_s = 0;   // documents containing s
    std::int64_t n_t = 0;   // documents containing t
    std::int64_t n_st = 0;  // documents containing both
};

bool is_stopword(std::string_view token);

// Document-level binary term presence: each term at most once per document.
std::set<std::string> tokenize(const Document& doc);

class Corpus {
public:
    Corpus() = default;

    // Parses line-oriented records ({"id","title","abstract","tags"}).
    // Throws ParseError with the offending line number, DataError on
    // duplicate ids.
    static Corpus ingest(std::string_view jsonl);
    static Corpus load(const std::filesystem::path& path);

    std::int64_t doc_count() const { return static_cast<std::int64_t>(docs_.size()); }
    const std::vector<Document>& docs() const { return docs_; }

    // term -> sorted positions of containing documents.
    const std::map<std::string, std::vector<std::uint32_t>>& term_index() const {
        return index_;
    }
    // nullptr when the term does not occur.
    const std::vector<std::uint32_t>* postings(const std::string& term) const;

    // Round-trippable record stream: ingest(serialize()) reproduces the corpus.
    std::string serialize() const;

private:
    std::vector<Document> docs_;
    std::map<std::string, std::vector<std::uint32_t>> index_;
};

// pre: s != t. Unknown terms contribute zero counts.
TermStats pair_stats(const Corpus& corpus, const std::string& s, const std::string& t);

// Document frequencies of a reference collection; either derived from a
// corpus or loaded from a precomputed stats file ("N=<count>" header, then
// "<term>\t<doc_count>" lines).
struct BackgroundStats {
    std::int64_t n_docs = 0;
    std::map<std::string, std::int64_t> counts;

    static BackgroundStats from_corpus(const Corpus& corpus);
    static BackgroundStats parse(std::string_view text);
    static BackgroundStats load(const std::filesystem::path& path);
    std::string serialize() const;

    std::int64_t count(const std::string& term) const {
        auto it = counts.find(term);
        return it == counts.end() ? 0 : it->second;
    }
};

}  // namespace pdc
