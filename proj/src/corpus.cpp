#include "pdc/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

#include "json.hpp"
#include "pdc/errors.hpp"
#include "pdc/util.hpp"

namespace pdc {

namespace {

// Fixed shipped English stopword list; binary-searched, so keep it sorted.
constexpr std::array<std::string_view, 133> kStopwords = {
    "about",   "above",   "after",      "again",   "against",    "all",
    "am",      "an",      "and",        "any",     "are",        "as",
    "at",      "be",      "because",    "been",    "before",     "being",
    "below",   "between", "both",       "but",     "by",         "can",
    "cannot",  "could",   "did",        "do",      "does",       "doing",
    "down",    "during",  "each",       "few",     "for",        "from",
    "further", "had",     "has",        "have",    "having",     "he",
    "her",     "here",    "hers",       "herself", "him",        "himself",
    "his",     "how",     "if",         "in",      "into",       "is",
    "it",      "its",     "itself",     "just",    "me",         "more",
    "most",    "my",      "myself",     "no",      "nor",        "not",
    "now",     "of",      "off",        "on",      "once",       "only",
    "or",      "other",   "our",        "ours",    "ourselves",  "out",
    "over",    "own",     "same",       "she",     "should",     "so",
    "some",    "such",    "than",       "that",    "the",        "their",
    "theirs",  "them",    "themselves", "then",    "there",      "these",
    "they",    "this",    "those",      "through", "to",         "too",
    "under",   "until",   "up",         "upon",    "us",         "very",
    "via",     "vs",      "was",        "we",      "were",       "what",
    "when",    "where",   "whether",    "which",   "while",      "who",
    "whom",    "whose",   "why",        "will",    "with",       "within",
    "without", "would",   "you",        "your",    "yours",      "yourself",
    "yourselves",
};

static_assert(std::is_sorted(kStopwords.begin(), kStopwords.end()));

std::string lowercase(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Raw token stream: lowercase maximal alphanumeric runs, in text order.
void raw_tokens(std::string_view text, std::vector<std::string>& out) {
    std::string cur;
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
}

bool kept_token(const std::string& tok) {
    return tok.size() >= 2 && !is_stopword(tok);
}

}  // namespace

bool is_stopword(std::string_view token) {
    return std::binary_search(kStopwords.begin(), kStopwords.end(), token);
}

std::set<std::string> tokenize(const Document& doc) {
    std::set<std::string> terms;

    // Adjacency runs over the concatenated title+abstract stream; stopwords
    // and short tokens stay in the stream so they still break bigrams.
    std::vector<std::string> stream;
    raw_tokens(doc.title, stream);
    raw_tokens(doc.abstract, stream);

    for (std::size_t i = 0; i < stream.size(); ++i) {
        if (!kept_token(stream[i])) continue;
        terms.insert(stream[i]);
        if (i + 1 < stream.size() && kept_token(stream[i + 1])) {
            std::string bigram = stream[i];
            bigram += kBigramSep;
            bigram += stream[i + 1];
            terms.insert(std::move(bigram));
        }
    }

    for (const std::string& tag : doc.tags) {
        if (tag.empty()) continue;
        terms.insert(std::string(kTagPrefix) + lowercase(tag));
    }
    return terms;
}

Corpus Corpus::ingest(std::string_view jsonl) {
    Corpus corpus;
    std::set<std::string> seen_ids;
    auto lines = split_lines(jsonl);

    for (std::size_t li = 0; li < lines.size(); ++li) {
        std::string_view line = lines[li];
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

        nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object())
            throw ParseError("malformed record", li + 1);

        Document doc;
        auto id_it = rec.find("id");
        if (id_it == rec.end() || !id_it->is_string() ||
            id_it->get<std::string>().empty())
            throw ParseError("record is missing a string \"id\"", li + 1);
        doc.id = id_it->get<std::string>();

        auto get_str = [&](const char* key) -> std::string {
            auto it = rec.find(key);
            if (it == rec.end() || it->is_null()) return {};
            if (!it->is_string())
                throw ParseError(std::string("field \"") + key + "\" must be a string",
                                 li + 1);
            return it->get<std::string>();
        };
        doc.title = get_str("title");
        doc.abstract = get_str("abstract");

        auto tags_it = rec.find("tags");
        if (tags_it != rec.end() && !tags_it->is_null()) {
            if (!tags_it->is_array())
                throw ParseError("field \"tags\" must be an array of strings", li + 1);
            for (const auto& t : *tags_it) {
                if (!t.is_string())
                    throw ParseError("field \"tags\" must be an array of strings",
                                     li + 1);
                doc.tags.push_back(t.get<std::string>());
            }
        }

        if (!seen_ids.insert(doc.id).second)
            throw DataError("duplicate document id \"" + doc.id + "\"");

        std::uint32_t pos = static_cast<std::uint32_t>(corpus.docs_.size());
        for (const std::string& term : tokenize(doc))
            corpus.index_[term].push_back(pos);
        corpus.docs_.push_back(std::move(doc));
    }
    return corpus;
}

Corpus Corpus::load(const std::filesystem::path& path) {
    return ingest(read_file(path));
}

const std::vector<std::uint32_t>* Corpus::postings(const std::string& term) const {
    auto it = index_.find(term);
    return it == index_.end() ? nullptr : &it->second;
}

std::string Corpus::serialize() const {
    std::string out;
    for (const Document& doc : docs_) {
        nlohmann::ordered_json rec;
        rec["id"] = doc.id;
        rec["title"] = doc.title;
        if (!doc.abstract.empty()) rec["abstract"] = doc.abstract;
        if (!doc.tags.empty()) rec["tags"] = doc.tags;
        out += rec.dump();
        out += '\n';
    }
    return out;
}

TermStats pair_stats(const Corpus& corpus, const std::string& s, const std::string& t) {
    if (s == t) throw std::invalid_argument("pair_stats requires two distinct terms");

    TermStats st;
    st.n = corpus.doc_count();
    const auto* ps = corpus.postings(s);
    const auto* pt = corpus.postings(t);
    st.n_s = ps ? static_cast<std::int64_t>(ps->size()) : 0;
    st.n_t = pt ? static_cast<std::int64_t>(pt->size()) : 0;
    if (ps && pt) {
        auto a = ps->begin(), b = pt->begin();
        while (a != ps->end() && b != pt->end()) {
            if (*a < *b) ++a;
            else if (*b < *a) ++b;
            else { ++st.n_st; ++a; ++b; }
        }
    }
    return st;
}

BackgroundStats BackgroundStats::from_corpus(const Corpus& corpus) {
    BackgroundStats bg;
    bg.n_docs = corpus.doc_count();
    for (const auto& [term, postings] : corpus.term_index())
        bg.counts[term] = static_cast<std::int64_t>(postings.size());
    return bg;
}

BackgroundStats BackgroundStats::parse(std::string_view text) {
    BackgroundStats bg;
    auto lines = split_lines(text);
    if (lines.empty() || lines[0].substr(0, 2) != "N=")
        throw ParseError("background stats must start with an \"N=<count>\" header", 1);

    std::string_view num = lines[0].substr(2);
    auto res = std::from_chars(num.data(), num.data() + num.size(), bg.n_docs);
    if (res.ec != std::errc{} || res.ptr != num.data() + num.size() || bg.n_docs < 0)
        throw ParseError("bad document count in background stats header", 1);

    for (std::size_t li = 1; li < lines.size(); ++li) {
        std::string_view line = lines[li];
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos || tab == 0)
            throw ParseError("expected \"<term>\\t<doc_count>\"", li + 1);
        std::string term(line.substr(0, tab));
        std::string_view cnt = line.substr(tab + 1);
        std::int64_t value = 0;
        auto cres = std::from_chars(cnt.data(), cnt.data() + cnt.size(), value);
        if (cres.ec != std::errc{} || cres.ptr != cnt.data() + cnt.size() || value < 0)
            throw ParseError("bad doc count for term \"" + term + "\"", li + 1);
        if (value > bg.n_docs)
            throw DataError("term \"" + term + "\" has doc count above N");
        if (!bg.counts.emplace(std::move(term), value).second)
            throw DataError("duplicate term in background stats at line " +
                            std::to_string(li + 1));
    }
    return bg;
}

BackgroundStats BackgroundStats::load(const std::filesystem::path& path) {
    return parse(read_file(path));
}

std::string BackgroundStats::serialize() const {
    std::string out = "N=" + std::to_string(n_docs) + "\n";
    for (const auto& [term, cnt] : counts) {
        out += term;
        out += '\t';
        out += std::to_string(cnt);
        out += '\n';
    }
    return out;
}

}  // namespace pdc
