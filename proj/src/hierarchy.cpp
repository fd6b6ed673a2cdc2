#include "pdc/hierarchy.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pdc/errors.hpp"
#include "pdc/util.hpp"

namespace pdc {

namespace {

// Clusters of one snapshot as sorted member lists, ordered by smallest member.
std::vector<std::vector<std::int32_t>> snapshot_clusters(
    const LevelSnapshot& snap) {
    std::map<std::int32_t, std::vector<std::int32_t>> by_label;
    for (std::size_t i = 0; i < snap.labels.size(); ++i)
        by_label[snap.labels[i]].push_back(static_cast<std::int32_t>(i));
    std::vector<std::vector<std::int32_t>> out;
    out.reserve(by_label.size());
    for (auto& [label, members] : by_label) out.push_back(std::move(members));
    std::sort(out.begin(), out.end(),
              [](const auto& x, const auto& y) { return x[0] < y[0]; });
    return out;
}

double cluster_score(const std::vector<std::int32_t>& members,
                     const SigmaMatrix& matrix, double factor) {
    double s = 0.0;
    for (std::size_t a = 0; a < members.size(); ++a)
        for (std::size_t b = a + 1; b < members.size(); ++b)
            s += matrix.sigma_at(members[a], members[b], factor);
    return s;
}

}  // namespace

ClusterHierarchy collect_clusters(const std::vector<LevelSnapshot>& snapshots,
                                  const SigmaMatrix& matrix) {
    ClusterHierarchy h;
    h.levels = static_cast<int>(snapshots.size());
    if (snapshots.empty()) return h;

    const std::size_t n = snapshots.front().labels.size();
    if (n > matrix.order())
        throw ConsistencyError("snapshot has more points than the matrix");

    std::set<std::vector<std::int32_t>> seen;
    for (std::size_t li = 0; li < snapshots.size(); ++li) {
        const LevelSnapshot& snap = snapshots[li];
        if (snap.level != static_cast<int>(li))
            throw ConsistencyError("snapshot levels must run 0.." +
                                   std::to_string(snapshots.size() - 1));
        if (snap.labels.size() != n)
            throw ConsistencyError("snapshot point counts differ across levels");

        auto clusters = snapshot_clusters(snap);
        // Each cluster must sit inside a single cluster of the level below.
        if (li > 0) {
            const auto& prev = snapshots[li - 1].labels;
            for (const auto& members : clusters) {
                const std::int32_t anchor = prev[members[0]];
                for (std::int32_t p : members)
                    if (prev[p] != anchor)
                        throw ConsistencyError(
                            "level " + std::to_string(snap.level) +
                            " does not refine level " +
                            std::to_string(snap.level - 1));
            }
        }

        for (auto& members : clusters) {
            if (!seen.insert(members).second) continue;
            if (members.size() < 2) {
                ++h.stats.dropped_singletons;
                continue;
            }
            const double score = cluster_score(members, matrix, snap.factor);
            if (score < 0.0) {
                ++h.stats.dropped_negative_score;
                continue;
            }
            if (score == 0.0) {
                ++h.stats.dropped_zero_score;
                continue;
            }
            ClusterRecord rec;
            rec.id = static_cast<int>(h.clusters.size()) + 1;
            rec.level = snap.level;
            rec.factor = snap.factor;
            rec.score = score;
            rec.size = static_cast<int>(members.size());
            rec.members = std::move(members);
            // Closest kept strict superset at a lower level. Earlier records
            // have lower or equal levels, so a reverse scan finds the
            // deepest one first.
            rec.parent_id = rec.id;
            for (auto it = h.clusters.rbegin(); it != h.clusters.rend(); ++it) {
                if (it->level >= rec.level) continue;
                if (it->members.size() <= rec.members.size()) continue;
                if (std::includes(it->members.begin(), it->members.end(),
                                  rec.members.begin(), rec.members.end())) {
                    rec.parent_id = it->id;
                    break;
                }
            }
            h.clusters.push_back(std::move(rec));
        }
    }
    return h;
}

std::vector<std::pair<std::int32_t, double>> term_score(
    const ClusterRecord& cluster, const SigmaMatrix& matrix,
    const std::vector<std::string>& terms) {
    std::vector<std::pair<std::int32_t, double>> out;
    out.reserve(cluster.members.size());
    for (std::int32_t i : cluster.members) {
        if (i < 0 || static_cast<std::size_t>(i) >= terms.size())
            throw ConsistencyError("cluster member " + std::to_string(i) +
                                   " is outside the term list");
        double s = 0.0;
        for (std::int32_t j : cluster.members)
            if (j != i) s += matrix.sigma_at(i, j, cluster.factor);
        out.emplace_back(i, s);
    }
    std::sort(out.begin(), out.end(), [&](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return terms[x.first] < terms[y.first];
    });
    return out;
}

std::string display_name(const std::string& term) {
    std::string s = term;
    if (s.rfind(kTagPrefix, 0) == 0) s.erase(0, std::string(kTagPrefix).size());
    const std::string sep(kBigramSep);
    for (std::size_t pos = s.find(sep); pos != std::string::npos;
         pos = s.find(sep, pos + 1))
        s.replace(pos, sep.size(), " ");
    std::replace(s.begin(), s.end(), '-', ' ');
    return s;
}

std::string topic_name_term(
    const std::vector<std::pair<std::int32_t, double>>& ranked,
    const std::vector<std::string>& terms) {
    if (ranked.empty()) return "";
    const std::size_t window = std::min<std::size_t>(ranked.size(), 20);
    const std::string sep(kBigramSep);
    const std::string* best_bigram = nullptr;
    for (std::size_t r = 0; r < window; ++r) {
        const std::string& t = terms[ranked[r].first];
        if (t.rfind(kTagPrefix, 0) == 0) return t;
        if (!best_bigram && t.find(sep) != std::string::npos) best_bigram = &t;
    }
    if (best_bigram) return *best_bigram;
    return terms[ranked[0].first];
}

std::vector<std::pair<std::string, double>> score_documents(
    const Corpus& corpus,
    const std::vector<std::pair<std::int32_t, double>>& ranked,
    const std::vector<std::string>& terms, int top_docs) {
    std::map<std::uint32_t, double> acc;
    for (const auto& [idx, s] : ranked) {
        if (s <= 0.0) continue;  // negative scores never penalize a document
        const auto* postings = corpus.postings(terms[idx]);
        if (!postings) continue;
        for (std::uint32_t d : *postings) acc[d] += s;
    }
    std::vector<std::pair<std::string, double>> out;
    out.reserve(acc.size());
    for (const auto& [d, s] : acc)
        if (s > 0.0) out.emplace_back(corpus.docs()[d].id, s);
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });
    if (top_docs >= 0 && out.size() > static_cast<std::size_t>(top_docs))
        out.resize(static_cast<std::size_t>(top_docs));
    return out;
}

std::vector<TopicSummary> build_topics(const ClusterHierarchy& hierarchy,
                                       const SigmaMatrix& matrix,
                                       const std::vector<std::string>& terms,
                                       const Corpus& corpus, int top_docs) {
    std::vector<TopicSummary> out;
    out.reserve(hierarchy.clusters.size());
    for (const ClusterRecord& rec : hierarchy.clusters) {
        auto ranked = term_score(rec, matrix, terms);
        TopicSummary t;
        t.cluster_id = rec.id;
        t.name_term = topic_name_term(ranked, terms);
        t.name = display_name(t.name_term);
        t.ranked_terms.reserve(ranked.size());
        for (const auto& [idx, s] : ranked)
            t.ranked_terms.emplace_back(terms[idx], s);
        t.ranked_docs = score_documents(corpus, ranked, terms, top_docs);
        out.push_back(std::move(t));
    }
    return out;
}

std::string serialize_topics(const ClusterHierarchy& hierarchy,
                             const std::vector<TopicSummary>& topics) {
    if (hierarchy.clusters.size() != topics.size())
        throw ConsistencyError("topic list does not match the cluster list");
    std::string out;
    for (std::size_t i = 0; i < topics.size(); ++i) {
        const ClusterRecord& rec = hierarchy.clusters[i];
        const TopicSummary& t = topics[i];
        if (t.cluster_id != rec.id)
            throw ConsistencyError("topic ids out of order");
        nlohmann::ordered_json j;
        j["id"] = rec.id;
        j["level"] = rec.level;
        j["factor"] = rec.factor;
        j["name"] = t.name;
        j["name_term"] = t.name_term;
        j["size"] = rec.size;
        j["score"] = rec.score;
        j["parent"] = rec.parent_id;
        nlohmann::ordered_json terms_j = nlohmann::ordered_json::array();
        for (const auto& [term, s] : t.ranked_terms)
            terms_j.push_back({term, s});
        j["terms"] = std::move(terms_j);
        nlohmann::ordered_json docs_j = nlohmann::ordered_json::array();
        for (const auto& [doc, s] : t.ranked_docs) docs_j.push_back({doc, s});
        j["docs"] = std::move(docs_j);
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::pair<ClusterHierarchy, std::vector<TopicSummary>> parse_topics(
    std::string_view text) {
    ClusterHierarchy h;
    std::vector<TopicSummary> topics;
    const auto lines = split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        if (lines[li].empty() || lines[li][0] == '#') continue;
        nlohmann::json j =
            nlohmann::json::parse(lines[li], nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded() || !j.is_object())
            throw ParseError("bad topic record", li + 1);
        try {
            ClusterRecord rec;
            rec.id = j.at("id").get<int>();
            rec.level = j.at("level").get<int>();
            rec.factor = j.at("factor").get<double>();
            rec.score = j.at("score").get<double>();
            rec.size = j.at("size").get<int>();
            rec.parent_id = j.at("parent").get<int>();
            TopicSummary t;
            t.cluster_id = rec.id;
            t.name = j.at("name").get<std::string>();
            t.name_term = j.at("name_term").get<std::string>();
            for (const auto& e : j.at("terms"))
                t.ranked_terms.emplace_back(e.at(0).get<std::string>(),
                                            e.at(1).get<double>());
            for (const auto& e : j.at("docs"))
                t.ranked_docs.emplace_back(e.at(0).get<std::string>(),
                                           e.at(1).get<double>());
            if (rec.id != static_cast<int>(h.clusters.size()) + 1)
                throw ParseError("topic ids must be consecutive from 1", li + 1);
            h.levels = std::max(h.levels, rec.level + 1);
            h.clusters.push_back(std::move(rec));
            topics.push_back(std::move(t));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("bad topic record: ") + e.what(),
                             li + 1);
        }
    }
    return {std::move(h), std::move(topics)};
}

}  // namespace pdc
