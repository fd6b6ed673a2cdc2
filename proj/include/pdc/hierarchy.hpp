#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pdc/affinity.hpp"
#include "pdc/corpus.hpp"
#include "pdc/engine.hpp"

namespace pdc {

// A kept cluster. Ids start at 1 and follow scan order: levels low to high,
// clusters within a level by smallest member index. parent_id names the kept
// strict superset at the closest lower level; level-0 clusters (and clusters
// whose ancestors were all dropped) are their own parents.
struct ClusterRecord {
    int id = 0;
    int level = 0;
    double factor = 0.0;
    double score = 0.0;  // pair sum at the birth level's offset
    int parent_id = 0;
    int size = 0;
    std::vector<std::int32_t> members;  // sorted; may be empty on deserialized records
};

struct HierarchyStats {
    int dropped_singletons = 0;
    int dropped_zero_score = 0;  // borderline: score exactly 0
    int dropped_negative_score = 0;
};

struct ClusterHierarchy {
    std::vector<ClusterRecord> clusters;  // clusters[id - 1]
    int levels = 0;
    HierarchyStats stats;

    const ClusterRecord& by_id(int id) const { return clusters.at(id - 1); }
};

// Walks the level snapshots low to high, records each distinct member set at
// its first appearance, drops singletons and clusters with score <= 0, and
// links parents. Validates that every level refines the previous one.
ClusterHierarchy collect_clusters(const std::vector<LevelSnapshot>& snapshots,
                                  const SigmaMatrix& matrix);

// Per-term affinity totals within the cluster at its birth offset, sorted
// descending with ties broken by the term string.
std::vector<std::pair<std::int32_t, double>> term_score(
    const ClusterRecord& cluster, const SigmaMatrix& matrix,
    const std::vector<std::string>& terms);

// Human form of a term: the tag namespace prefix is stripped and separator
// characters become spaces.
std::string display_name(const std::string& term);

// Naming term from the 20 best-ranked terms: the best tag if any, otherwise
// the best bigram, otherwise the best term overall. Empty ranking -> "".
std::string topic_name_term(
    const std::vector<std::pair<std::int32_t, double>>& ranked,
    const std::vector<std::string>& terms);

// Documents ranked by the sum of positive term scores over cluster terms they
// contain; zero-score documents are omitted, ties break by ascending id, and
// the list is cut to top_docs.
std::vector<std::pair<std::string, double>> score_documents(
    const Corpus& corpus,
    const std::vector<std::pair<std::int32_t, double>>& ranked,
    const std::vector<std::string>& terms, int top_docs);

struct TopicSummary {
    int cluster_id = 0;
    std::string name;       // display form
    std::string name_term;  // raw member term the name came from
    std::vector<std::pair<std::string, double>> ranked_terms;  // all members
    std::vector<std::pair<std::string, double>> ranked_docs;
};

std::vector<TopicSummary> build_topics(const ClusterHierarchy& hierarchy,
                                       const SigmaMatrix& matrix,
                                       const std::vector<std::string>& terms,
                                       const Corpus& corpus, int top_docs);

// Line-oriented topic records: id, level, factor, name, size, score, parent,
// ranked terms, ranked docs. parse reconstructs enough of the hierarchy to
// drive layout (members themselves are not stored).
std::string serialize_topics(const ClusterHierarchy& hierarchy,
                             const std::vector<TopicSummary>& topics);
std::pair<ClusterHierarchy, std::vector<TopicSummary>> parse_topics(
    std::string_view text);

}  // namespace pdc
