#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pdc/corpus.hpp"
#include "pdc/hierarchy.hpp"

namespace pdc {

// Both measures walk the unordered pairs of the n best-ranked terms against
// document frequencies of a reference collection. n must be at least 2
// (std::domain_error) and terms must supply at least n entries
// (std::invalid_argument). Pairs whose conditioning frequency is zero are
// skipped and tallied into *skipped when given.
//
// umass:  sum over pairs (later m, earlier l) of log((D(m,l) + 1) / D(l))
// npmi:   sum over pairs of log(p_ml / (p_m p_l)) / -log(p_ml), where a zero
//         joint count is floored to 1e-12 in both logs and p_ml == 1 scores 0
double umass(const std::vector<std::string>& top_terms, const Corpus& ref,
             int n, std::int64_t* skipped = nullptr);
double npmi(const std::vector<std::string>& top_terms, const Corpus& ref,
            int n, std::int64_t* skipped = nullptr);

struct TopicCoherence {
    int cluster_id = 0;
    bool short_terms = false;  // cluster has fewer members than some n
    std::map<int, double> umass_sum;   // keyed by n (clamped to member count)
    std::map<int, double> umass_mean;  // per evaluated pair
    std::map<int, double> npmi_sum;
    std::map<int, double> npmi_mean;
};

struct CoherenceReport {
    std::vector<TopicCoherence> topics;
    std::map<int, double> agg_umass_mean;  // mean of per-topic sums
    std::map<int, double> agg_umass_sum;
    std::map<int, double> agg_npmi_mean;
    std::map<int, double> agg_npmi_sum;
    std::int64_t skipped_pairs = 0;
    int unique_top_terms = 0;   // distinct terms among the 20 best per topic
    double mean_top_df = 0.0;   // their mean document frequency, with repeats
};

CoherenceReport evaluate_coherence(const std::vector<TopicSummary>& topics,
                                   const Corpus& ref,
                                   std::vector<int> n_values);

// Tab-separated table: one row per topic, measure columns per n (sum and
// per-pair mean), then aggregate rows and trailing stat comments.
std::string coherence_table(const CoherenceReport& report);

}  // namespace pdc
