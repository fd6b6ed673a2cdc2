#include "pdc/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "pdc/errors.hpp"
#include "pdc/util.hpp"

namespace pdc {

namespace {

constexpr double kEps = 1e-12;

void check_args(const std::vector<std::string>& top_terms, int n) {
    if (n < 2) throw std::domain_error("coherence needs n >= 2");
    if (top_terms.size() < static_cast<std::size_t>(n))
        throw std::invalid_argument("coherence needs at least n terms");
}

}  // namespace

double umass(const std::vector<std::string>& top_terms, const Corpus& ref,
             int n, std::int64_t* skipped) {
    check_args(top_terms, n);
    double sum = 0.0;
    for (int m = 1; m < n; ++m) {
        for (int l = 0; l < m; ++l) {
            const auto* pl = ref.postings(top_terms[l]);
            const std::int64_t dl = pl ? static_cast<std::int64_t>(pl->size()) : 0;
            if (dl == 0) {
                if (skipped) ++*skipped;
                continue;
            }
            const TermStats st = pair_stats(ref, top_terms[m], top_terms[l]);
            sum += std::log(static_cast<double>(st.n_st + 1) /
                            static_cast<double>(dl));
        }
    }
    return sum;
}

double npmi(const std::vector<std::string>& top_terms, const Corpus& ref,
            int n, std::int64_t* skipped) {
    check_args(top_terms, n);
    const double nd = static_cast<double>(ref.doc_count());
    double sum = 0.0;
    for (int m = 1; m < n; ++m) {
        for (int l = 0; l < m; ++l) {
            const TermStats st = pair_stats(ref, top_terms[m], top_terms[l]);
            if (st.n_s == 0 || st.n_t == 0) {
                if (skipped) ++*skipped;
                continue;
            }
            const double pm = static_cast<double>(st.n_s) / nd;
            const double pl = static_cast<double>(st.n_t) / nd;
            const double pml = static_cast<double>(st.n_st) / nd;
            if (pml == 1.0) continue;  // joint certainty carries no signal
            const double joint = st.n_st == 0 ? kEps : pml;
            sum += std::log(joint / (pm * pl)) / -std::log(joint);
        }
    }
    return sum;
}

CoherenceReport evaluate_coherence(const std::vector<TopicSummary>& topics,
                                   const Corpus& ref,
                                   std::vector<int> n_values) {
    std::sort(n_values.begin(), n_values.end());
    n_values.erase(std::unique(n_values.begin(), n_values.end()),
                   n_values.end());
    if (n_values.empty()) throw std::domain_error("no n values");
    for (int n : n_values)
        if (n < 2) throw std::domain_error("coherence needs n >= 2");

    CoherenceReport rep;
    for (const TopicSummary& t : topics) {
        std::vector<std::string> terms;
        terms.reserve(t.ranked_terms.size());
        for (const auto& [term, s] : t.ranked_terms) terms.push_back(term);

        TopicCoherence tc;
        tc.cluster_id = t.cluster_id;
        for (int n : n_values) {
            const int use_n =
                std::min<int>(n, static_cast<int>(terms.size()));
            if (use_n < n) tc.short_terms = true;
            if (use_n < 2) {
                tc.umass_sum[n] = tc.umass_mean[n] = 0.0;
                tc.npmi_sum[n] = tc.npmi_mean[n] = 0.0;
                continue;
            }
            const std::int64_t total =
                static_cast<std::int64_t>(use_n) * (use_n - 1) / 2;
            std::int64_t sk_u = 0, sk_n = 0;
            const double us = umass(terms, ref, use_n, &sk_u);
            const double ns = npmi(terms, ref, use_n, &sk_n);
            tc.umass_sum[n] = us;
            tc.umass_mean[n] = total > sk_u ? us / (total - sk_u) : 0.0;
            tc.npmi_sum[n] = ns;
            tc.npmi_mean[n] = total > sk_n ? ns / (total - sk_n) : 0.0;
            rep.skipped_pairs += sk_u + sk_n;
        }
        rep.topics.push_back(std::move(tc));
    }

    // No topics -> aggregates stay absent rather than pretending to be 0.
    if (!rep.topics.empty()) {
        for (int n : n_values) {
            double su = 0.0, sn = 0.0;
            for (const TopicCoherence& tc : rep.topics) {
                su += tc.umass_sum.at(n);
                sn += tc.npmi_sum.at(n);
            }
            rep.agg_umass_sum[n] = su;
            rep.agg_npmi_sum[n] = sn;
            const double cnt = static_cast<double>(rep.topics.size());
            rep.agg_umass_mean[n] = su / cnt;
            rep.agg_npmi_mean[n] = sn / cnt;
        }
    }

    std::set<std::string> uniq;
    std::int64_t slots = 0;
    double df_sum = 0.0;
    for (const TopicSummary& t : topics) {
        const std::size_t k = std::min<std::size_t>(t.ranked_terms.size(), 20);
        for (std::size_t i = 0; i < k; ++i) {
            const std::string& term = t.ranked_terms[i].first;
            uniq.insert(term);
            const auto* p = ref.postings(term);
            df_sum += p ? static_cast<double>(p->size()) : 0.0;
            ++slots;
        }
    }
    rep.unique_top_terms = static_cast<int>(uniq.size());
    rep.mean_top_df = slots > 0 ? df_sum / static_cast<double>(slots) : 0.0;
    return rep;
}

std::string coherence_table(const CoherenceReport& report) {
    std::vector<int> ns;
    if (!report.topics.empty())
        for (const auto& [n, v] : report.topics.front().umass_sum)
            ns.push_back(n);
    else
        for (const auto& [n, v] : report.agg_umass_sum) ns.push_back(n);

    std::string out = "topic\tshort";
    for (int n : ns) {
        const std::string s = std::to_string(n);
        out += "\tumass@" + s + "\tumass_pair_mean@" + s + "\tnpmi@" + s +
               "\tnpmi_pair_mean@" + s;
    }
    out += '\n';
    for (const TopicCoherence& tc : report.topics) {
        out += std::to_string(tc.cluster_id);
        out += tc.short_terms ? "\t1" : "\t0";
        for (int n : ns)
            out += "\t" + fmt_double(tc.umass_sum.at(n)) + "\t" +
                   fmt_double(tc.umass_mean.at(n)) + "\t" +
                   fmt_double(tc.npmi_sum.at(n)) + "\t" +
                   fmt_double(tc.npmi_mean.at(n));
        out += '\n';
    }
    if (!report.topics.empty()) {
        out += "mean\t-";
        for (int n : ns)
            out += "\t" + fmt_double(report.agg_umass_mean.at(n)) + "\t-\t" +
                   fmt_double(report.agg_npmi_mean.at(n)) + "\t-";
        out += "\nsum\t-";
        for (int n : ns)
            out += "\t" + fmt_double(report.agg_umass_sum.at(n)) + "\t-\t" +
                   fmt_double(report.agg_npmi_sum.at(n)) + "\t-";
        out += "\n";
    }
    out += "# skipped_pairs\t" + std::to_string(report.skipped_pairs);
    out += "\n# unique_top_terms\t" + std::to_string(report.unique_top_terms);
    out += "\n# mean_top_df\t" + fmt_double(report.mean_top_df);
    out += "\n";
    return out;
}

}  // namespace pdc
