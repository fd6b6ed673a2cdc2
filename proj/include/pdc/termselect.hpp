#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pdc/corpus.hpp"

namespace pdc {

// Upper tail P(X >= observed) for X ~ Hypergeometric(pop, successes, draws).
// Exact 128-bit combinatorics for pop <= 60, log-space lgamma otherwise.
// Throws std::domain_error when the arguments violate
//   0 <= successes <= pop, 0 <= draws <= pop,
//   max(0, draws + successes - pop) <= observed <= min(draws, successes).
double hypergeom_tail(std::int64_t pop, std::int64_t successes,
                      std::int64_t draws, std::int64_t observed);

// Step-up false-discovery-rate selection: sort ascending, find the largest
// rank k with p_(k) <= (k/m)*fdr, select everything at or below that p-value
// (ties at the threshold all included). Returns original indices, ascending.
// Throws std::domain_error unless 0 < fdr < 1.
std::vector<std::size_t> benjamini_hochberg(const std::vector<double>& p_values,
                                            double fdr);

struct TermEntry {
    std::string term;
    std::int64_t fg_count = 0;
    double p_value = 1.0;
};

// Selected vocabulary, ordered by descending foreground frequency with ties
// broken lexicographically. Line order in the serialized form is the index
// contract for the affinity matrix and the engine.
struct TermSet {
    std::vector<TermEntry> entries;

    std::size_t size() const { return entries.size(); }
    std::vector<std::string> terms() const;

    std::string serialize() const;  // "<index>\t<term>\t<fg_count>\t<p_value>"
    static TermSet parse(std::string_view text);
    static TermSet load(const std::filesystem::path& path);
};

// One-sided over-representation test of every foreground term with at least
// min_df foreground documents against the background, FDR-controlled, then
// capped to the freq_cap most frequent survivors.
// Throws DataError when a term's background count is below its foreground
// count or the background is smaller than the foreground.
TermSet select_terms(const Corpus& fg, const BackgroundStats& bg, double fdr,
                     std::int64_t freq_cap, std::int64_t min_df = 3);

}  // namespace pdc
