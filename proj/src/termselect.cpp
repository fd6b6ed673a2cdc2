#include "pdc/termselect.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "pdc/errors.hpp"
#include "pdc/util.hpp"

namespace pdc {

namespace {

// Exact binomial coefficient; safe for n <= 60 (peak ~1.2e17, intermediates
// stay far below the 128-bit limit).
unsigned __int128 binom_u128(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 r = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        r = r * static_cast<unsigned __int128>(n - k + i);
        r = r / static_cast<unsigned __int128>(i);
    }
    return r;
}

double log_binom(std::int64_t n, std::int64_t k) {
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

double hypergeom_tail(std::int64_t pop, std::int64_t successes,
                      std::int64_t draws, std::int64_t observed) {
    if (pop < 0 || successes < 0 || successes > pop || draws < 0 || draws > pop)
        throw std::domain_error("hypergeom_tail: population/successes/draws out of range");
    std::int64_t lo = std::max<std::int64_t>(0, draws + successes - pop);
    std::int64_t hi = std::min(draws, successes);
    if (observed < lo || observed > hi)
        throw std::domain_error("hypergeom_tail: observed outside the support");

    if (observed == lo) return 1.0;  // whole support

    if (pop <= 60) {
        unsigned __int128 num = 0;
        for (std::int64_t k = observed; k <= hi; ++k)
            num += binom_u128(successes, k) * binom_u128(pop - successes, draws - k);
        unsigned __int128 den = binom_u128(pop, draws);
        return static_cast<double>(static_cast<long double>(num) /
                                   static_cast<long double>(den));
    }

    // log-sum-exp over the tail terms
    double log_den = log_binom(pop, draws);
    std::vector<double> logs;
    logs.reserve(static_cast<std::size_t>(hi - observed + 1));
    for (std::int64_t k = observed; k <= hi; ++k)
        logs.push_back(log_binom(successes, k) +
                       log_binom(pop - successes, draws - k) - log_den);
    double mx = *std::max_element(logs.begin(), logs.end());
    double acc = 0.0;
    for (double lg : logs) acc += std::exp(lg - mx);
    double tail = std::exp(mx) * acc;
    return std::min(1.0, std::max(0.0, tail));
}

std::vector<std::size_t> benjamini_hochberg(const std::vector<double>& p_values,
                                            double fdr) {
    if (!(fdr > 0.0 && fdr < 1.0))
        throw std::domain_error("benjamini_hochberg: fdr must lie in (0, 1)");
    if (p_values.empty()) return {};

    std::vector<std::size_t> order(p_values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return p_values[a] < p_values[b];
    });

    double m = static_cast<double>(p_values.size());
    double threshold = -1.0;
    for (std::size_t r = p_values.size(); r >= 1; --r) {
        double p = p_values[order[r - 1]];
        if (p <= fdr * static_cast<double>(r) / m) {
            threshold = p;
            break;
        }
    }
    if (threshold < 0.0) return {};

    std::vector<std::size_t> selected;
    for (std::size_t i = 0; i < p_values.size(); ++i)
        if (p_values[i] <= threshold) selected.push_back(i);
    return selected;
}

std::vector<std::string> TermSet::terms() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const TermEntry& e : entries) out.push_back(e.term);
    return out;
}

std::string TermSet::serialize() const {
    std::string out;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        out += std::to_string(i);
        out += '\t';
        out += entries[i].term;
        out += '\t';
        out += std::to_string(entries[i].fg_count);
        out += '\t';
        out += fmt_double(entries[i].p_value);
        out += '\n';
    }
    return out;
}

TermSet TermSet::parse(std::string_view text) {
    TermSet set;
    auto lines = split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        std::string_view line = lines[li];
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_on(line, '\t');
        if (fields.size() != 4)
            throw ParseError("term-set line must have 4 tab-separated fields", li + 1);

        std::size_t index = 0;
        auto r0 = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), index);
        if (r0.ec != std::errc{} || index != set.entries.size())
            throw ParseError("term-set indices must be consecutive from 0", li + 1);

        TermEntry e;
        e.term = std::string(fields[1]);
        if (e.term.empty()) throw ParseError("empty term", li + 1);
        auto r2 = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), e.fg_count);
        if (r2.ec != std::errc{} || e.fg_count < 0)
            throw ParseError("bad foreground count", li + 1);
        char* endp = nullptr;
        std::string pv(fields[3]);
        e.p_value = std::strtod(pv.c_str(), &endp);
        if (endp != pv.c_str() + pv.size() || !(e.p_value >= 0.0 && e.p_value <= 1.0))
            throw ParseError("bad p-value", li + 1);
        set.entries.push_back(std::move(e));
    }
    return set;
}

TermSet TermSet::load(const std::filesystem::path& path) {
    return parse(read_file(path));
}

TermSet select_terms(const Corpus& fg, const BackgroundStats& bg, double fdr,
                     std::int64_t freq_cap, std::int64_t min_df) {
    if (freq_cap < 1) throw std::invalid_argument("select_terms: freq_cap must be >= 1");
    if (min_df < 1) throw std::invalid_argument("select_terms: min_df must be >= 1");
    std::int64_t v = fg.doc_count();
    if (bg.n_docs < v)
        throw DataError("background has fewer documents than the foreground");

    std::vector<TermEntry> candidates;
    std::vector<double> p_values;
    for (const auto& [term, postings] : fg.term_index()) {
        std::int64_t k_fg = static_cast<std::int64_t>(postings.size());
        if (k_fg < min_df) continue;
        std::int64_t n_bg = bg.count(term);
        if (n_bg < k_fg)
            throw DataError("term \"" + term +
                            "\" occurs in more foreground than background documents");
        TermEntry e;
        e.term = term;
        e.fg_count = k_fg;
        e.p_value = hypergeom_tail(bg.n_docs, n_bg, v, k_fg);
        p_values.push_back(e.p_value);
        candidates.push_back(std::move(e));
    }

    std::vector<std::size_t> picked = benjamini_hochberg(p_values, fdr);

    TermSet set;
    set.entries.reserve(picked.size());
    for (std::size_t i : picked) set.entries.push_back(candidates[i]);
    std::sort(set.entries.begin(), set.entries.end(),
              [](const TermEntry& a, const TermEntry& b) {
                  if (a.fg_count != b.fg_count) return a.fg_count > b.fg_count;
                  return a.term < b.term;
              });
    if (static_cast<std::int64_t>(set.entries.size()) > freq_cap)
        set.entries.resize(static_cast<std::size_t>(freq_cap));
    return set;
}

}  // namespace pdc
