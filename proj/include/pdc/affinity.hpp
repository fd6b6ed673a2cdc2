#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "pdc/corpus.hpp"
#include "pdc/termselect.hpp"

namespace pdc {

// Signed strength of association between two terms, in nats:
//   N * KL(observed 2x2 cell distribution || independence of the margins),
// positive when the pair co-occurs more often than independence predicts
// (n_st * N >= n_s * n_t), negative when less often, exactly 0 at equality
// or when either margin is degenerate (a term in no or in every document).
// pre: stats describe a consistent 2x2 table with n > 0.
double log_odds(const TermStats& stats);

// Symmetric pairwise matrix over a term set; the diagonal is 0 by convention
// and is not stored. On disk: 24-byte header ("PDC1" magic, schema as 4-byte
// unsigned, order as 8-byte unsigned, provenance seed as 8-byte unsigned,
// all little-endian), then the row-major lower triangle as 8-byte doubles.
// Loads are memory-mapped and reject schema mismatches.
class SigmaMatrix {
public:
    SigmaMatrix() = default;

    // Computes all pairs over the corpus; parallelized over rows, values
    // independent of the thread schedule. Throws DataError when a term is
    // absent from the corpus index, ConfigError when terms.size() exceeds
    // max_order.
    static SigmaMatrix build(const TermSet& terms, const Corpus& corpus,
                             std::size_t max_order = 20000, unsigned threads = 0);

    // In-memory construction from a packed lower triangle (tests, tooling).
    static SigmaMatrix from_lower_triangle(std::size_t order,
                                           std::vector<double> tri);

    static SigmaMatrix load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path, std::uint64_t seed = 0) const;

    std::size_t order() const { return order_; }

    // Stored value sigma0(i, j); 0 on the diagonal. Bounds-checked: throws
    // std::domain_error for indices outside [0, order).
    double sigma0(std::size_t i, std::size_t j) const;

    // sigma0 plus the additive prior offset; the diagonal stays 0 regardless
    // of the offset. This is the only read path the engine uses.
    double sigma_at(std::size_t i, std::size_t j, double factor) const {
        double base = sigma0(i, j);
        return i == j ? 0.0 : base + factor;
    }

private:
    struct Storage;
    std::size_t order_ = 0;
    std::shared_ptr<const Storage> store_;
    const double* tri_ = nullptr;  // order*(order-1)/2 entries

    static std::size_t tri_count(std::size_t order) {
        return order * (order - 1) / 2;
    }
};

}  // namespace pdc
