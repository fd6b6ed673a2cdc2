#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pdc/affinity.hpp"
#include "pdc/util.hpp"

namespace pdc {

struct EngineOptions {
    int k_seeds = 10;             // negative seeds tried per split attempt
    int max_passes = 30;          // sweep cap per optimization call
    std::uint64_t rng_seed = 1;   // stream for the sweep-order shuffles
    double factor_floor = -100.0; // abort guard for the level schedule
};

struct EngineStats {
    long long pass_cap_hits = 0;  // sweeps stopped by max_passes while still moving
    long long split_trials = 0;
    long long commits = 0;
};

// One level of the divisive schedule: a full labeling of all points plus the
// offset it was produced under. Serialized form:
//   level=<n> factor=<value> objective=<value>
//   <point_index>\t<label>        (one line per point, ascending)
struct LevelSnapshot {
    int level = 0;
    double factor = 0.0;
    double objective = 0.0;
    std::vector<std::int32_t> labels;

    std::string serialize() const;
    static LevelSnapshot parse(std::string_view text);
    static LevelSnapshot load(const std::filesystem::path& path);
};

// A level file is the serialized snapshots back to back; '#' lines are
// comments. parse_snapshots splits on the "level=" header lines.
std::string serialize_snapshots(const std::vector<LevelSnapshot>& snapshots);
std::vector<LevelSnapshot> parse_snapshots(std::string_view text);

// Divisive partitioner over a fixed affinity matrix. Maintains the committed
// labeling a / a_cnt / a_sum plus shadow copies used by split trials; commits
// only strict improvements, so the committed objective never decreases at a
// fixed offset.
//
// Label discipline: a[i] is the label of point i; every live label is the
// smallest member index of its cluster (a[j] == j, cnt[j] > 0). Negative
// values -j-1 mark unsplittable clusters and appear only transiently inside
// master_split.
class Partitioner {
public:
    explicit Partitioner(const SigmaMatrix& matrix, EngineOptions opts = {});

    std::int32_t size() const { return n_; }
    double factor() const { return factor_; }

    // Changes the additive offset and recomputes every live cluster sum
    // under it, keeping the bookkeeping exact at the current offset.
    void set_factor(double f);

    // All points into cluster 0 with the full pair sum.
    void one_cluster();

    // Total committed objective: sum of a_sum over live labels.
    double objective() const;

    // Greedy sweeps over the shadow labeling of `subset`: each point moves to
    // the label (among subset positions) with the largest affinity total if
    // that strictly beats staying. A point whose own-cluster total is negative
    // may take an unused label, i.e. escape to a singleton. Returns the
    // subset's total shadow sum.
    // pre: shadow state initialized for `subset` (see load_trial).
    double single_point_opt(const std::vector<std::int32_t>& subset);

    // Shuffles the sweep order, runs single_point_opt, and commits the shadow
    // state iff it strictly beats `incumbent`. Returns the trial sum.
    double local_opt(std::vector<std::int32_t>& subset, double incumbent);

    // Attempts to split one committed cluster via negative-seed trials.
    // Improvements are committed; otherwise the cluster is marked
    // unsplittable with a negative label. Afterwards every surviving label is
    // canonical (smallest member).
    // pre: `members` is exactly the member list of one live cluster.
    void basic_split(const std::vector<std::int32_t>& members);

    // Repeatedly splits every cluster larger than thr, rescanning from index
    // 0, until all remaining oversized clusters are marked unsplittable.
    // Returns the number of points in unsplittable-marked clusters (their
    // labels are flipped back to nonnegative before returning).
    int master_split(int thr);

    // Full schedule: offset 0, one_cluster, master_split(1) -> level 0;
    // then, while any cluster exceeds thr, lower the offset by del and run
    // master_split(thr), snapshotting each level at offset -level*del.
    // Throws ConsistencyError if the offset would fall below factor_floor.
    std::vector<LevelSnapshot> super_split(int thr, double del);

    // Shadow-state setup for trials: assigns trial_labels over `subset`
    // (labels must themselves be subset members) and recomputes shadow
    // counts and sums from the matrix.
    void load_trial(const std::vector<std::int32_t>& subset,
                    const std::vector<std::int32_t>& trial_labels);

    // Copies shadow state into committed state over `subset`.
    void commit_trial(const std::vector<std::int32_t>& subset);

    LevelSnapshot snapshot(int level) const;

    const std::vector<std::int32_t>& labels() const { return a_; }
    const std::vector<std::int32_t>& counts() const { return cnt_; }
    const std::vector<double>& sums() const { return sum_; }
    const EngineStats& stats() const { return stats_; }

private:
    double sigma(std::int32_t i, std::int32_t j) const {
        return matrix_->sigma_at(static_cast<std::size_t>(i),
                                 static_cast<std::size_t>(j), factor_);
    }
    // Recomputes shadow sums from the shadow labels over `subset`.
    void set_sum(const std::vector<std::int32_t>& subset);
    // Canonicalizes labels after split attempts; single-survivor clusters are
    // negative-marked.
    void relabel(const std::vector<std::int32_t>& members);
    std::int32_t max_live_cluster() const;

    const SigmaMatrix* matrix_ = nullptr;
    EngineOptions opts_;
    EngineStats stats_;
    Rng rng_;
    std::int32_t n_ = 0;
    double factor_ = 0.0;

    std::vector<std::int32_t> a_, cnt_;
    std::vector<double> sum_;
    std::vector<std::int32_t> sa_, scnt_;  // shadow labeling
    std::vector<double> ssum_;
    std::vector<double> par_;  // per-label affinity accumulator
};

}  // namespace pdc
