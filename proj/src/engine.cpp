#include "pdc/engine.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <map>
#include <numeric>

#include "pdc/errors.hpp"

namespace pdc {

Partitioner::Partitioner(const SigmaMatrix& matrix, EngineOptions opts)
    : matrix_(&matrix),
      opts_(opts),
      rng_(opts.rng_seed),
      n_(static_cast<std::int32_t>(matrix.order())) {
    if (opts_.k_seeds < 1) throw std::invalid_argument("k_seeds must be >= 1");
    if (opts_.max_passes < 1) throw std::invalid_argument("max_passes must be >= 1");
    a_.assign(n_, 0);
    cnt_.assign(n_, 0);
    sum_.assign(n_, 0.0);
    sa_.assign(n_, 0);
    scnt_.assign(n_, 0);
    ssum_.assign(n_, 0.0);
    par_.assign(n_, 0.0);
    one_cluster();
}

void Partitioner::set_factor(double f) {
    factor_ = f;
    std::map<std::int32_t, std::vector<std::int32_t>> groups;
    for (std::int32_t i = 0; i < n_; ++i) groups[a_[i]].push_back(i);
    for (auto& [label, members] : groups) {
        double s = 0.0;
        for (std::size_t x = 0; x < members.size(); ++x)
            for (std::size_t y = x + 1; y < members.size(); ++y)
                s += sigma(members[x], members[y]);
        sum_[label] = s;
    }
}

void Partitioner::one_cluster() {
    std::fill(a_.begin(), a_.end(), 0);
    std::fill(cnt_.begin(), cnt_.end(), 0);
    std::fill(sum_.begin(), sum_.end(), 0.0);
    if (n_ == 0) return;
    cnt_[0] = n_;
    double s = 0.0;
    for (std::int32_t i = 0; i < n_; ++i)
        for (std::int32_t j = i + 1; j < n_; ++j) s += sigma(i, j);
    sum_[0] = s;
}

double Partitioner::objective() const {
    double total = 0.0;
    for (std::int32_t p = 0; p < n_; ++p)
        if (cnt_[p] > 0) total += sum_[p];
    return total;
}

double Partitioner::single_point_opt(const std::vector<std::int32_t>& b) {
    const std::size_t nb = b.size();
    int passes = 0;
    bool moved = true;
    while (moved) {
        moved = false;
        for (std::size_t m = 0; m < nb; ++m) {
            std::int32_t i = b[m];
            std::int32_t ic = sa_[i];
            for (std::int32_t p : b) par_[p] = 0.0;
            for (std::size_t j = 0; j < nb; ++j) {
                if (j == m) continue;
                std::int32_t k = b[j];
                par_[sa_[k]] += sigma(i, k);
            }
            double mx = par_[ic];
            std::int32_t best = ic;
            for (std::int32_t cand : b) {
                if (mx < par_[cand]) {
                    mx = par_[cand];
                    best = cand;
                }
            }
            if (best != ic) {
                ssum_[ic] -= par_[ic];
                ssum_[best] += mx;
                --scnt_[ic];
                ++scnt_[best];
                sa_[i] = best;
                moved = true;
            }
        }
        if (++passes >= opts_.max_passes) {
            if (moved) ++stats_.pass_cap_hits;
            break;
        }
    }
    double total = 0.0;
    for (std::int32_t p : b) total += ssum_[p];
    return total;
}

double Partitioner::local_opt(std::vector<std::int32_t>& subset, double incumbent) {
    deterministic_shuffle(subset, rng_);
    double ysum = single_point_opt(subset);
    if (ysum > incumbent) {
        commit_trial(subset);
        ++stats_.commits;
    }
    return ysum;
}

void Partitioner::load_trial(const std::vector<std::int32_t>& subset,
                             const std::vector<std::int32_t>& trial_labels) {
    if (subset.size() != trial_labels.size())
        throw std::invalid_argument("load_trial: subset/label size mismatch");
    std::vector<char> member(n_, 0);
    for (std::int32_t p : subset) {
        if (p < 0 || p >= n_) throw std::invalid_argument("load_trial: point out of range");
        if (member[p]) throw std::invalid_argument("load_trial: duplicate point");
        member[p] = 1;
    }
    for (std::int32_t lbl : trial_labels)
        if (lbl < 0 || lbl >= n_ || !member[lbl])
            throw std::invalid_argument("load_trial: labels must be subset members");

    for (std::int32_t p : subset) {
        scnt_[p] = 0;
        ssum_[p] = 0.0;
    }
    for (std::size_t i = 0; i < subset.size(); ++i) {
        sa_[subset[i]] = trial_labels[i];
        ++scnt_[trial_labels[i]];
    }
    set_sum(subset);
}

void Partitioner::commit_trial(const std::vector<std::int32_t>& subset) {
    for (std::int32_t p : subset) {
        a_[p] = sa_[p];
        cnt_[p] = scnt_[p];
        sum_[p] = ssum_[p];
    }
}

void Partitioner::set_sum(const std::vector<std::int32_t>& subset) {
    for (std::int32_t p : subset) ssum_[p] = 0.0;
    for (std::size_t i = 0; i < subset.size(); ++i)
        for (std::size_t j = i + 1; j < subset.size(); ++j)
            if (sa_[subset[i]] == sa_[subset[j]])
                ssum_[sa_[subset[i]]] += sigma(subset[i], subset[j]);
}

void Partitioner::basic_split(const std::vector<std::int32_t>& b) {
    const std::size_t nb = b.size();
    if (nb == 0) return;

    std::int32_t label = a_[b[0]];
    if (label < 0)
        throw std::invalid_argument("basic_split: cluster label is negative");
    for (std::int32_t p : b)
        if (a_[p] != label)
            throw std::invalid_argument("basic_split: points are not one cluster");
    if (cnt_[label] != static_cast<std::int32_t>(nb))
        throw std::invalid_argument("basic_split: member list is incomplete");

    if (nb == 1) {
        std::int32_t p = b[0];
        a_[p] = -p - 1;
        cnt_[p] = 1;
        sum_[p] = 0.0;
        return;
    }

    // Per-point negative totals (each negative pair charged to both ends)
    // and the whole-cluster sum at the current offset.
    std::vector<double> neg(nb, 0.0);
    double whole = 0.0;
    for (std::size_t i = 0; i < nb; ++i)
        for (std::size_t j = i + 1; j < nb; ++j) {
            double xx = sigma(b[i], b[j]);
            whole += xx;
            if (xx < 0.0) {
                neg[i] += xx;
                neg[j] += xx;
            }
        }

    const double original = whole;
    double best = std::max(whole, sum_[label]);

    std::vector<std::size_t> order(nb);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (neg[x] != neg[y]) return neg[x] < neg[y];
        return b[x] < b[y];
    });

    std::vector<std::int32_t> work(b);  // sweep-order scratch, shuffled by local_opt

    int tried = 0;
    for (std::size_t si = 0; si < nb && tried < opts_.k_seeds; ++si) {
        std::size_t spos = order[si];
        if (!(neg[spos] < 0.0)) break;  // sorted: the rest are nonnegative too
        ++tried;
        std::int32_t seed = b[spos];

        // Affinity of each member to the seed; the seed's own entry is 0.
        std::vector<double> aff(nb, 0.0);
        double sm = 0.0;
        for (std::size_t j = 0; j < nb; ++j) {
            aff[j] = sigma(seed, b[j]);
            sm += aff[j];
        }

        // Non-seed members by descending affinity to the seed, ties by index.
        std::vector<std::size_t> by_aff;
        by_aff.reserve(nb - 1);
        for (std::size_t j = 0; j < nb; ++j)
            if (b[j] != seed) by_aff.push_back(j);
        std::stable_sort(by_aff.begin(), by_aff.end(),
                         [&](std::size_t x, std::size_t y) {
                             if (aff[x] != aff[y]) return aff[x] > aff[y];
                             return b[x] < b[y];
                         });
        std::size_t tp = 0;
        while (tp < by_aff.size() && aff[by_aff[tp]] > 0.0) ++tp;

        if (sm < 0.0) {
            // Trial: seed alone vs the rest. Sums follow analytically.
            std::int32_t rest = -1;
            for (std::int32_t p : b)
                if (p != seed) rest = (rest < 0) ? p : std::min(rest, p);
            for (std::int32_t p : b) {
                sa_[p] = rest;
                scnt_[p] = 0;
                ssum_[p] = 0.0;
            }
            sa_[seed] = seed;
            scnt_[rest] = static_cast<std::int32_t>(nb) - 1;
            ssum_[rest] = original - sm;
            scnt_[seed] = 1;
            ssum_[seed] = 0.0;
            ++stats_.split_trials;
            double t = local_opt(work, best);
            if (t > best) best = t;
        }

        // Trials: seed plus its k strongest positives vs the rest,
        // k = 1, 2, 4, ... doubling up to tp.
        std::size_t k = 1;
        while (k <= tp) {
            if (k + 1 < nb) {  // otherwise no points remain for the rest side
                std::int32_t rest = b[by_aff[k]];
                for (std::int32_t p : b) {
                    sa_[p] = rest;
                    scnt_[p] = 0;
                    ssum_[p] = 0.0;
                }
                sa_[seed] = seed;
                for (std::size_t j = 0; j < k; ++j) sa_[b[by_aff[j]]] = seed;
                scnt_[seed] = static_cast<std::int32_t>(k) + 1;
                scnt_[rest] = static_cast<std::int32_t>(nb - k - 1);
                set_sum(b);
                ++stats_.split_trials;
                double t = local_opt(work, best);
                if (t > best) best = t;
            }
            if (k * 2 <= tp) k *= 2;
            else if (k < tp) k = tp;
            else break;
        }
    }

    relabel(b);
}

void Partitioner::relabel(const std::vector<std::int32_t>& b) {
    // Canonical representative per live label: the smallest member index.
    std::map<std::int32_t, std::int32_t> canon;
    for (std::int32_t p : b) {
        auto [it, fresh] = canon.emplace(a_[p], p);
        if (!fresh) it->second = std::min(it->second, p);
    }

    struct Rec {
        std::int32_t canon;
        std::int32_t cnt;
        double sum;
    };
    std::vector<Rec> recs;
    for (std::int32_t p : b)
        if (cnt_[p] > 0) recs.push_back({canon.at(p), cnt_[p], sum_[p]});

    if (recs.size() == 1) {
        // No split survived: mark the whole cluster unsplittable.
        std::int32_t c = recs[0].canon;
        for (std::int32_t p : b) {
            a_[p] = -c - 1;
            cnt_[p] = 0;
            sum_[p] = 0.0;
        }
        cnt_[c] = recs[0].cnt;
        sum_[c] = recs[0].sum;
        return;
    }

    std::vector<std::int32_t> old(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) old[i] = a_[b[i]];
    for (std::size_t i = 0; i < b.size(); ++i) {
        a_[b[i]] = canon.at(old[i]);
        cnt_[b[i]] = 0;
        sum_[b[i]] = 0.0;
    }
    for (const Rec& r : recs) {
        cnt_[r.canon] = r.cnt;
        sum_[r.canon] = r.sum;
    }
}

int Partitioner::master_split(int thr) {
    if (thr < 1) throw std::invalid_argument("master_split: thr must be >= 1");
    bool progressed = true;
    while (progressed) {
        progressed = false;
        std::int32_t m = 0;
        while (m < n_) {
            while (m < n_ && (a_[m] < 0 || cnt_[m] <= thr)) ++m;
            if (m >= n_) break;
            progressed = true;
            std::int32_t label = a_[m];
            std::vector<std::int32_t> members;
            members.reserve(static_cast<std::size_t>(cnt_[m]));
            for (std::int32_t i = m; i < n_; ++i)
                if (a_[i] == label) members.push_back(i);
            if (static_cast<std::int32_t>(members.size()) != cnt_[m])
                throw ConsistencyError("cluster member scan disagrees with its count");
            basic_split(members);
        }
    }
    int flipped = 0;
    for (std::int32_t i = 0; i < n_; ++i) {
        if (a_[i] < 0) {
            a_[i] = -a_[i] - 1;
            ++flipped;
        }
    }
    return flipped;
}

std::int32_t Partitioner::max_live_cluster() const {
    std::int32_t mx = 0;
    for (std::int32_t p = 0; p < n_; ++p) mx = std::max(mx, cnt_[p]);
    return mx;
}

std::vector<LevelSnapshot> Partitioner::super_split(int thr, double del) {
    if (thr < 1) throw std::invalid_argument("super_split: thr must be >= 1");
    if (!(del > 0.0)) throw std::invalid_argument("super_split: del must be positive");

    set_factor(0.0);
    one_cluster();
    master_split(1);

    std::vector<LevelSnapshot> levels;
    levels.push_back(snapshot(0));

    int level = 0;
    while (max_live_cluster() > thr) {
        double next = -static_cast<double>(level + 1) * del;
        if (next < opts_.factor_floor)
            throw ConsistencyError(
                "offset schedule reached " + fmt_double(next) + " (floor " +
                fmt_double(opts_.factor_floor) + ") with a cluster of " +
                std::to_string(max_live_cluster()) + " points still above thr=" +
                std::to_string(thr));
        ++level;
        set_factor(next);
        master_split(thr);
        levels.push_back(snapshot(level));
    }
    return levels;
}

LevelSnapshot Partitioner::snapshot(int level) const {
    LevelSnapshot snap;
    snap.level = level;
    snap.factor = factor_;
    snap.objective = objective();
    snap.labels = a_;
    return snap;
}

std::string LevelSnapshot::serialize() const {
    std::string out = "level=" + std::to_string(level) +
                      " factor=" + fmt_double(factor) +
                      " objective=" + fmt_double(objective) + "\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out += std::to_string(i);
        out += '\t';
        out += std::to_string(labels[i]);
        out += '\n';
    }
    return out;
}

LevelSnapshot LevelSnapshot::parse(std::string_view text) {
    auto lines = split_lines(text);
    std::size_t first = 0;
    while (first < lines.size() &&
           (lines[first].empty() || lines[first][0] == '#'))
        ++first;
    if (first == lines.size()) throw ParseError("empty snapshot", 1);

    LevelSnapshot snap;
    {
        auto fields = split_on(lines[first], ' ');
        if (fields.size() != 3 || fields[0].substr(0, 6) != "level=" ||
            fields[1].substr(0, 7) != "factor=" || fields[2].substr(0, 10) != "objective=")
            throw ParseError("bad snapshot header", first + 1);
        auto lv = fields[0].substr(6);
        auto r = std::from_chars(lv.data(), lv.data() + lv.size(), snap.level);
        if (r.ec != std::errc{}) throw ParseError("bad snapshot level", first + 1);
        snap.factor = std::strtod(std::string(fields[1].substr(7)).c_str(), nullptr);
        snap.objective = std::strtod(std::string(fields[2].substr(10)).c_str(), nullptr);
    }
    for (std::size_t li = first + 1; li < lines.size(); ++li) {
        std::string_view line = lines[li];
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_on(line, '\t');
        if (fields.size() != 2) throw ParseError("bad snapshot line", li + 1);
        std::size_t point = 0;
        auto r0 = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), point);
        std::int32_t label = 0;
        auto r1 = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), label);
        if (r0.ec != std::errc{} || r1.ec != std::errc{} ||
            point != snap.labels.size() || label < 0)
            throw ParseError("bad snapshot line", li + 1);
        snap.labels.push_back(label);
    }
    return snap;
}

LevelSnapshot LevelSnapshot::load(const std::filesystem::path& path) {
    return parse(read_file(path));
}

std::string serialize_snapshots(const std::vector<LevelSnapshot>& snapshots) {
    std::string out;
    for (const LevelSnapshot& s : snapshots) out += s.serialize();
    return out;
}

std::vector<LevelSnapshot> parse_snapshots(std::string_view text) {
    std::vector<LevelSnapshot> out;
    auto lines = split_lines(text);
    std::string chunk;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        std::string_view line = lines[li];
        if (line.empty() || line[0] == '#') continue;
        if (line.substr(0, 6) == "level=") {
            if (!chunk.empty()) out.push_back(LevelSnapshot::parse(chunk));
            chunk.clear();
        } else if (chunk.empty()) {
            throw ParseError("expected a snapshot header", li + 1);
        }
        chunk += line;
        chunk += '\n';
    }
    if (!chunk.empty()) out.push_back(LevelSnapshot::parse(chunk));
    return out;
}

}  // namespace pdc
