#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace pdc {

struct PipelineConfig {
    double fdr = 0.01;
    std::int64_t min_df = 3;
    std::int64_t freq_cap = 10000;
    int thr = 100;
    double del = 0.5;
    int k_seeds = 10;
    int max_passes = 30;
    std::uint64_t rng_seed = 1;
    int top_docs = 100;
    std::vector<int> n_values = {5, 10, 20};
    std::string url_template;
    std::size_t max_order = 20000;

    // Throws ConfigError on out-of-range values (thr >= 1, del > 0,
    // 0 < fdr < 1, every n >= 2, ...).
    void validate() const;

    // Shared setter behind the file, environment, and CLI layers. Unknown
    // keys and unparseable values throw ConfigError.
    void apply_kv(const std::string& key, const std::string& value);
    // Flat key=value lines; '#' comments and blank lines are ignored.
    void apply_file(std::string_view text);
    // PDC_<UPPERCASE_KEY> environment overrides, applied for every known key.
    void apply_env();

    // Stringized settings in key order, for the manifest.
    std::map<std::string, std::string> as_map() const;
};

// Stage runners shared by the CLI subcommands and the monolithic run. Each
// reads its inputs from files and writes its artifacts. Text artifacts open
// with a "# pdc:1 seed=<n>" provenance line; readers reject artifacts whose
// schema number differs.
struct ClusterOutcome {
    int levels = 0;
    long long pass_cap_hits = 0;
};
struct TopicsOutcome {
    int topics = 0;
};

void run_extract_terms(const PipelineConfig& cfg,
                       const std::filesystem::path& fg_path,
                       const std::filesystem::path& bg_path,
                       const std::filesystem::path& out_terms);
void run_build_matrix(const PipelineConfig& cfg,
                      const std::filesystem::path& fg_path,
                      const std::filesystem::path& terms_path,
                      const std::filesystem::path& out_matrix);
ClusterOutcome run_cluster(const PipelineConfig& cfg,
                           const std::filesystem::path& matrix_path,
                           const std::filesystem::path& out_levels);
TopicsOutcome run_topics(const PipelineConfig& cfg,
                         const std::filesystem::path& fg_path,
                         const std::filesystem::path& terms_path,
                         const std::filesystem::path& matrix_path,
                         const std::filesystem::path& levels_path,
                         const std::filesystem::path& out_topics);
void run_layout(const PipelineConfig& cfg,
                const std::filesystem::path& terms_path,
                const std::filesystem::path& topics_path,
                const std::filesystem::path& out_svg,
                const std::filesystem::path& out_grid);
void run_coherence(const PipelineConfig& cfg,
                   const std::filesystem::path& fg_path,
                   const std::filesystem::path& topics_path,
                   const std::filesystem::path& out_table);

// All stages in order into out_dir (created if needed), then manifest.json
// with the config, seed, input digests, level and topic counts, and
// per-stage status. Returns 0 on success. A stage failure stops the run,
// flags the stage in the manifest, and returns 1; the error also goes to
// stderr as "error: stage=<name>: <message>".
int run_pipeline(const PipelineConfig& cfg,
                 const std::filesystem::path& fg_path,
                 const std::filesystem::path& bg_path,
                 const std::filesystem::path& out_dir);

}  // namespace pdc
