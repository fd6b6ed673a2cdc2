#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pdc/pipeline.hpp"
#include "pdc/util.hpp"

namespace fs = std::filesystem;

namespace {

// Settings are layered: defaults, then config file, then PDC_* environment
// variables, then command-line flags.
struct CommonArgs {
    std::string config_path;
    std::int64_t seed = -1;  // -1 means "not given"
};

pdc::PipelineConfig make_config(const CommonArgs& args) {
    pdc::PipelineConfig cfg;
    if (!args.config_path.empty())
        cfg.apply_file(pdc::read_file(args.config_path));
    cfg.apply_env();
    if (args.seed >= 0) cfg.apply_kv("rng_seed", std::to_string(args.seed));
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "key=value settings file");
    cmd->add_option("--seed", args.seed, "random seed override");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"probabilistic distributional clustering of document terms"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string fg, bg, terms, matrix, levels, topics, out, grid;

    CLI::App* run = app.add_subcommand("run", "full pipeline into a directory");
    add_common(run, common);
    run->add_option("--fg", fg, "foreground corpus (jsonl)")->required();
    run->add_option("--bg", bg, "background corpus (jsonl) or stats file")->required();
    run->add_option("--out", out, "output directory")->required();

    CLI::App* c_terms = app.add_subcommand("extract-terms", "select the vocabulary");
    add_common(c_terms, common);
    c_terms->add_option("--fg", fg)->required();
    c_terms->add_option("--bg", bg)->required();
    c_terms->add_option("--out", out, "terms.tsv path")->required();

    CLI::App* c_matrix = app.add_subcommand("build-matrix", "pairwise affinity matrix");
    add_common(c_matrix, common);
    c_matrix->add_option("--fg", fg)->required();
    c_matrix->add_option("--terms", terms)->required();
    c_matrix->add_option("--out", out, "matrix.bin path")->required();

    CLI::App* c_cluster = app.add_subcommand("cluster", "divisive level schedule");
    add_common(c_cluster, common);
    c_cluster->add_option("--matrix", matrix)->required();
    c_cluster->add_option("--out", out, "levels.txt path")->required();

    CLI::App* c_topics = app.add_subcommand("topics", "cluster records and rankings");
    add_common(c_topics, common);
    c_topics->add_option("--fg", fg)->required();
    c_topics->add_option("--terms", terms)->required();
    c_topics->add_option("--matrix", matrix)->required();
    c_topics->add_option("--levels", levels)->required();
    c_topics->add_option("--out", out, "topics.jsonl path")->required();

    CLI::App* c_layout = app.add_subcommand("layout", "landscape SVG report");
    add_common(c_layout, common);
    c_layout->add_option("--terms", terms)->required();
    c_layout->add_option("--topics", topics)->required();
    c_layout->add_option("--out", out, "report.svg path")->required();
    c_layout->add_option("--grid", grid, "grid.tsv path (optional)");

    CLI::App* c_coh = app.add_subcommand("coherence", "topic coherence table");
    add_common(c_coh, common);
    c_coh->add_option("--fg", fg)->required();
    c_coh->add_option("--topics", topics)->required();
    c_coh->add_option("--out", out, "coherence.tsv path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const pdc::PipelineConfig cfg = make_config(common);
        if (run->parsed()) return pdc::run_pipeline(cfg, fg, bg, out);
        if (c_terms->parsed()) {
            pdc::run_extract_terms(cfg, fg, bg, out);
        } else if (c_matrix->parsed()) {
            pdc::run_build_matrix(cfg, fg, terms, out);
        } else if (c_cluster->parsed()) {
            pdc::run_cluster(cfg, matrix, out);
        } else if (c_topics->parsed()) {
            pdc::run_topics(cfg, fg, terms, matrix, levels, out);
        } else if (c_layout->parsed()) {
            const fs::path grid_path =
                grid.empty() ? fs::path(out).replace_extension(".grid.tsv")
                             : fs::path(grid);
            pdc::run_layout(cfg, terms, topics, out, grid_path);
        } else if (c_coh->parsed()) {
            pdc::run_coherence(cfg, fg, topics, out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
