#include "pdc/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <iostream>

#include "json.hpp"
#include "pdc/affinity.hpp"
#include "pdc/coherence.hpp"
#include "pdc/corpus.hpp"
#include "pdc/engine.hpp"
#include "pdc/errors.hpp"
#include "pdc/hierarchy.hpp"
#include "pdc/layout.hpp"
#include "pdc/termselect.hpp"
#include "pdc/util.hpp"

namespace pdc {

namespace {

constexpr int kArtifactSchema = 1;

// Key list doubles as the environment-override whitelist.
const char* const kConfigKeys[] = {
    "fdr",        "min_df",     "freq_cap", "thr",
    "del",        "k_seeds",    "max_passes", "rng_seed",
    "top_docs",   "n_values",   "url_template", "max_order",
};

std::string artifact_header(const PipelineConfig& cfg) {
    return "# pdc:" + std::to_string(kArtifactSchema) +
           " seed=" + std::to_string(cfg.rng_seed) + "\n";
}

// Reads a text artifact and enforces the schema number when the provenance
// line is present; hand-written files without one pass through untouched.
std::string read_artifact(const std::filesystem::path& path) {
    std::string text = read_file(path);
    if (text.rfind("# pdc:", 0) == 0) {
        int schema = 0;
        auto r = std::from_chars(text.data() + 6,
                                 text.data() + std::min<std::size_t>(text.size(), 30),
                                 schema);
        if (r.ec != std::errc{} || schema != kArtifactSchema)
            throw ConfigError("artifact schema in " + path.string() +
                              " is incompatible with schema " +
                              std::to_string(kArtifactSchema));
    }
    return text;
}

double parse_real(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end != value.c_str() + value.size() || value.empty())
        throw ConfigError("bad value for " + key + ": '" + value + "'");
    return v;
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
    std::int64_t v = 0;
    auto r = std::from_chars(value.data(), value.data() + value.size(), v);
    if (r.ec != std::errc{} || r.ptr != value.data() + value.size())
        throw ConfigError("bad value for " + key + ": '" + value + "'");
    return v;
}

// A background given as a stats file starts with its "N=" header; anything
// else is treated as a document stream.
BackgroundStats load_background(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    if (text.rfind("N=", 0) == 0) return BackgroundStats::parse(text);
    return BackgroundStats::from_corpus(Corpus::ingest(text));
}

}  // namespace

void PipelineConfig::validate() const {
    if (!(fdr > 0.0 && fdr < 1.0))
        throw ConfigError("fdr must lie strictly between 0 and 1");
    if (min_df < 0) throw ConfigError("min_df must be nonnegative");
    if (freq_cap < 1) throw ConfigError("freq_cap must be at least 1");
    if (thr < 1) throw ConfigError("thr must be at least 1");
    if (!(del > 0.0)) throw ConfigError("del must be positive");
    if (k_seeds < 1) throw ConfigError("k_seeds must be at least 1");
    if (max_passes < 1) throw ConfigError("max_passes must be at least 1");
    if (top_docs < 0) throw ConfigError("top_docs must be nonnegative");
    if (n_values.empty()) throw ConfigError("n_values must not be empty");
    for (int n : n_values)
        if (n < 2) throw ConfigError("every n value must be at least 2");
    if (max_order < 1) throw ConfigError("max_order must be at least 1");
}

void PipelineConfig::apply_kv(const std::string& key, const std::string& value) {
    if (key == "fdr") {
        fdr = parse_real(key, value);
    } else if (key == "min_df") {
        min_df = parse_int(key, value);
    } else if (key == "freq_cap") {
        freq_cap = parse_int(key, value);
    } else if (key == "thr") {
        thr = static_cast<int>(parse_int(key, value));
    } else if (key == "del") {
        del = parse_real(key, value);
    } else if (key == "k_seeds") {
        k_seeds = static_cast<int>(parse_int(key, value));
    } else if (key == "max_passes") {
        max_passes = static_cast<int>(parse_int(key, value));
    } else if (key == "rng_seed") {
        const std::int64_t v = parse_int(key, value);
        if (v < 0) throw ConfigError("rng_seed must be nonnegative");
        rng_seed = static_cast<std::uint64_t>(v);
    } else if (key == "top_docs") {
        top_docs = static_cast<int>(parse_int(key, value));
    } else if (key == "n_values") {
        std::vector<int> ns;
        for (std::string_view part : split_on(value, ','))
            ns.push_back(static_cast<int>(parse_int(key, std::string(part))));
        n_values = std::move(ns);
    } else if (key == "url_template") {
        url_template = value;
    } else if (key == "max_order") {
        const std::int64_t v = parse_int(key, value);
        if (v < 1) throw ConfigError("max_order must be at least 1");
        max_order = static_cast<std::size_t>(v);
    } else {
        throw ConfigError("unknown config key: " + key);
    }
}

void PipelineConfig::apply_file(std::string_view text) {
    auto lines = split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        std::string_view line = lines[li];
        const auto ltrim = line.find_first_not_of(" \t");
        if (ltrim == std::string_view::npos) continue;
        line.remove_prefix(ltrim);
        if (line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(li + 1) +
                              " is not key=value");
        auto trim = [](std::string_view s) {
            const auto b = s.find_first_not_of(" \t");
            if (b == std::string_view::npos) return std::string();
            const auto e = s.find_last_not_of(" \t");
            return std::string(s.substr(b, e - b + 1));
        };
        apply_kv(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void PipelineConfig::apply_env() {
    for (const char* key : kConfigKeys) {
        std::string env_name = "PDC_";
        for (const char* p = key; *p; ++p)
            env_name += static_cast<char>(std::toupper(static_cast<unsigned char>(*p)));
        if (const char* v = std::getenv(env_name.c_str()))
            apply_kv(key, v);
    }
}

std::map<std::string, std::string> PipelineConfig::as_map() const {
    std::string ns;
    for (std::size_t i = 0; i < n_values.size(); ++i) {
        if (i) ns += ',';
        ns += std::to_string(n_values[i]);
    }
    return {
        {"fdr", fmt_double(fdr)},
        {"min_df", std::to_string(min_df)},
        {"freq_cap", std::to_string(freq_cap)},
        {"thr", std::to_string(thr)},
        {"del", fmt_double(del)},
        {"k_seeds", std::to_string(k_seeds)},
        {"max_passes", std::to_string(max_passes)},
        {"rng_seed", std::to_string(rng_seed)},
        {"top_docs", std::to_string(top_docs)},
        {"n_values", ns},
        {"url_template", url_template},
        {"max_order", std::to_string(max_order)},
    };
}

void run_extract_terms(const PipelineConfig& cfg,
                       const std::filesystem::path& fg_path,
                       const std::filesystem::path& bg_path,
                       const std::filesystem::path& out_terms) {
    const Corpus fg = Corpus::load(fg_path);
    const BackgroundStats bg = load_background(bg_path);
    const TermSet terms =
        select_terms(fg, bg, cfg.fdr, cfg.freq_cap, cfg.min_df);
    write_file(out_terms, artifact_header(cfg) + terms.serialize());
}

void run_build_matrix(const PipelineConfig& cfg,
                      const std::filesystem::path& fg_path,
                      const std::filesystem::path& terms_path,
                      const std::filesystem::path& out_matrix) {
    const Corpus fg = Corpus::load(fg_path);
    const TermSet terms = TermSet::parse(read_artifact(terms_path));
    const SigmaMatrix m = SigmaMatrix::build(terms, fg, cfg.max_order);
    m.save(out_matrix, cfg.rng_seed);
}

ClusterOutcome run_cluster(const PipelineConfig& cfg,
                           const std::filesystem::path& matrix_path,
                           const std::filesystem::path& out_levels) {
    const SigmaMatrix m = SigmaMatrix::load(matrix_path);
    EngineOptions opts;
    opts.k_seeds = cfg.k_seeds;
    opts.max_passes = cfg.max_passes;
    opts.rng_seed = cfg.rng_seed;
    Partitioner part(m, opts);
    const auto snapshots = part.super_split(cfg.thr, cfg.del);
    write_file(out_levels, artifact_header(cfg) + serialize_snapshots(snapshots));
    return {static_cast<int>(snapshots.size()), part.stats().pass_cap_hits};
}

TopicsOutcome run_topics(const PipelineConfig& cfg,
                         const std::filesystem::path& fg_path,
                         const std::filesystem::path& terms_path,
                         const std::filesystem::path& matrix_path,
                         const std::filesystem::path& levels_path,
                         const std::filesystem::path& out_topics) {
    const Corpus fg = Corpus::load(fg_path);
    const TermSet terms = TermSet::parse(read_artifact(terms_path));
    const SigmaMatrix m = SigmaMatrix::load(matrix_path);
    const auto snapshots = parse_snapshots(read_artifact(levels_path));
    const ClusterHierarchy h = collect_clusters(snapshots, m);
    const auto topics = build_topics(h, m, terms.terms(), fg, cfg.top_docs);
    write_file(out_topics, artifact_header(cfg) + serialize_topics(h, topics));
    return {static_cast<int>(topics.size())};
}

void run_layout(const PipelineConfig& cfg,
                const std::filesystem::path& terms_path,
                const std::filesystem::path& topics_path,
                const std::filesystem::path& out_svg,
                const std::filesystem::path& out_grid) {
    const TermSet terms = TermSet::parse(read_artifact(terms_path));
    auto [h, topics] = parse_topics(read_artifact(topics_path));
    const Grid grid = fill_grid(h, static_cast<int>(terms.size()));
    const Skyline sky = build_skyline(grid);
    RenderOptions opts;
    opts.url_template = cfg.url_template;
    const std::string svg = emit_report(grid, sky, topics, opts);
    write_file(out_svg, "<!-- pdc:" + std::to_string(kArtifactSchema) +
                            " seed=" + std::to_string(cfg.rng_seed) + " -->\n" +
                            svg);
    write_file(out_grid, artifact_header(cfg) + grid_tsv(grid, sky));
}

void run_coherence(const PipelineConfig& cfg,
                   const std::filesystem::path& fg_path,
                   const std::filesystem::path& topics_path,
                   const std::filesystem::path& out_table) {
    const Corpus fg = Corpus::load(fg_path);
    auto [h, topics] = parse_topics(read_artifact(topics_path));
    const CoherenceReport rep = evaluate_coherence(topics, fg, cfg.n_values);
    write_file(out_table, artifact_header(cfg) + coherence_table(rep));
}

int run_pipeline(const PipelineConfig& cfg,
                 const std::filesystem::path& fg_path,
                 const std::filesystem::path& bg_path,
                 const std::filesystem::path& out_dir) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);

    const auto terms_path = out_dir / "terms.tsv";
    const auto matrix_path = out_dir / "matrix.bin";
    const auto levels_path = out_dir / "levels.txt";
    const auto topics_path = out_dir / "topics.jsonl";
    const auto svg_path = out_dir / "report.svg";
    const auto grid_path = out_dir / "grid.tsv";
    const auto coherence_path = out_dir / "coherence.tsv";

    nlohmann::ordered_json manifest;
    manifest["schema_version"] = kArtifactSchema;
    manifest["seed"] = cfg.rng_seed;
    manifest["config"] = cfg.as_map();
    manifest["inputs"] = nlohmann::ordered_json::object();
    const char* const stage_names[] = {"ingest",  "termselect", "matrix",
                                       "cluster", "topics",     "layout",
                                       "coherence"};
    manifest["stages"] = nlohmann::ordered_json::object();
    for (const char* s : stage_names) manifest["stages"][s] = "skipped";

    ClusterOutcome cluster_out;
    TopicsOutcome topics_out;
    const auto finish = [&](int code) {
        manifest["status"] = code == 0 ? "ok" : "failed";
        write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
        return code;
    };

    int stage_idx = 0;
    try {
        {
            const std::string text = read_file(fg_path);
            manifest["inputs"]["foreground"] = {
                {"path", fg_path.string()}, {"fnv1a64", fnv1a64_hex(text)}};
            Corpus::ingest(text);  // validate early, before any artifact
            manifest["stages"]["ingest"] = "ok";
        }
        stage_idx = 1;
        {
            const std::string text = read_file(bg_path);
            manifest["inputs"]["background"] = {
                {"path", bg_path.string()}, {"fnv1a64", fnv1a64_hex(text)}};
            run_extract_terms(cfg, fg_path, bg_path, terms_path);
            manifest["stages"]["termselect"] = "ok";
        }
        stage_idx = 2;
        run_build_matrix(cfg, fg_path, terms_path, matrix_path);
        manifest["stages"]["matrix"] = "ok";
        stage_idx = 3;
        cluster_out = run_cluster(cfg, matrix_path, levels_path);
        manifest["stages"]["cluster"] = "ok";
        manifest["levels"] = cluster_out.levels;
        manifest["pass_cap_hits"] = cluster_out.pass_cap_hits;
        stage_idx = 4;
        topics_out = run_topics(cfg, fg_path, terms_path, matrix_path,
                                levels_path, topics_path);
        manifest["stages"]["topics"] = "ok";
        manifest["topics"] = topics_out.topics;
        stage_idx = 5;
        run_layout(cfg, terms_path, topics_path, svg_path, grid_path);
        manifest["stages"]["layout"] = "ok";
        stage_idx = 6;
        run_coherence(cfg, fg_path, topics_path, coherence_path);
        manifest["stages"]["coherence"] = "ok";
    } catch (const std::exception& e) {
        const char* stage = stage_names[stage_idx];
        manifest["stages"][stage] = "failed";
        manifest["error"] = {{"stage", stage}, {"message", e.what()}};
        std::cerr << "error: stage=" << stage << ": " << e.what() << "\n";
        return finish(1);
    }
    return finish(0);
}

}  // namespace pdc
