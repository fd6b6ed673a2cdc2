#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "pdc/affinity.hpp"
#include "pdc/corpus.hpp"
#include "pdc/errors.hpp"
#include "pdc/hierarchy.hpp"
#include "pdc/pipeline.hpp"
#include "pdc/termselect.hpp"
#include "pdc/util.hpp"

using namespace pdc;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / "pdc_pipeline_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// Ten documents about volcanoes, ten about poetry. Every planted word shows
// up in exactly its block, so the pair affinities split the vocabulary into
// two clean clusters of five terms (three words plus two bigrams each).
std::string planted_fg() {
    std::string jsonl;
    for (int i = 0; i < 10; ++i)
        jsonl += "{\"id\":\"v0" + std::to_string(i) +
                 "\",\"title\":\"volcano magma lava\"}\n";
    for (int i = 0; i < 10; ++i)
        jsonl += "{\"id\":\"p0" + std::to_string(i) +
                 "\",\"title\":\"sonnet meter rhyme\"}\n";
    return jsonl;
}

std::vector<std::string> planted_terms() {
    const std::string sep(kBigramSep);
    return {"lava",   "magma",  "magma" + sep + "lava",
            "meter",  "meter" + sep + "rhyme",
            "rhyme",  "sonnet", "sonnet" + sep + "meter",
            "volcano", "volcano" + sep + "magma"};
}

std::string planted_bg() {
    std::string out = "N=10000\n";
    for (const std::string& t : planted_terms()) out += t + "\t10\n";
    return out;
}

PipelineConfig planted_cfg() {
    PipelineConfig cfg;
    cfg.url_template = "https://doi.test/{id}";
    return cfg;
}

}  // namespace

TEST_CASE("config defaults satisfy validation") {
    PipelineConfig cfg;
    CHECK(cfg.fdr == 0.01);
    CHECK(cfg.min_df == 3);
    CHECK(cfg.freq_cap == 10000);
    CHECK(cfg.thr == 100);
    CHECK(cfg.del == 0.5);
    CHECK(cfg.k_seeds == 10);
    CHECK(cfg.max_passes == 30);
    CHECK(cfg.rng_seed == 1);
    CHECK(cfg.top_docs == 100);
    CHECK(cfg.n_values == std::vector<int>{5, 10, 20});
    CHECK(cfg.url_template.empty());
    CHECK(cfg.max_order == 20000);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config validation rejects out-of-range fields") {
    auto broken = [](auto&& mutate) {
        PipelineConfig cfg;
        mutate(cfg);
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    };
    broken([](PipelineConfig& c) { c.fdr = 0.0; });
    broken([](PipelineConfig& c) { c.fdr = 1.0; });
    broken([](PipelineConfig& c) { c.min_df = -1; });
    broken([](PipelineConfig& c) { c.freq_cap = 0; });
    broken([](PipelineConfig& c) { c.thr = 0; });
    broken([](PipelineConfig& c) { c.del = 0.0; });
    broken([](PipelineConfig& c) { c.k_seeds = 0; });
    broken([](PipelineConfig& c) { c.max_passes = 0; });
    broken([](PipelineConfig& c) { c.top_docs = -1; });
    broken([](PipelineConfig& c) { c.n_values = {}; });
    broken([](PipelineConfig& c) { c.n_values = {2, 1}; });
    broken([](PipelineConfig& c) { c.max_order = 0; });
}

TEST_CASE("apply_kv parses and rejects values per key") {
    PipelineConfig cfg;
    cfg.apply_kv("fdr", "0.05");
    CHECK(cfg.fdr == 0.05);
    cfg.apply_kv("n_values", "2,3");
    CHECK(cfg.n_values == std::vector<int>{2, 3});
    cfg.apply_kv("rng_seed", "42");
    CHECK(cfg.rng_seed == 42);
    cfg.apply_kv("url_template", "https://x.test/{id}");
    CHECK(cfg.url_template == "https://x.test/{id}");

    CHECK_THROWS_AS(cfg.apply_kv("nope", "1"), ConfigError);
    CHECK_THROWS_AS(cfg.apply_kv("fdr", "abc"), ConfigError);
    CHECK_THROWS_AS(cfg.apply_kv("min_df", "3x"), ConfigError);
    CHECK_THROWS_AS(cfg.apply_kv("rng_seed", "-1"), ConfigError);
    CHECK_THROWS_AS(cfg.apply_kv("max_order", "0"), ConfigError);
    CHECK_THROWS_AS(cfg.apply_kv("n_values", "5,x"), ConfigError);
    CHECK_THROWS_AS(cfg.apply_kv("n_values", ""), ConfigError);
}

TEST_CASE("apply_file handles comments, blanks, and embedded equals") {
    PipelineConfig cfg;
    cfg.apply_file(
        "# comment\n"
        "\n"
        "  fdr = 0.05\n"
        "n_values=2,3\n"
        "url_template=https://x.test/a=b/{id}\n");
    CHECK(cfg.fdr == 0.05);
    CHECK(cfg.n_values == std::vector<int>{2, 3});
    CHECK(cfg.url_template == "https://x.test/a=b/{id}");

    PipelineConfig bad;
    CHECK_THROWS_WITH_AS(bad.apply_file("fdr=0.1\nthr\n"),
                         doctest::Contains("line 2"), ConfigError);
}

TEST_CASE("environment overrides sit between file and explicit settings") {
    PipelineConfig cfg;
    cfg.apply_file("fdr=0.1\nn_values=9,9\n");
    REQUIRE(setenv("PDC_FDR", "0.2", 1) == 0);
    REQUIRE(setenv("PDC_N_VALUES", "2,4", 1) == 0);
    cfg.apply_env();
    unsetenv("PDC_FDR");
    unsetenv("PDC_N_VALUES");
    CHECK(cfg.fdr == 0.2);
    CHECK(cfg.n_values == std::vector<int>{2, 4});
    cfg.apply_kv("fdr", "0.3");  // the command line wins last
    CHECK(cfg.fdr == 0.3);

    REQUIRE(setenv("PDC_THR", "x", 1) == 0);
    CHECK_THROWS_AS(cfg.apply_env(), ConfigError);
    unsetenv("PDC_THR");
}

TEST_CASE("as_map stringizes every setting") {
    auto m = PipelineConfig{}.as_map();
    CHECK(m.size() == 12);
    CHECK(m.at("fdr") == "0.01");
    CHECK(m.at("n_values") == "5,10,20");
    CHECK(m.at("url_template") == "");
    CHECK(m.at("rng_seed") == "1");
}

TEST_CASE("run_pipeline produces the planted topics and a full manifest") {
    const fs::path dir = tmp_dir("planted");
    const fs::path fg = dir / "fg.jsonl";
    const fs::path bg = dir / "bg.tsv";
    write_file(fg, planted_fg());
    write_file(bg, planted_bg());

    const PipelineConfig cfg = planted_cfg();
    const fs::path out = dir / "out";
    REQUIRE(run_pipeline(cfg, fg, bg, out) == 0);

    const TermSet terms = TermSet::load(out / "terms.tsv");
    CHECK(terms.terms() == planted_terms());

    const std::string topics_text = read_file(out / "topics.jsonl");
    CHECK(topics_text.rfind("# pdc:1 seed=1\n", 0) == 0);
    auto [h, topics] = parse_topics(topics_text);
    REQUIRE(topics.size() == 2);
    CHECK(h.levels == 1);
    CHECK(topics[0].name == "magma lava");
    CHECK(topics[1].name == "meter rhyme");
    CHECK(h.by_id(1).size == 5);
    CHECK(h.by_id(2).size == 5);
    REQUIRE(topics[0].ranked_docs.size() == 10);
    CHECK(topics[0].ranked_docs[0].first == "v00");

    const std::string svg = read_file(out / "report.svg");
    CHECK(svg.rfind("<!-- pdc:1 seed=1 -->\n<svg", 0) == 0);
    CHECK(svg.find("https://doi.test/v00") != std::string::npos);

    const std::string grid = read_file(out / "grid.tsv");
    CHECK(grid == "# pdc:1 seed=1\n1\t1\t1\t1\t1\t2\t2\t2\t2\t2\n");

    const std::string coh = read_file(out / "coherence.tsv");
    CHECK(coh.rfind("# pdc:1 seed=1\ntopic\tshort\t", 0) == 0);
    CHECK(coh.find("umass@5") != std::string::npos);
    CHECK(coh.find("\n1\t1\t") != std::string::npos);  // 5 terms < n=10: short
    CHECK(coh.find("\n2\t1\t") != std::string::npos);

    auto manifest = nlohmann::json::parse(read_file(out / "manifest.json"));
    CHECK(manifest.at("status") == "ok");
    CHECK(manifest.at("seed") == 1);
    CHECK(manifest.at("levels") == 1);
    CHECK(manifest.at("topics") == 2);
    CHECK(manifest.at("pass_cap_hits") == 0);
    for (const auto& [stage, state] : manifest.at("stages").items())
        CHECK(state == "ok");
    CHECK(manifest.at("config").at("thr") == "100");
    CHECK(manifest.at("inputs").at("foreground").at("fnv1a64") ==
          fnv1a64_hex(planted_fg()));

    // A rerun reproduces every artifact byte for byte.
    const fs::path out2 = dir / "out2";
    REQUIRE(run_pipeline(cfg, fg, bg, out2) == 0);
    for (const char* name : {"terms.tsv", "matrix.bin", "levels.txt",
                             "topics.jsonl", "report.svg", "grid.tsv",
                             "coherence.tsv", "manifest.json"})
        CHECK(read_file(out / name) == read_file(out2 / name));
}

TEST_CASE("staged runs reproduce the monolithic artifacts byte for byte") {
    const fs::path dir = tmp_dir("staged");
    const fs::path fg = dir / "fg.jsonl";
    const fs::path bg = dir / "bg.tsv";
    write_file(fg, planted_fg());
    write_file(bg, planted_bg());

    const PipelineConfig cfg = planted_cfg();
    const fs::path mono = dir / "mono";
    REQUIRE(run_pipeline(cfg, fg, bg, mono) == 0);

    const fs::path st = dir / "staged";
    fs::create_directories(st);
    run_extract_terms(cfg, fg, bg, st / "terms.tsv");
    run_build_matrix(cfg, fg, st / "terms.tsv", st / "matrix.bin");
    run_cluster(cfg, st / "matrix.bin", st / "levels.txt");
    run_topics(cfg, fg, st / "terms.tsv", st / "matrix.bin", st / "levels.txt",
               st / "topics.jsonl");
    run_layout(cfg, st / "terms.tsv", st / "topics.jsonl", st / "report.svg",
               st / "grid.tsv");
    run_coherence(cfg, fg, st / "topics.jsonl", st / "coherence.tsv");

    for (const char* name : {"terms.tsv", "matrix.bin", "levels.txt",
                             "topics.jsonl", "report.svg", "grid.tsv",
                             "coherence.tsv"})
        CHECK(read_file(mono / name) == read_file(st / name));

    // Hand-maintained artifacts without a provenance line still load.
    const std::string levels = read_file(st / "levels.txt");
    REQUIRE(levels.rfind("# pdc:1", 0) == 0);
    write_file(st / "levels_bare.txt", levels.substr(levels.find('\n') + 1));
    run_topics(cfg, fg, st / "terms.tsv", st / "matrix.bin",
               st / "levels_bare.txt", st / "topics_bare.jsonl");
    CHECK(read_file(st / "topics_bare.jsonl") ==
          read_file(st / "topics.jsonl"));
}

TEST_CASE("a failing stage is named in the manifest and on the exit path") {
    const fs::path dir = tmp_dir("failure");
    const fs::path fg = dir / "fg.jsonl";
    write_file(fg, planted_fg());

    const fs::path out = dir / "out";
    CHECK(run_pipeline(PipelineConfig{}, fg, dir / "missing_bg.tsv", out) == 1);
    auto manifest = nlohmann::json::parse(read_file(out / "manifest.json"));
    CHECK(manifest.at("status") == "failed");
    CHECK(manifest.at("stages").at("ingest") == "ok");
    CHECK(manifest.at("stages").at("termselect") == "failed");
    CHECK(manifest.at("stages").at("matrix") == "skipped");
    CHECK(manifest.at("error").at("stage") == "termselect");

    const fs::path out2 = dir / "out2";
    CHECK(run_pipeline(PipelineConfig{}, dir / "missing_fg.jsonl",
                       dir / "missing_bg.tsv", out2) == 1);
    auto m2 = nlohmann::json::parse(read_file(out2 / "manifest.json"));
    CHECK(m2.at("error").at("stage") == "ingest");
}

TEST_CASE("readers reject artifacts from a different schema") {
    const fs::path dir = tmp_dir("schema");
    const fs::path fg = dir / "fg.jsonl";
    write_file(fg, planted_fg());
    write_file(dir / "topics.jsonl", "# pdc:2 seed=1\n");
    CHECK_THROWS_WITH_AS(run_coherence(PipelineConfig{}, fg,
                                       dir / "topics.jsonl", dir / "coh.tsv"),
                         doctest::Contains("schema"), ConfigError);
}

TEST_CASE("run_cluster writes exact snapshot bytes for a tiny matrix") {
    const fs::path dir = tmp_dir("cluster");
    const SigmaMatrix m = SigmaMatrix::from_lower_triangle(3, {2.0, -3.0, -3.0});
    m.save(dir / "matrix.bin", 7);

    PipelineConfig cfg;
    cfg.thr = 2;
    cfg.rng_seed = 7;
    const ClusterOutcome got = run_cluster(cfg, dir / "matrix.bin",
                                           dir / "levels.txt");
    CHECK(got.levels == 1);
    CHECK(got.pass_cap_hits == 0);
    CHECK(read_file(dir / "levels.txt") ==
          "# pdc:1 seed=7\n"
          "level=0 factor=0 objective=2\n"
          "0\t0\n1\t0\n2\t2\n");
}

TEST_CASE("run_layout renders a background-only report without topics") {
    const fs::path dir = tmp_dir("layout_empty");
    write_file(dir / "terms.tsv", "0\tapple\t3\t0.001\n1\tbrick\t3\t0.001\n");
    write_file(dir / "topics.jsonl", "# pdc:1 seed=1\n");
    PipelineConfig cfg;
    run_layout(cfg, dir / "terms.tsv", dir / "topics.jsonl", dir / "report.svg",
               dir / "grid.tsv");
    const std::string svg = read_file(dir / "report.svg");
    CHECK(svg.rfind("<!-- pdc:1 seed=1 -->\n<svg", 0) == 0);
    CHECK(svg.find("class=\"bar\"") == std::string::npos);
    CHECK(read_file(dir / "grid.tsv") == "# pdc:1 seed=1\n");
}
