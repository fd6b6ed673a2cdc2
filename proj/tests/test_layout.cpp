#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "pdc/affinity.hpp"
#include "pdc/errors.hpp"
#include "pdc/hierarchy.hpp"
#include "pdc/layout.hpp"

using namespace pdc;

namespace {

ClusterRecord rec(int id, int level, int size, int parent) {
    ClusterRecord r;
    r.id = id;
    r.level = level;
    r.size = size;
    r.parent_id = parent;
    return r;
}

ClusterHierarchy hier(std::vector<ClusterRecord> records) {
    ClusterHierarchy h;
    for (const ClusterRecord& r : records)
        h.levels = std::max(h.levels, r.level + 1);
    h.clusters = std::move(records);
    return h;
}

std::size_t count_substr(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t p = hay.find(needle); p != std::string::npos;
         p = hay.find(needle, p + needle.size()))
        ++n;
    return n;
}

// Random nested hierarchy in scan order (levels low to high, left to right).
// Children pack against their parent's left edge, mirroring how the grid
// placer assigns columns, so expected positions are known by construction.
struct ToyNode {
    int id, level, x, len, parent;
};

std::vector<ToyNode> random_toy(std::mt19937_64& rng, int& width_out,
                                ClusterHierarchy& h_out) {
    const int width = std::uniform_int_distribution<int>(24, 48)(rng);
    width_out = width;
    std::vector<ToyNode> nodes;
    std::vector<ToyNode> frontier;
    int id = 0, x = 0;
    while (x + 2 <= width) {
        int len = std::uniform_int_distribution<int>(
            2, std::min(26, width - x))(rng);
        ++id;
        frontier.push_back({id, 0, x, len, id});
        x += len;
        if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) break;
    }
    nodes = frontier;
    for (int level = 1; level <= 3 && !frontier.empty(); ++level) {
        std::vector<ToyNode> next;
        for (const ToyNode& p : frontier) {
            int cx = p.x, rem = p.len;
            while (rem >= 2 &&
                   std::uniform_int_distribution<int>(0, 1)(rng) == 0) {
                int len = std::uniform_int_distribution<int>(2, rem)(rng);
                ++id;
                next.push_back({id, level, cx, len, p.id});
                cx += len;
                rem -= len;
            }
        }
        nodes.insert(nodes.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    std::vector<ClusterRecord> records;
    for (const ToyNode& n : nodes)
        records.push_back(rec(n.id, n.level, n.len, n.parent));
    h_out = hier(std::move(records));
    return nodes;
}

}  // namespace

TEST_CASE("fill_grid packs level 0 left to right") {
    Grid g = fill_grid(hier({rec(1, 0, 4, 1)}), 4);
    CHECK(g.width == 4);
    CHECK(g.rows == 1);
    CHECK(g.cells == std::vector<std::int32_t>{1, 1, 1, 1});
}

TEST_CASE("fill_grid nests children inside the parent span") {
    Grid g = fill_grid(
        hier({rec(1, 0, 4, 1), rec(2, 1, 2, 1), rec(3, 1, 2, 1)}), 4);
    REQUIRE(g.rows == 2);
    CHECK(g.cells == std::vector<std::int32_t>{1, 1, 1, 1, 2, 2, 3, 3});
}

TEST_CASE("fill_grid on an empty hierarchy yields no rows") {
    Grid g = fill_grid(ClusterHierarchy{}, 10);
    CHECK(g.rows == 0);
    CHECK(g.cells.empty());
    CHECK(fill_grid(ClusterHierarchy{}, 0).rows == 0);
}

TEST_CASE("fill_grid rejects impossible layouts") {
    CHECK_THROWS_AS((void)fill_grid(hier({rec(1, 0, 2, 1)}), 0),
                    ConsistencyError);
    // Runs past the right edge.
    CHECK_THROWS_AS((void)fill_grid(hier({rec(1, 0, 5, 1)}), 4),
                    ConsistencyError);
    // Children overflow the parent span.
    CHECK_THROWS_AS((void)fill_grid(hier({rec(1, 0, 4, 1), rec(2, 1, 3, 1),
                                          rec(3, 1, 3, 1)}),
                                    8),
                    ConsistencyError);
    // No empty cell left inside the parent.
    CHECK_THROWS_AS(
        (void)fill_grid(hier({rec(1, 0, 2, 1), rec(2, 1, 2, 1), rec(3, 1, 2, 1)}),
                        2),
        ConsistencyError);
    // A self-parented run colliding with an already placed sibling.
    CHECK_THROWS_AS(
        (void)fill_grid(hier({rec(1, 0, 4, 1), rec(2, 0, 2, 2), rec(3, 1, 2, 1),
                              rec(4, 1, 2, 2), rec(5, 1, 3, 5)}),
                        6),
        ConsistencyError);
}

TEST_CASE("skyline truncates at the first empty column") {
    // Level 0 uses 4 of 6 columns; columns 4 and 5 stay empty.
    Grid g = fill_grid(hier({rec(1, 0, 4, 1)}), 6);
    Skyline sky = build_skyline(g);
    CHECK(sky.column_ids == std::vector<std::int32_t>{1, 1, 1, 1});
    REQUIRE(sky.bars.size() == 1);
    CHECK(sky.bars[0].cluster_id == 1);
    CHECK(sky.bars[0].x_start == 0);
    CHECK(sky.bars[0].length == 4);
    CHECK(sky.bars[0].level_row == 0);
    CHECK(sky.bars[0].color == BarColor::kBlue);
    CHECK(sky.bars[0].shift == 0);
}

TEST_CASE("children eclipse their parents in the skyline") {
    Grid g = fill_grid(
        hier({rec(1, 0, 4, 1), rec(2, 1, 2, 1), rec(3, 1, 2, 1)}), 4);
    Skyline sky = build_skyline(g);
    CHECK(sky.column_ids == std::vector<std::int32_t>{2, 2, 3, 3});
    REQUIRE(sky.bars.size() == 2);
    CHECK(sky.bars[0].cluster_id == 2);
    CHECK(sky.bars[1].cluster_id == 3);
    CHECK(sky.bars[1].x_start == 2);
}

TEST_CASE("fully visible wide clusters turn red and rise by their size") {
    Grid g = fill_grid(hier({rec(1, 0, 25, 1)}), 25);
    Skyline sky = build_skyline(g);
    REQUIRE(sky.bars.size() == 1);
    CHECK(sky.bars[0].color == BarColor::kRed);
    CHECK(sky.bars[0].shift == 25);
    CHECK(sky.bars[0].length == 25);
}

TEST_CASE("partly hidden wide clusters turn green") {
    Grid g = fill_grid(hier({rec(1, 0, 25, 1), rec(2, 1, 10, 1)}), 25);
    Skyline sky = build_skyline(g);
    REQUIRE(sky.bars.size() == 2);
    CHECK(sky.bars[0].cluster_id == 2);
    CHECK(sky.bars[0].color == BarColor::kBlue);  // 10 cells is still small
    CHECK(sky.bars[1].cluster_id == 1);
    CHECK(sky.bars[1].color == BarColor::kGreen);
    CHECK(sky.bars[1].shift == 0);
    CHECK(sky.bars[1].x_start == 10);
    CHECK(sky.bars[1].length == 15);
}

TEST_CASE("random toy hierarchies obey the layout invariants") {
    std::mt19937_64 rng(20250819);
    for (int sample = 0; sample < 20; ++sample) {
        int width = 0;
        ClusterHierarchy h;
        std::vector<ToyNode> nodes = random_toy(rng, width, h);
        Grid g = fill_grid(h, width);
        REQUIRE(g.width == width);

        // Every node occupies exactly its planned run.
        for (const ToyNode& n : nodes) {
            for (int c = n.x; c < n.x + n.len; ++c)
                REQUIRE(g.at(n.level, c) == n.id);
        }
        int placed_cells = 0;
        for (const ToyNode& n : nodes) placed_cells += n.len;
        int nonzero = 0;
        for (std::int32_t v : g.cells) nonzero += v != 0;
        REQUIRE(nonzero == placed_cells);

        // Cells above row 0 always sit on top of a parent cell.
        for (int r = 1; r < g.rows; ++r)
            for (int c = 0; c < g.width; ++c)
                if (g.at(r, c) != 0) REQUIRE(g.at(r - 1, c) != 0);

        // Naive skyline recomputation.
        std::vector<std::int32_t> naive;
        for (int c = 0; c < g.width; ++c) {
            std::int32_t top = 0;
            for (int r = g.rows - 1; r >= 0; --r)
                if (g.at(r, c) != 0) {
                    top = g.at(r, c);
                    break;
                }
            if (top == 0) break;
            naive.push_back(top);
        }
        Skyline sky = build_skyline(g);
        REQUIRE(sky.column_ids == naive);

        std::map<std::int32_t, int> size, visible, row_of;
        for (const ToyNode& n : nodes) {
            size[n.id] = n.len;
            row_of[n.id] = n.level;
        }
        for (std::int32_t id : naive) ++visible[id];

        // Bars are exactly the maximal same-id runs, colored by the recount.
        std::size_t b = 0;
        for (std::size_t c = 0; c < naive.size();) {
            std::size_t e = c;
            while (e < naive.size() && naive[e] == naive[c]) ++e;
            REQUIRE(b < sky.bars.size());
            const ColoredBar& bar = sky.bars[b++];
            CHECK(bar.cluster_id == naive[c]);
            CHECK(bar.x_start == static_cast<int>(c));
            CHECK(bar.length == static_cast<int>(e - c));
            CHECK(bar.level_row == row_of.at(naive[c]));
            const int sz = size.at(naive[c]);
            if (sz < 20) {
                CHECK(bar.color == BarColor::kBlue);
                CHECK(bar.shift == 0);
            } else if (visible.at(naive[c]) == sz) {
                CHECK(bar.color == BarColor::kRed);
                CHECK(bar.shift == sz);
            } else {
                CHECK(bar.color == BarColor::kGreen);
                CHECK(bar.shift == 0);
            }
            c = e;
        }
        CHECK(b == sky.bars.size());
    }
}

TEST_CASE("grid_tsv dumps rows top first and flags red collisions") {
    Grid g = fill_grid(
        hier({rec(1, 0, 4, 1), rec(2, 1, 2, 1), rec(3, 1, 2, 1)}), 4);
    Skyline sky = build_skyline(g);
    CHECK(grid_tsv(g, sky) == "2\t2\t3\t3\n1\t1\t1\t1\n");

    // Two raised red bars that land on the same drawn row and intersect.
    ColoredBar a;
    a.cluster_id = 1;
    a.color = BarColor::kRed;
    a.x_start = 0;
    a.length = 25;
    a.level_row = 0;
    a.shift = 25;
    ColoredBar b = a;
    b.cluster_id = 2;
    b.x_start = 10;
    Grid empty;
    CHECK(grid_tsv(empty, {.column_ids = {}, .bars = {a, b}}) ==
          "# red-overlap\t1\t2\n");

    // The drawn row is level_row + shift, so mixed combinations still clash.
    b.level_row = 1;
    b.shift = 24;
    CHECK(grid_tsv(empty, {.column_ids = {}, .bars = {a, b}}) ==
          "# red-overlap\t1\t2\n");
    ColoredBar c = b;
    c.level_row = 2;
    CHECK(grid_tsv(empty, {.column_ids = {}, .bars = {a, c}}).empty());
}

TEST_CASE("emit_report is deterministic and self-contained") {
    Grid g = fill_grid(
        hier({rec(1, 0, 4, 1), rec(2, 1, 2, 1), rec(3, 1, 2, 1)}), 4);
    Skyline sky = build_skyline(g);

    TopicSummary t2;
    t2.cluster_id = 2;
    t2.name = "alpha pair";
    t2.name_term = "alpha";
    t2.ranked_terms = {{"alpha", 2.0}, {"beta", 1.5}};
    t2.ranked_docs = {{"a&b", 3.0}, {"plain", 1.0}};

    RenderOptions opt;
    opt.url_template = "https://x.test/doc?id={id}&v=1";
    std::string svg = emit_report(g, sky, {t2}, opt);
    CHECK(svg == emit_report(g, sky, {t2}, opt));

    CHECK(count_substr(svg, "class=\"bar\"") == sky.bars.size());
    CHECK(count_substr(svg, "class=\"popup\"") == 2);  // ids 2 and 3
    CHECK(svg.find("href=\"#t2\"") != std::string::npos);
    CHECK(svg.find("2: alpha pair") != std::string::npos);
    // The {id} hole is filled before escaping, so the & in the id and the
    // & in the template both come out escaped.
    CHECK(svg.find("href=\"https://x.test/doc?id=a&amp;b&amp;v=1\"") !=
          std::string::npos);
    CHECK(svg.find("<script") == std::string::npos);
}

TEST_CASE("emit_report reserves headroom for raised red bars") {
    Grid g = fill_grid(hier({rec(1, 0, 25, 1)}), 25);
    Skyline sky = build_skyline(g);
    RenderOptions opt;
    opt.cell_h = 20;
    // rows_eff = 1 + 25, canvas height = (26 + 1) * 20.
    std::string svg = emit_report(g, sky, {}, opt);
    CHECK(svg.find("height=\"540\"") != std::string::npos);
    // The raised bar sits one cell below the canvas top.
    CHECK(svg.find("y=\"20\" width=\"100\" height=\"20\" fill=\"#d43b3b\"") !=
          std::string::npos);
}

TEST_CASE("emit_report truncates very long panels") {
    Grid g = fill_grid(hier({rec(1, 0, 2, 1)}), 2);
    Skyline sky = build_skyline(g);
    TopicSummary t;
    t.cluster_id = 1;
    t.name = "busy";
    for (int i = 0; i < 55; ++i)
        t.ranked_terms.emplace_back("term" + std::to_string(i), 55.0 - i);
    std::string svg = emit_report(g, sky, {t}, {});
    CHECK(svg.find("(+5 more terms)") != std::string::npos);
}

TEST_CASE("emit_report with no clusters is background only") {
    Grid g = fill_grid(ClusterHierarchy{}, 0);
    std::string svg = emit_report(g, build_skyline(g), {}, {});
    CHECK(svg.find("class=\"bar\"") == std::string::npos);
    CHECK(svg.find("class=\"popup\"") == std::string::npos);
    CHECK(svg.find("width=\"640\"") != std::string::npos);
    CHECK(svg.find("height=\"420\"") != std::string::npos);
    CHECK(count_substr(svg, "<rect") == 1);
}
