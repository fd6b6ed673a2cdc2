#include "pdc/layout.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "pdc/errors.hpp"
#include "pdc/util.hpp"

namespace pdc {

namespace {

// Clusters at least this many cells wide stop being drawn blue.
constexpr int kSmallSize = 20;

// Panels list at most this many rows per column.
constexpr std::size_t kPanelRows = 50;

struct Run {
    int x = 0;
    int len = 0;
};

std::string esc(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fill_url(const std::string& tmpl, const std::string& id) {
    std::string out;
    std::size_t pos = 0;
    for (std::size_t hit = tmpl.find("{id}", pos); hit != std::string::npos;
         hit = tmpl.find("{id}", pos)) {
        out.append(tmpl, pos, hit - pos);
        out += id;
        pos = hit + 4;
    }
    out.append(tmpl, pos, std::string::npos);
    return out;
}

}  // namespace

Grid fill_grid(const ClusterHierarchy& hierarchy, int total_terms) {
    Grid g;
    g.width = total_terms;
    for (const ClusterRecord& rec : hierarchy.clusters)
        g.rows = std::max(g.rows, rec.level + 1);
    if (g.rows == 0) return g;
    if (total_terms <= 0)
        throw ConsistencyError("grid width must be positive");
    g.cells.assign(static_cast<std::size_t>(g.rows) * g.width, 0);

    std::map<int, Run> placed;
    int cursor0 = 0;
    for (const ClusterRecord& rec : hierarchy.clusters) {
        const int row = rec.level;
        int x;
        if (rec.level == 0) {
            x = cursor0;
        } else {
            const int start =
                rec.parent_id == rec.id ? 0 : placed.at(rec.parent_id).x;
            x = start;
            while (x < g.width && g.at(row, x) != 0) ++x;
            if (x >= g.width)
                throw ConsistencyError("no room on level " +
                                       std::to_string(rec.level) +
                                       " for cluster " + std::to_string(rec.id));
        }
        if (x + rec.size > g.width)
            throw ConsistencyError("cluster " + std::to_string(rec.id) +
                                   " runs past the grid edge");
        if (rec.level > 0 && rec.parent_id != rec.id) {
            const Run& p = placed.at(rec.parent_id);
            if (x < p.x || x + rec.size > p.x + p.len)
                throw ConsistencyError("cluster " + std::to_string(rec.id) +
                                       " overflows the span of cluster " +
                                       std::to_string(rec.parent_id));
        }
        for (int c = x; c < x + rec.size; ++c) {
            if (g.at(row, c) != 0)
                throw ConsistencyError("cluster " + std::to_string(rec.id) +
                                       " collides with cluster " +
                                       std::to_string(g.at(row, c)));
            g.at(row, c) = rec.id;
        }
        placed[rec.id] = {x, rec.size};
        if (rec.level == 0) cursor0 += rec.size;
    }
    return g;
}

Skyline build_skyline(const Grid& grid) {
    Skyline sky;
    std::map<std::int32_t, int> size;
    std::map<std::int32_t, int> row_of;
    for (int r = 0; r < grid.rows; ++r)
        for (int c = 0; c < grid.width; ++c)
            if (std::int32_t id = grid.at(r, c)) {
                ++size[id];
                row_of.emplace(id, r);
            }

    for (int c = 0; c < grid.width; ++c) {
        std::int32_t top = 0;
        for (int r = grid.rows - 1; r >= 0; --r)
            if ((top = grid.at(r, c)) != 0) break;
        if (top == 0) break;  // the skyline ends at the first empty column
        sky.column_ids.push_back(top);
    }

    std::map<std::int32_t, int> visible;
    for (std::int32_t id : sky.column_ids) ++visible[id];

    for (std::size_t c = 0; c < sky.column_ids.size();) {
        const std::int32_t id = sky.column_ids[c];
        std::size_t e = c;
        while (e < sky.column_ids.size() && sky.column_ids[e] == id) ++e;
        ColoredBar bar;
        bar.cluster_id = id;
        bar.x_start = static_cast<int>(c);
        bar.length = static_cast<int>(e - c);
        bar.level_row = row_of.at(id);
        if (size.at(id) < kSmallSize) {
            bar.color = BarColor::kBlue;
        } else if (visible.at(id) == size.at(id)) {
            bar.color = BarColor::kRed;
            bar.shift = size.at(id);
        } else {
            bar.color = BarColor::kGreen;
        }
        sky.bars.push_back(bar);
        c = e;
    }
    return sky;
}

std::string emit_report(const Grid& grid, const Skyline& skyline,
                        const std::vector<TopicSummary>& topics,
                        const RenderOptions& options) {
    const int cw = options.cell_w > 0 ? options.cell_w : 4;
    const int ch = options.cell_h > 0 ? options.cell_h : 4;

    // Headroom above the level rows so raised red bars stay on canvas.
    int headroom = 0;
    for (const ColoredBar& b : skyline.bars)
        headroom = std::max(headroom, b.shift);
    const int rows_eff = grid.rows + headroom;
    const int bars_h = (rows_eff + 1) * ch;
    const int width = std::max(grid.width * cw, 640);
    const int height = std::max(bars_h, 420);

    std::map<int, const TopicSummary*> by_id;
    for (const TopicSummary& t : topics) by_id[t.cluster_id] = &t;

    std::vector<ColoredBar> bars = skyline.bars;
    std::sort(bars.begin(), bars.end(),
              [](const ColoredBar& a, const ColoredBar& b) {
                  if (a.cluster_id != b.cluster_id)
                      return a.cluster_id < b.cluster_id;
                  return a.x_start < b.x_start;
              });

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           std::to_string(width) + "\" height=\"" + std::to_string(height) +
           "\" viewBox=\"0 0 " + std::to_string(width) + " " +
           std::to_string(height) + "\">\n";
    out +=
        "<style>\n"
        ".popup{display:none}\n"
        ".popup:target{display:block}\n"
        ".bar:hover{opacity:0.75}\n"
        ".panel{font:12px sans-serif;background:#fffef8;border:1px solid "
        "#555;height:100%;box-sizing:border-box;overflow:auto;padding:8px}\n"
        ".panel h2{font-size:14px;margin:0 0 6px 0}\n"
        ".cols{display:flex;gap:16px}\n"
        ".cols div{flex:1;min-width:0}\n"
        ".panel table{border-collapse:collapse;width:100%}\n"
        ".panel td{padding:1px 6px 1px 0;white-space:nowrap;overflow:hidden;"
        "text-overflow:ellipsis;max-width:220px}\n"
        ".num{text-align:right}\n"
        "</style>\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" fill=\"#ffffff\"/>\n";

    for (const ColoredBar& b : bars) {
        const char* fill = b.color == BarColor::kBlue    ? "#3b6fd4"
                           : b.color == BarColor::kGreen ? "#3fa34d"
                                                         : "#d43b3b";
        const int x = b.x_start * cw;
        const int y = (rows_eff - b.level_row - b.shift) * ch;
        const TopicSummary* t = by_id.count(b.cluster_id)
                                    ? by_id.at(b.cluster_id)
                                    : nullptr;
        const std::string label =
            std::to_string(b.cluster_id) + (t ? ": " + t->name : "");
        out += "<a href=\"#t" + std::to_string(b.cluster_id) + "\">";
        out += "<rect class=\"bar\" x=\"" + std::to_string(x) + "\" y=\"" +
               std::to_string(y) + "\" width=\"" + std::to_string(b.length * cw) +
               "\" height=\"" + std::to_string(ch) + "\" fill=\"" + fill +
               "\"><title>" + esc(label) + "</title></rect></a>\n";
    }

    std::set<int> popup_ids;
    for (const ColoredBar& b : bars) popup_ids.insert(b.cluster_id);
    for (int id : popup_ids) {
        const TopicSummary* t =
            by_id.count(id) ? by_id.at(id) : nullptr;
        out += "<g class=\"popup\" id=\"t" + std::to_string(id) + "\">\n";
        out += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) +
               "\" height=\"" + std::to_string(height) +
               "\" fill=\"#000000\" opacity=\"0.25\"/>\n";
        out += "<foreignObject x=\"10\" y=\"10\" width=\"" +
               std::to_string(width - 20) + "\" height=\"" +
               std::to_string(height - 20) + "\">\n";
        out += "<div xmlns=\"http://www.w3.org/1999/xhtml\" class=\"panel\">\n";
        out += "<h2>" + std::to_string(id) +
               (t ? ": " + esc(t->name) : std::string()) +
               " <a href=\"#\">[close]</a></h2>\n";
        out += "<div class=\"cols\">\n<div>\n<table>\n";
        if (t) {
            const std::size_t nterms =
                std::min(t->ranked_terms.size(), kPanelRows);
            for (std::size_t i = 0; i < nterms; ++i) {
                const auto& [term, score] = t->ranked_terms[i];
                out += "<tr><td class=\"num\">" + std::to_string(i + 1) +
                       "</td><td>" + esc(display_name(term)) +
                       "</td><td class=\"num\">" + fmt_double(score) +
                       "</td></tr>\n";
            }
            if (t->ranked_terms.size() > nterms)
                out += "<tr><td/><td>(+" +
                       std::to_string(t->ranked_terms.size() - nterms) +
                       " more terms)</td><td/></tr>\n";
        }
        out += "</table>\n</div>\n<div>\n<table>\n";
        if (t) {
            const std::size_t ndocs =
                std::min(t->ranked_docs.size(), kPanelRows);
            for (std::size_t i = 0; i < ndocs; ++i) {
                const auto& [doc, score] = t->ranked_docs[i];
                std::string cell = esc(doc);
                if (!options.url_template.empty())
                    cell = "<a href=\"" + esc(fill_url(options.url_template, doc)) +
                           "\" target=\"_blank\">" + esc(doc) + "</a>";
                out += "<tr><td class=\"num\">" + std::to_string(i + 1) +
                       "</td><td>" + cell + "</td><td class=\"num\">" +
                       fmt_double(score) + "</td></tr>\n";
            }
            if (t->ranked_docs.size() > ndocs)
                out += "<tr><td/><td>(+" +
                       std::to_string(t->ranked_docs.size() - ndocs) +
                       " more documents)</td><td/></tr>\n";
        }
        out += "</table>\n</div>\n</div>\n</div>\n</foreignObject>\n</g>\n";
    }
    out += "</svg>\n";
    return out;
}

std::string grid_tsv(const Grid& grid, const Skyline& skyline) {
    std::string out;
    for (int r = grid.rows - 1; r >= 0; --r) {
        for (int c = 0; c < grid.width; ++c) {
            if (c) out += '\t';
            out += std::to_string(grid.at(r, c));
        }
        out += '\n';
    }
    // Raised red rectangles may collide; note each colliding pair once.
    std::set<std::pair<int, int>> overlaps;
    for (std::size_t i = 0; i < skyline.bars.size(); ++i) {
        const ColoredBar& a = skyline.bars[i];
        if (a.color != BarColor::kRed) continue;
        for (std::size_t j = i + 1; j < skyline.bars.size(); ++j) {
            const ColoredBar& b = skyline.bars[j];
            if (b.color != BarColor::kRed || b.cluster_id == a.cluster_id)
                continue;
            if (a.level_row + a.shift != b.level_row + b.shift) continue;
            if (a.x_start < b.x_start + b.length &&
                b.x_start < a.x_start + a.length)
                overlaps.insert({std::min(a.cluster_id, b.cluster_id),
                                 std::max(a.cluster_id, b.cluster_id)});
        }
    }
    for (const auto& [lo, hi] : overlaps)
        out += "# red-overlap\t" + std::to_string(lo) + "\t" +
               std::to_string(hi) + "\n";
    return out;
}

}  // namespace pdc
