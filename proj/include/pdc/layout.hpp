#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdc/hierarchy.hpp"

namespace pdc {

// Cell grid of cluster ids, row 0 = level 0 (bottom). 0 marks an empty cell.
struct Grid {
    int width = 0;
    int rows = 0;
    std::vector<std::int32_t> cells;  // row-major, rows * width

    std::int32_t at(int row, int col) const {
        return cells[static_cast<std::size_t>(row) * width + col];
    }
    std::int32_t& at(int row, int col) {
        return cells[static_cast<std::size_t>(row) * width + col];
    }
};

// Places every kept cluster as a contiguous run of |size| cells on its level
// row. Level-0 runs go left to right in id order; each deeper run starts at
// the first empty cell at or right of its parent's left edge and must stay
// inside the parent's span. Collisions and overflow raise ConsistencyError.
Grid fill_grid(const ClusterHierarchy& hierarchy, int total_terms);

enum class BarColor { kBlue, kGreen, kRed };

struct ColoredBar {
    int cluster_id = 0;
    BarColor color = BarColor::kBlue;
    int x_start = 0;   // first skyline column of the run
    int length = 0;    // visible cells
    int level_row = 0; // grid row the cluster lives on
    int shift = 0;     // rows the drawn bar is raised by (red bars only)
};

struct Skyline {
    std::vector<std::int32_t> column_ids;  // topmost id per column, truncated
                                           // at the first empty column
    std::vector<ColoredBar> bars;          // maximal same-id runs, left to right
};

// Topmost nonzero id per column plus bar runs. Bars are colored blue when the
// cluster has fewer than 20 cells, red when every cell is visible, green
// otherwise; red bars carry shift == cluster size.
Skyline build_skyline(const Grid& grid);

struct RenderOptions {
    int cell_w = 4;
    int cell_h = 4;
    std::string url_template;  // "{id}" is replaced by the document id
};

// Deterministic standalone SVG: colored bars over the skyline, and one
// hidden panel per bar shown via CSS :target when its bar is clicked. The
// panel lists ranked terms on the left and linked documents on the right.
std::string emit_report(const Grid& grid, const Skyline& skyline,
                        const std::vector<TopicSummary>& topics,
                        const RenderOptions& options);

// Tab-separated grid dump, top row first, with trailing comment lines noting
// red bars whose raised rectangles collide.
std::string grid_tsv(const Grid& grid, const Skyline& skyline);

}  // namespace pdc
