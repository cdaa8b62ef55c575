#include "glat/heatmap.hpp"

#include "glat/error.hpp"
#include "glat/textfmt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

namespace glat {

void heatmap_export(const EmbeddingTable& table, const Vector& scores,
                    const std::filesystem::path& csv_path, const std::filesystem::path& pgm_path,
                    HeatmapNormalization norm) {
    if (scores.size() != table.size())
        throw DimensionError("heatmap_export: " + std::to_string(scores.size()) + " scores for " +
                             std::to_string(table.size()) + " patches");
    if (!scores.allFinite()) throw Error("heatmap_export: non-finite score");
    const GridReport grid = validate_patch_grid(table);

    std::ofstream csv(csv_path);
    if (!csv) throw IoError("cannot open heatmap CSV for writing: " + csv_path.string());
    csv << "x,y,score\n";
    for (Index i = 0; i < table.size(); ++i) {
        const PatchRecord& rec = table.records[static_cast<std::size_t>(i)];
        csv << rec.x << ',' << rec.y << ',' << format_double(scores[i]) << '\n';
    }
    if (!csv) throw IoError("write failed for heatmap CSV: " + csv_path.string());

    std::vector<int> pixels(static_cast<std::size_t>(grid.width) * static_cast<std::size_t>(grid.height), 0);
    double lo = scores.minCoeff();
    double hi = scores.maxCoeff();
    for (Index i = 0; i < table.size(); ++i) {
        const PatchRecord& rec = table.records[static_cast<std::size_t>(i)];
        double unit = 0.0;
        if (norm == HeatmapNormalization::MinMax) {
            unit = hi > lo ? (scores[i] - lo) / (hi - lo) : 0.0;
        } else {
            unit = std::clamp(scores[i], 0.0, 1.0);
        }
        pixels[static_cast<std::size_t>(rec.y) * static_cast<std::size_t>(grid.width) +
               static_cast<std::size_t>(rec.x)] = static_cast<int>(std::lround(unit * 255.0));
    }

    std::ofstream pgm(pgm_path);
    if (!pgm) throw IoError("cannot open graymap for writing: " + pgm_path.string());
    pgm << "P2\n" << grid.width << ' ' << grid.height << "\n255\n";
    for (long y = 0; y < grid.height; ++y) {
        for (long x = 0; x < grid.width; ++x) {
            if (x) pgm << ' ';
            pgm << pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(grid.width) +
                          static_cast<std::size_t>(x)];
        }
        pgm << '\n';
    }
    if (!pgm) throw IoError("write failed for graymap: " + pgm_path.string());
}

}  // namespace glat
