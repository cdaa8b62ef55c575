#pragma once

#include "glat/embedding.hpp"

#include <filesystem>

namespace glat {

enum class HeatmapNormalization { MinMax, None };

/// Writes per-patch scores as (a) CSV `x,y,score` in id order with raw
/// values and (b) a P2 portable graymap on the patch grid, min-max scaled
/// to 0..255 (degenerate range renders all zeros; `none` clamps to [0,1]).
/// Grid cells with no patch render 0. Scores align to table order.
void heatmap_export(const EmbeddingTable& table, const Vector& scores,
                    const std::filesystem::path& csv_path, const std::filesystem::path& pgm_path,
                    HeatmapNormalization norm = HeatmapNormalization::MinMax);

}  // namespace glat
