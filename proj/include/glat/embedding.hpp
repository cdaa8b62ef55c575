#pragma once

#include "glat/error.hpp"
#include "glat/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace glat {

/// One patch of a slide grid: id, grid coordinates (patch units), embedding.
struct PatchRecord {
    PatchId id = 0;
    int x = 0;
    int y = 0;
    Vector embedding;
};

/// Per-slide bag of patch embeddings. Records are kept sorted by id.
struct EmbeddingTable {
    int d = 0;
    int patch_px = 224;
    std::string slide_id;
    std::vector<PatchRecord> records;

    Index size() const { return static_cast<Index>(records.size()); }

    /// N x d matrix, rows in record (id) order.
    Matrix matrix() const;

    void sort_by_id();

    /// Checks every invariant: d >= 1, ids unique and sorted, embedding
    /// lengths equal d, all entries finite. Throws FormatError.
    void validate() const;

    /// Restriction to the given ids (each must exist). Result is id-sorted.
    EmbeddingTable subset(std::span<const PatchId> ids) const;
};

struct GradeLabel {
    int class_index = 0;  // 0 normal, 1 grade 3, 2 grade 4, 3 grade 5
};

inline bool label_valid(GradeLabel l) {
    return l.class_index >= 0 && l.class_index < kNumClasses;
}

/// One labeled training sample: the selected patches of a slide.
/// selection_scores align with `patches` records and carry the final IRM
/// scores; they order the aggregation logits by selection rank.
struct WSIBag {
    std::string slide_id;
    GradeLabel label;
    EmbeddingTable patches;
    Vector selection_scores;
};

struct GridReport {
    int width = 0;
    int height = 0;
    double coverage = 0.0;
};

/// Grid geometry of a table: width = max(x)+1, height = max(y)+1,
/// coverage = N / (width*height). Throws FormatError on a duplicate (x,y)
/// pair or a negative coordinate.
GridReport validate_patch_grid(const EmbeddingTable& table);

}  // namespace glat
