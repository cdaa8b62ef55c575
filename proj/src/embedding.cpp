#include "glat/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

namespace glat {

Matrix EmbeddingTable::matrix() const {
    Matrix m(size(), d);
    for (Index i = 0; i < size(); ++i)
        m.row(i) = records[static_cast<std::size_t>(i)].embedding.transpose();
    return m;
}

void EmbeddingTable::sort_by_id() {
    std::sort(records.begin(), records.end(),
              [](const PatchRecord& a, const PatchRecord& b) { return a.id < b.id; });
}

void EmbeddingTable::validate() const {
    if (d < 1)
        throw FormatError("embedding table '" + slide_id + "': d must be >= 1, got " + std::to_string(d));
    PatchId prev = -1;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const PatchRecord& r = records[i];
        if (r.id < 0)
            throw FormatError("embedding table '" + slide_id + "': negative id " + std::to_string(r.id));
        if (r.id <= prev)
            throw FormatError("embedding table '" + slide_id + "': ids not strictly increasing at record " +
                              std::to_string(i));
        prev = r.id;
        if (r.embedding.size() != d)
            throw FormatError("embedding table '" + slide_id + "': record id " + std::to_string(r.id) +
                              " has embedding length " + std::to_string(r.embedding.size()) +
                              ", expected " + std::to_string(d));
        if (!r.embedding.allFinite())
            throw FormatError("embedding table '" + slide_id + "': non-finite value in record id " +
                              std::to_string(r.id));
    }
}

EmbeddingTable EmbeddingTable::subset(std::span<const PatchId> ids) const {
    std::unordered_map<PatchId, std::size_t> index;
    index.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) index.emplace(records[i].id, i);

    EmbeddingTable out;
    out.d = d;
    out.patch_px = patch_px;
    out.slide_id = slide_id;
    out.records.reserve(ids.size());
    for (PatchId id : ids) {
        auto it = index.find(id);
        if (it == index.end())
            throw FormatError("subset: id " + std::to_string(id) + " not in table '" + slide_id + "'");
        out.records.push_back(records[it->second]);
    }
    out.sort_by_id();
    return out;
}

GridReport validate_patch_grid(const EmbeddingTable& table) {
    std::set<std::pair<int, int>> seen;
    int max_x = -1;
    int max_y = -1;
    for (const PatchRecord& r : table.records) {
        if (r.x < 0 || r.y < 0)
            throw FormatError("grid of '" + table.slide_id + "': negative coordinate (" +
                              std::to_string(r.x) + "," + std::to_string(r.y) + ") at id " +
                              std::to_string(r.id));
        if (!seen.insert({r.x, r.y}).second)
            throw FormatError("grid of '" + table.slide_id + "': duplicate coordinate (" +
                              std::to_string(r.x) + "," + std::to_string(r.y) + ") at id " +
                              std::to_string(r.id));
        max_x = std::max(max_x, r.x);
        max_y = std::max(max_y, r.y);
    }
    GridReport rep;
    rep.width = max_x + 1;
    rep.height = max_y + 1;
    const double cells = static_cast<double>(rep.width) * static_cast<double>(rep.height);
    rep.coverage = cells > 0 ? static_cast<double>(table.records.size()) / cells : 0.0;
    return rep;
}

}  // namespace glat
