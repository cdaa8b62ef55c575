#pragma once

#include "glat/embedding.hpp"

#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

namespace glat {

// Embedding table file, version 1. Line-based text:
//   line 1:  #glat-embeddings v1 d=<d> patch_px=<int> slide=<slide_id>
//   line 2+: <id>,<x>,<y>,<v0>,...,<v{d-1}>
// Comma separated, no spaces, LF line endings. Numbers are written in
// shortest round-trip decimal form, so save/load is byte-stable.

EmbeddingTable load_embedding_table(const std::filesystem::path& path);
EmbeddingTable read_embedding_table(std::istream& in, const std::string& origin);

void save_embedding_table(const EmbeddingTable& table, const std::filesystem::path& path);
void write_embedding_table(const EmbeddingTable& table, std::ostream& out);

// Labels file: header `slide_id,label`, then one `<slide_id>,<class>` row
// per slide.
std::vector<std::pair<std::string, GradeLabel>> load_labels(const std::filesystem::path& path);
void save_labels(const std::vector<std::pair<std::string, GradeLabel>>& labels,
                 const std::filesystem::path& path);

}  // namespace glat
