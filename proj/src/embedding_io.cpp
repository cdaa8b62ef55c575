#include "glat/embedding_io.hpp"

#include "glat/textfmt.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace glat {

namespace {

const std::string kMagic = "#glat-embeddings v1";

// Header tokens are space separated; `slide=` consumes the rest of the line
// so slide ids may contain spaces.
void parse_header(const std::string& line, const std::string& origin, EmbeddingTable& table) {
    if (line.rfind(kMagic, 0) != 0)
        throw FormatError(origin + ": line 1: malformed header, expected '" + kMagic + " ...'");
    std::string rest = line.substr(kMagic.size());
    bool have_d = false;
    std::size_t pos = 0;
    while (pos < rest.size()) {
        while (pos < rest.size() && rest[pos] == ' ') ++pos;
        if (pos >= rest.size()) break;
        if (rest.compare(pos, 6, "slide=") == 0) {
            table.slide_id = rest.substr(pos + 6);
            if (!table.slide_id.empty() && table.slide_id.back() == '\r') table.slide_id.pop_back();
            break;
        }
        std::size_t end = rest.find(' ', pos);
        if (end == std::string::npos) end = rest.size();
        const std::string_view tok = trim(std::string_view(rest).substr(pos, end - pos));
        if (tok.rfind("d=", 0) == 0) {
            table.d = static_cast<int>(parse_int(tok.substr(2), origin + ": line 1"));
            have_d = true;
        } else if (tok.rfind("patch_px=", 0) == 0) {
            table.patch_px = static_cast<int>(parse_int(tok.substr(9), origin + ": line 1"));
        } else if (!tok.empty()) {
            throw FormatError(origin + ": line 1: malformed header, unknown field '" + std::string(tok) + "'");
        }
        pos = end;
    }
    if (!have_d || table.d < 1)
        throw FormatError(origin + ": line 1: malformed header, missing or invalid d=");
}

}  // namespace

EmbeddingTable read_embedding_table(std::istream& in, const std::string& origin) {
    EmbeddingTable table;
    std::string line;
    if (!std::getline(in, line))
        throw FormatError(origin + ": empty file, expected header");
    parse_header(line, origin, table);

    std::unordered_map<PatchId, int> first_line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        const std::string ctx = origin + ": line " + std::to_string(lineno);
        const auto fields = split(sv, ',');
        if (static_cast<int>(fields.size()) != table.d + 3)
            throw FormatError(ctx + ": expected " + std::to_string(table.d + 3) + " fields, got " +
                              std::to_string(fields.size()));
        PatchRecord rec;
        rec.id = parse_int(fields[0], ctx);
        if (rec.id < 0) throw FormatError(ctx + ": negative id " + std::to_string(rec.id));
        rec.x = static_cast<int>(parse_int(fields[1], ctx));
        rec.y = static_cast<int>(parse_int(fields[2], ctx));
        rec.embedding.resize(table.d);
        for (int k = 0; k < table.d; ++k) {
            const double v = parse_double(fields[static_cast<std::size_t>(k) + 3], ctx);
            if (!std::isfinite(v))
                throw FormatError(ctx + ": non-finite value in column " + std::to_string(k + 3));
            rec.embedding(k) = v;
        }
        auto [it, inserted] = first_line.emplace(rec.id, lineno);
        if (!inserted)
            throw FormatError(origin + ": duplicate id " + std::to_string(rec.id) + " at line " +
                              std::to_string(lineno) + " (first seen at line " + std::to_string(it->second) + ")");
        table.records.push_back(std::move(rec));
    }
    table.sort_by_id();
    table.validate();
    return table;
}

EmbeddingTable load_embedding_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open embedding table '" + path.string() + "'");
    return read_embedding_table(in, path.string());
}

void write_embedding_table(const EmbeddingTable& table, std::ostream& out) {
    table.validate();
    out << kMagic << " d=" << table.d << " patch_px=" << table.patch_px << " slide=" << table.slide_id << "\n";
    for (const PatchRecord& r : table.records) {
        out << r.id << ',' << r.x << ',' << r.y;
        for (Index k = 0; k < r.embedding.size(); ++k) out << ',' << format_double(r.embedding(k));
        out << '\n';
    }
}

void save_embedding_table(const EmbeddingTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write embedding table '" + path.string() + "'");
    write_embedding_table(table, out);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<std::pair<std::string, GradeLabel>> load_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open labels file '" + path.string() + "'");
    std::vector<std::pair<std::string, GradeLabel>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        if (lineno == 1) {
            if (sv != "slide_id,label")
                throw FormatError(path.string() + ": line 1: expected header 'slide_id,label'");
            continue;
        }
        const auto fields = split(sv, ',');
        if (fields.size() != 2)
            throw FormatError(path.string() + ": line " + std::to_string(lineno) + ": expected 2 fields");
        GradeLabel label{static_cast<int>(parse_int(fields[1], path.string() + ": line " + std::to_string(lineno)))};
        if (!label_valid(label))
            throw FormatError(path.string() + ": line " + std::to_string(lineno) + ": label out of range [0,3]");
        out.emplace_back(std::string(fields[0]), label);
    }
    return out;
}

void save_labels(const std::vector<std::pair<std::string, GradeLabel>>& labels,
                 const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write labels file '" + path.string() + "'");
    out << "slide_id,label\n";
    for (const auto& [slide, label] : labels) out << slide << ',' << label.class_index << '\n';
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace glat
