#include "glat/checkpoint.hpp"

#include "glat/error.hpp"
#include "glat/textfmt.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace glat {

namespace {

constexpr const char* kHeader = "#glat-checkpoint v1";

struct TensorRef {
    std::string name;
    Matrix* mat = nullptr;   // exactly one of mat/vec set
    Vector* vec = nullptr;
};

std::vector<TensorRef> tensor_refs(ModelParams& p) {
    return {
        {"glat.Wq", &p.glat.Wq, nullptr},
        {"glat.Wk", &p.glat.Wk, nullptr},
        {"glat.Wv", &p.glat.Wv, nullptr},
        {"filter.coeffs", nullptr, &p.glat.filter.coeffs},
        {"agg.logits", nullptr, &p.agg_logits},
        {"cls.W", &p.cls_W, nullptr},
        {"cls.b", nullptr, &p.cls_b},
    };
}

void write_values_row_major(std::ostream& os, const Matrix& m) {
    bool first = true;
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (!first) os << ' ';
            os << format_double(m(i, j));
            first = false;
        }
    }
    os << '\n';
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open checkpoint for writing: " + path.string());
    os << kHeader << '\n';
    ModelParams copy = params;
    for (const TensorRef& t : tensor_refs(copy)) {
        if (t.mat) {
            os << t.name << " 2 " << t.mat->rows() << ' ' << t.mat->cols() << '\n';
            write_values_row_major(os, *t.mat);
        } else {
            os << t.name << " 1 " << t.vec->size() << '\n';
            bool first = true;
            for (Index i = 0; i < t.vec->size(); ++i) {
                if (!first) os << ' ';
                os << format_double((*t.vec)[i]);
                first = false;
            }
            os << '\n';
        }
    }
    if (!os) throw IoError("write failed for checkpoint: " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path, const ModelParams& skeleton) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open checkpoint: " + path.string());
    std::string line;
    if (!std::getline(is, line) || trim(line) != kHeader)
        throw FormatError("checkpoint " + path.string() + ": missing header '" + kHeader + "'");

    struct Record {
        std::vector<long> dims;
        std::vector<double> values;
    };
    std::map<std::string, Record> records;
    long line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string_view> head = split(trim(line), ' ');
        if (head.size() < 2)
            throw FormatError("checkpoint " + path.string() + ": malformed record at line " +
                              std::to_string(line_no));
        Record rec;
        const std::string name(head[0]);
        const long ndims = parse_int(head[1], "ndims at line " + std::to_string(line_no));
        if (ndims < 1 || static_cast<std::size_t>(ndims) + 2 != head.size())
            throw FormatError("checkpoint " + path.string() + ": bad dim count at line " +
                              std::to_string(line_no));
        long expect = 1;
        for (long k = 0; k < ndims; ++k) {
            const long dim = parse_int(head[static_cast<std::size_t>(k) + 2],
                                       "dim at line " + std::to_string(line_no));
            rec.dims.push_back(dim);
            expect *= dim;
        }
        if (!std::getline(is, line))
            throw FormatError("checkpoint " + path.string() + ": missing values for tensor '" + name + "'");
        ++line_no;
        for (const std::string_view tok : split(trim(line), ' ')) {
            if (tok.empty()) continue;
            rec.values.push_back(parse_double(tok, "value of '" + name + "' at line " + std::to_string(line_no)));
        }
        if (static_cast<long>(rec.values.size()) != expect)
            throw FormatError("checkpoint " + path.string() + ": tensor '" + name + "' has " +
                              std::to_string(rec.values.size()) + " values, expected " + std::to_string(expect));
        if (!records.emplace(name, std::move(rec)).second)
            throw FormatError("checkpoint " + path.string() + ": duplicate tensor '" + name + "'");
    }

    ModelParams out = skeleton;
    std::vector<TensorRef> refs = tensor_refs(out);
    if (records.size() != refs.size())
        throw FormatError("checkpoint " + path.string() + ": expected " + std::to_string(refs.size()) +
                          " tensors, found " + std::to_string(records.size()));
    for (const TensorRef& t : refs) {
        auto it = records.find(t.name);
        if (it == records.end())
            throw FormatError("checkpoint " + path.string() + ": missing tensor '" + t.name + "'");
        const Record& rec = it->second;
        if (t.mat) {
            if (rec.dims.size() != 2 || rec.dims[0] != t.mat->rows() || rec.dims[1] != t.mat->cols()) {
                std::ostringstream oss;
                oss << "checkpoint " << path.string() << ": tensor '" << t.name << "' has shape [";
                for (std::size_t k = 0; k < rec.dims.size(); ++k) oss << (k ? "x" : "") << rec.dims[k];
                oss << "], model expects [" << t.mat->rows() << "x" << t.mat->cols() << "]";
                throw DimensionError(oss.str());
            }
            std::size_t idx = 0;
            for (Index i = 0; i < t.mat->rows(); ++i)
                for (Index j = 0; j < t.mat->cols(); ++j) (*t.mat)(i, j) = rec.values[idx++];
        } else {
            if (rec.dims.size() != 1 || rec.dims[0] != t.vec->size())
                throw DimensionError("checkpoint " + path.string() + ": tensor '" + t.name + "' has length " +
                                     std::to_string(rec.dims.empty() ? 0 : rec.dims[0]) + ", model expects " +
                                     std::to_string(t.vec->size()));
            for (Index i = 0; i < t.vec->size(); ++i) (*t.vec)[i] = rec.values[static_cast<std::size_t>(i)];
        }
    }
    return out;
}

}  // namespace glat
