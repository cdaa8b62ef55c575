#include "glat/embedding.hpp"
#include "glat/embedding_io.hpp"
#include "glat/rng.hpp"

#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace glat;

namespace {

EmbeddingTable small_table() {
    EmbeddingTable t;
    t.d = 2;
    t.slide_id = "s1";
    t.records = {
        {0, 0, 0, Vector{{1.0, 2.0}}},
        {1, 1, 0, Vector{{3.0, 4.0}}},
        {2, 0, 1, Vector{{5.0, 6.0}}},
    };
    return t;
}

EmbeddingTable random_table(int n, int d, std::uint64_t seed) {
    EmbeddingTable t;
    t.d = d;
    t.slide_id = "rand-" + std::to_string(seed);
    SplitMix64 gen(seed);
    for (int i = 0; i < n; ++i) {
        PatchRecord r;
        r.id = i;
        r.x = i % 4;
        r.y = i / 4;
        r.embedding.resize(d);
        fill_gaussian(r.embedding, gen, 1.0);
        t.records.push_back(std::move(r));
    }
    return t;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("matrix rows follow record order") {
    const Matrix m = small_table().matrix();
    CHECK(m.rows() == 3);
    CHECK(m(0, 0) == 1.0);
    CHECK(m(2, 1) == 6.0);
}

TEST_CASE("validate rejects broken tables") {
    EmbeddingTable t = small_table();
    SUBCASE("duplicate id") {
        t.records[1].id = 0;
        t.sort_by_id();
        CHECK_THROWS_AS(t.validate(), FormatError);
    }
    SUBCASE("wrong embedding length") {
        t.records[2].embedding = Vector{{1.0}};
        CHECK_THROWS_AS(t.validate(), FormatError);
    }
    SUBCASE("non-finite entry") {
        t.records[0].embedding(0) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(t.validate(), FormatError);
    }
    SUBCASE("negative id") {
        t.records[0].id = -1;
        CHECK_THROWS_AS(t.validate(), FormatError);
    }
}

TEST_CASE("subset keeps requested ids sorted and errors on unknown ids") {
    const EmbeddingTable t = small_table();
    const std::vector<PatchId> ids{2, 0};
    const EmbeddingTable sub = t.subset(ids);
    REQUIRE(sub.size() == 2);
    CHECK(sub.records[0].id == 0);
    CHECK(sub.records[1].id == 2);
    CHECK(sub.records[1].embedding(0) == 5.0);

    const std::vector<PatchId> missing{0, 7};
    CHECK_THROWS_AS((void)t.subset(missing), Error);
}

TEST_CASE("patch grid geometry") {
    SUBCASE("full 2x2") {
        EmbeddingTable t;
        t.d = 1;
        t.records = {{0, 0, 0, Vector{{0.0}}},
                     {1, 1, 0, Vector{{0.0}}},
                     {2, 0, 1, Vector{{0.0}}},
                     {3, 1, 1, Vector{{0.0}}}};
        const GridReport g = validate_patch_grid(t);
        CHECK(g.width == 2);
        CHECK(g.height == 2);
        CHECK(g.coverage == 1.0);
    }
    SUBCASE("sparse 3x3") {
        EmbeddingTable t;
        t.d = 1;
        t.records = {{0, 0, 0, Vector{{0.0}}}, {1, 2, 0, Vector{{0.0}}}, {2, 0, 2, Vector{{0.0}}}};
        const GridReport g = validate_patch_grid(t);
        CHECK(g.width == 3);
        CHECK(g.height == 3);
        CHECK(g.coverage == doctest::Approx(3.0 / 9.0));
    }
    SUBCASE("duplicate coordinate") {
        EmbeddingTable t;
        t.d = 1;
        t.records = {{0, 1, 1, Vector{{0.0}}}, {1, 1, 1, Vector{{0.0}}}};
        CHECK_THROWS_AS((void)validate_patch_grid(t), FormatError);
    }
}

TEST_CASE("table writing produces the documented line count") {
    EmbeddingTable t = small_table();
    t.records.pop_back();
    std::ostringstream os;
    write_embedding_table(t, os);
    const std::string text = os.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(text.rfind("#glat-embeddings v1 d=2 patch_px=224 slide=s1\n", 0) == 0);
}

TEST_CASE("empty table round-trips as header only") {
    EmbeddingTable t;
    t.d = 5;
    t.slide_id = "empty";
    std::ostringstream os;
    write_embedding_table(t, os);
    std::istringstream is(os.str());
    const EmbeddingTable back = read_embedding_table(is, "mem");
    CHECK(back.size() == 0);
    CHECK(back.d == 5);
    CHECK(back.slide_id == "empty");
}

TEST_CASE("random table round-trips field by field") {
    const EmbeddingTable t = random_table(16, 8, 2024);
    std::ostringstream os;
    write_embedding_table(t, os);
    std::istringstream is(os.str());
    const EmbeddingTable back = read_embedding_table(is, "mem");
    REQUIRE(back.size() == t.size());
    CHECK(back.d == t.d);
    CHECK(back.patch_px == t.patch_px);
    CHECK(back.slide_id == t.slide_id);
    for (std::size_t i = 0; i < t.records.size(); ++i) {
        CHECK(back.records[i].id == t.records[i].id);
        CHECK(back.records[i].x == t.records[i].x);
        CHECK(back.records[i].y == t.records[i].y);
        for (Index k = 0; k < t.d; ++k) CHECK(back.records[i].embedding(k) == t.records[i].embedding(k));
    }
}

TEST_CASE("reload is byte-stable") {
    const EmbeddingTable t = random_table(12, 5, 7);
    std::ostringstream first;
    write_embedding_table(t, first);
    std::istringstream is(first.str());
    const EmbeddingTable back = read_embedding_table(is, "mem");
    std::ostringstream second;
    write_embedding_table(back, second);
    CHECK(first.str() == second.str());
}

TEST_CASE("reader reports duplicate ids with both line numbers") {
    std::istringstream is(
        "#glat-embeddings v1 d=1 patch_px=224 slide=s\n"
        "0,0,0,1.5\n"
        "1,1,0,2.5\n"
        "0,2,0,3.5\n");
    try {
        (void)read_embedding_table(is, "mem");
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("duplicate id 0") != std::string::npos);
        CHECK(msg.find("line 4") != std::string::npos);
        CHECK(msg.find("line 2") != std::string::npos);
    }
}

TEST_CASE("reader rejects malformed rows with line context") {
    SUBCASE("wrong field count") {
        std::istringstream is(
            "#glat-embeddings v1 d=2 patch_px=224 slide=s\n"
            "0,0,0,1.0\n");
        try {
            (void)read_embedding_table(is, "mem");
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("non-finite value") {
        std::istringstream is(
            "#glat-embeddings v1 d=1 patch_px=224 slide=s\n"
            "0,0,0,inf\n");
        CHECK_THROWS_AS((void)read_embedding_table(is, "mem"), FormatError);
    }
    SUBCASE("bad header") {
        std::istringstream is("#wrong v9\n");
        CHECK_THROWS_AS((void)read_embedding_table(is, "mem"), FormatError);
    }
    SUBCASE("unsorted input is re-sorted, not rejected") {
        std::istringstream is(
            "#glat-embeddings v1 d=1 patch_px=224 slide=s\n"
            "5,1,0,2.0\n"
            "3,0,0,1.0\n");
        const EmbeddingTable t = read_embedding_table(is, "mem");
        CHECK(t.records[0].id == 3);
        CHECK(t.records[1].id == 5);
    }
}

TEST_CASE("missing file raises IoError") {
    CHECK_THROWS_AS((void)load_embedding_table("/nonexistent/nope.emb"), IoError);
}

TEST_CASE("labels round-trip and validate") {
    const auto path = temp_file("glat_test_labels.csv");
    std::vector<std::pair<std::string, GradeLabel>> labels = {
        {"a", GradeLabel{0}}, {"b", GradeLabel{3}}, {"c", GradeLabel{1}}};
    save_labels(labels, path);
    const auto back = load_labels(path);
    REQUIRE(back.size() == 3);
    CHECK(back[1].first == "b");
    CHECK(back[1].second.class_index == 3);
    std::filesystem::remove(path);

    std::ofstream bad(path);
    bad << "slide_id,label\nx,9\n";
    bad.close();
    CHECK_THROWS_AS((void)load_labels(path), FormatError);
    std::filesystem::remove(path);
}
