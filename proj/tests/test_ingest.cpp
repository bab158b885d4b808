#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "decal/dataset.hpp"
#include "decal/error.hpp"
#include "decal/ingest.hpp"
#include "decal/io.hpp"
#include "decal/toy_models.hpp"

#include <zlib.h>

#include <filesystem>
#include <fstream>

using namespace decal;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir()
    {
        path = fs::temp_directory_path() / ("decal_ingest_" + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path write(const std::string& name, const std::string& text) const
    {
        std::ofstream(path / name, std::ios::binary) << text;
        return path / name;
    }
    fs::path write_gz(const std::string& name, const std::string& text) const
    {
        gzFile f = gzopen((path / name).c_str(), "wb");
        gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
        gzclose(f);
        return path / name;
    }
};

const char* kCsv = "point_id,split,s_1,s_2,s_3\n"
                   "a,train,1,2,3\n"
                   "b,test,0.5,-1,4e-3\n";

const char* kNdjson = R"({"point_id": "a", "split": "train", "samples": [1, 2, 3]}
{"point_id": "b", "split": "test", "samples": [0.5, -1, 0.004]}
)";

void check_same(const SampleTable& x, const SampleTable& y)
{
    REQUIRE(x.rows.size() == y.rows.size());
    CHECK(x.sample_count == y.sample_count);
    for (std::size_t i = 0; i < x.rows.size(); ++i) {
        CHECK(x.rows[i].point_id == y.rows[i].point_id);
        CHECK(x.rows[i].split == y.rows[i].split);
        CHECK(x.rows[i].samples == y.rows[i].samples);
    }
}

} // namespace

TEST_CASE("load_samples reads csv")
{
    TempDir dir;
    const auto t = load_samples(dir.write("s.csv", kCsv));
    REQUIRE(t.rows.size() == 2);
    CHECK(t.sample_count == 3);
    CHECK(t.rows[1].point_id == "b");
    CHECK(t.rows[1].split == Split::test);
    CHECK(t.rows[1].samples[2] == 0.004);
}

TEST_CASE("csv and ndjson encodings give the same table")
{
    TempDir dir;
    const auto csv = load_samples(dir.write("s.csv", kCsv));
    check_same(csv, load_samples(dir.write("s.ndjson", kNdjson)));
    check_same(csv, load_samples(dir.write("s.jsonl", kNdjson)));
    check_same(csv, load_samples(dir.write_gz("s.csv.gz", kCsv)));
    check_same(csv, load_samples(dir.write_gz("s.ndjson.gz", kNdjson)));
    check_same(csv, load_samples(dir.write("s.txt", kCsv), SampleFormat::csv));
    CHECK_THROWS_AS(load_samples(dir.path / "s.txt"), InputError);
}

TEST_CASE("ragged rows name the offending point")
{
    TempDir dir;
    const auto p = dir.write("r.ndjson", "{\"point_id\": \"first\", \"split\": \"train\", \"samples\": [1, 2, 3]}\n"
                                         "{\"point_id\": \"second\", \"split\": \"train\", \"samples\": [1, 2, 3, 4]}\n");
    try {
        load_samples(p);
        FAIL("expected a format error");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("second") != std::string::npos);
    }
    const auto c = dir.write("r.csv", "point_id,split,s_1,s_2,s_3\nfirst,train,1,2,3\nsecond,train,1,2,3,4\n");
    try {
        load_samples(c);
        FAIL("expected a format error");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("second") != std::string::npos);
    }
}

TEST_CASE("non-numeric samples report the line number")
{
    TempDir dir;
    try {
        load_samples(dir.write("n.csv", "point_id,split,s_1,s_2\na,train,1,2\nb,train,1,abc\n"));
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    try {
        load_samples(dir.write("n.ndjson", "{\"point_id\": \"a\", \"split\": \"train\", \"samples\": [1, 2]}\n"
                                           "{\"point_id\": \"b\", \"split\": \"train\", \"samples\": [1, \"x\"]}\n"));
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("duplicates and other structural errors")
{
    TempDir dir;
    CHECK_THROWS_AS(load_samples(dir.write("d.csv", "point_id,split,s_1,s_2\na,train,1,2\na,train,3,4\n")), ValidationError);
    // the same id may appear once per split
    CHECK(load_samples(dir.write("ok.csv", "point_id,split,s_1,s_2\na,train,1,2\na,test,3,4\n")).rows.size() == 2);
    CHECK_THROWS_AS(load_samples(dir.write("one.csv", "point_id,split,s_1\na,train,1\n")), FormatError);
    CHECK_THROWS_AS(load_samples(dir.write("h.csv", "id,split,s_1,s_2\na,train,1,2\n")), FormatError);
    CHECK_THROWS_AS(load_samples(dir.write("sp.csv", "point_id,split,s_1,s_2\na,holdout,1,2\n")), ParseError);
    CHECK_THROWS_AS(load_samples(dir.write("e.csv", "")), FormatError);
    CHECK_THROWS(load_samples(dir.path / "missing.csv"));
}

TEST_CASE("targets load and join")
{
    TempDir dir;
    const auto targets = load_targets(dir.write("t.csv", "point_id,y\na,1.5\nb,-2\n"));
    CHECK(targets.size() == 2);
    CHECK(targets.at("b") == -2.0);
    CHECK_THROWS_AS(load_targets(dir.write("dup.csv", "point_id,y\na,1\na,2\n")), ValidationError);

    auto table = load_samples(dir.write("s.csv", kCsv));
    join_targets(table, targets);
    CHECK(table.rows[0].target == 1.5);
    CHECK(table.rows[1].target == -2.0);

    auto partial = load_samples(dir.write("s2.csv", kCsv));
    join_targets(partial, {{"a", 0.0}});
    CHECK_FALSE(partial.rows[1].target.has_value());

    auto missing = load_samples(dir.write("s3.csv", kCsv));
    try {
        join_targets(missing, {{"b", 0.0}});
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find(" a") != std::string::npos);
    }
}

TEST_CASE("canonical csv round trip is byte identical")
{
    TempDir dir;
    const auto t = load_samples(dir.write("s.ndjson", "{\"point_id\": \"z\", \"split\": \"val\", \"samples\": [0.1, 0.2]}\n"
                                                      "{\"point_id\": \"a\", \"split\": \"test\", \"samples\": [3, 1e-300]}\n"
                                                      "{\"point_id\": \"a\", \"split\": \"train\", \"samples\": [-0.3333333333333333, 7]}\n"));
    const auto canonical = samples_to_csv(t);
    CHECK(canonical.rfind("point_id,split,s_1,s_2\na,train,", 0) == 0);
    write_samples_csv(t, dir.path / "c.csv");
    CHECK(io::read_text(dir.path / "c.csv") == canonical);
    const auto again = load_samples(dir.path / "c.csv");
    CHECK(samples_to_csv(again) == canonical);
}

TEST_CASE("io helpers")
{
    CHECK(io::format_double(0.1) == "0.10000000000000001");
    CHECK(io::parse_double(io::format_double(1.0 / 3.0), 1) == 1.0 / 3.0);
    CHECK_THROWS_AS(io::parse_double("1.5x", 4), ParseError);
    CHECK(io::split_csv("a,,b") == std::vector<std::string>{"a", "", "b"});
    CHECK(io::lines("x\r\ny\n") == std::vector<std::string>{"x", "y"});
}

TEST_CASE("dataset csv round trip")
{
    TempDir dir;
    const auto d = gen_synthetic(SyntheticKind::linear, 7, 3, 1);
    write_dataset_csv(d, dir.path / "d.csv");
    const auto back = read_dataset_csv(dir.path / "d.csv");
    CHECK(back.ids == d.ids);
    CHECK(back.y == d.y);
    CHECK(back.x == d.x);
    CHECK(io::read_text(dir.path / "d.csv").rfind("point_id,x_1,x_2,x_3,y\n", 0) == 0);
    CHECK_THROWS_AS(read_dataset_csv(dir.write("bad.csv", "point_id,x_1,y\na,1\n")), FormatError);
}
