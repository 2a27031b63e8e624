#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "qdre/data.hpp"
#include "qdre/dataset_io.hpp"
#include "qdre/errors.hpp"

using namespace qdre;
namespace fs = std::filesystem;

namespace {

fs::path tmp(const std::string& name) {
    const fs::path dir = fs::path(QDRE_TEST_TMP) / "io";
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

Dataset sample_data() {
    Dataset d(2);
    d.add({{0.1, -2.5e-300}, 1.0 / 3.0, 0});
    d.add({{1e17, 3.141592653589793}, -1.6, 1});
    d.add({{-0.0, 2.0}, 0.7, 1});
    return d;
}

}  // namespace

TEST(DatasetIo, CsvRoundTripIsExact) {
    const auto d = sample_data();
    const auto p = tmp("round.csv");
    save_dataset(d, p);
    EXPECT_EQ(load_dataset(p), d);
    std::ifstream in(p);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "x0,x1,weight,label");
}

TEST(DatasetIo, JsonlRoundTripIsExact) {
    const auto d = sample_data();
    const auto p = tmp("round.jsonl");
    save_dataset(d, p);
    EXPECT_EQ(format_from_path(p), DatasetFormat::Jsonl);
    EXPECT_EQ(load_dataset(p), d);
}

TEST(DatasetIo, MalformedRowNamesTheLine) {
    const auto p = tmp("bad.csv");
    write_text(p, "x0,weight,label\n1,1,0\n2,abc,1\n");
    try {
        load_dataset(p);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
    }
    write_text(p, "x0,weight,label\n1,1,0\n2,1\n");
    EXPECT_THROW(load_dataset(p), DataError);
    write_text(p, "x0,weight,label\n1,nan,0\n");
    EXPECT_THROW(load_dataset(p), DataError);
    write_text(p, "x0,weight,label\n1,1,3\n");
    EXPECT_THROW(load_dataset(p), DataError);
}

TEST(DatasetIo, EmptyFileAndZeroWeightsWarn) {
    const auto empty = tmp("empty.csv");
    write_text(empty, "");
    std::vector<std::string> warnings;
    const auto d = load_dataset(empty, &warnings);
    EXPECT_TRUE(d.empty());
    EXPECT_EQ(warnings.size(), 1u);

    const auto zero = tmp("zero.csv");
    write_text(zero, "x0,weight,label\n1,0,0\n2,1,1\n");
    warnings.clear();
    const auto z = load_dataset(zero, &warnings);
    EXPECT_EQ(z.size(), 1u);
    EXPECT_EQ(warnings.size(), 1u);
}

TEST(DatasetIo, MissingFileIsADataError) { EXPECT_THROW(load_dataset(tmp("does-not-exist.csv")), DataError); }
