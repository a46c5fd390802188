#include "lgae/data.hpp"
#include "lgae/error.hpp"
#include "lgae/sha256.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace lgae;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

// Builds a manifest whose digests genuinely match the files on disk.
void write_manifest(const fs::path& dir, const std::string& name, std::size_t num_nodes,
                    std::size_t num_edges, std::size_t feature_dim) {
    std::string m = "name=" + name + "\nnum_nodes=" + std::to_string(num_nodes) +
                    "\nnum_edges=" + std::to_string(num_edges) +
                    "\nfeature_dim=" + std::to_string(feature_dim) + "\nsha256_edges=" +
                    sha256_file_hex((dir / "edges.txt").string()) + "\n";
    if (feature_dim > 0) {
        m += "sha256_features=" + sha256_file_hex((dir / "features.txt").string()) + "\n";
    }
    write_file(dir / "manifest.txt", m);
}

} // namespace

TEST_SUITE("data") {

TEST_CASE("sha256 matches the FIPS vectors") {
    CHECK(sha256_hex(std::string()) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex(std::string("abc")) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    // Multi-block message.
    CHECK(sha256_hex(std::string("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq")) ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("both edge directions collapse to one canonical edge") {
    TempDir dir("lgae_data_dedup");
    write_file(dir.path / "edges.txt", "0 1\n1 0\n");
    write_manifest(dir.path, "toy", 2, 1, 0);
    const GraphDataset ds = load_dataset(dir.path.string());
    CHECK(ds.num_nodes == 2);
    REQUIRE(ds.edges.size() == 1);
    CHECK(ds.edges[0] == Edge{0, 1});
    CHECK(!ds.features.has_value());
}

TEST_CASE("self-loops are rejected at load time") {
    TempDir dir("lgae_data_selfloop");
    write_file(dir.path / "edges.txt", "0 1\n3 3\n");
    write_manifest(dir.path, "toy", 4, 2, 0);
    CHECK_THROWS_AS(load_dataset(dir.path.string()), MalformedDataError);
}

TEST_CASE("out-of-range node indices are rejected") {
    TempDir dir("lgae_data_range");
    write_file(dir.path / "edges.txt", "0 9\n");
    write_manifest(dir.path, "toy", 3, 1, 0);
    CHECK_THROWS_AS(load_dataset(dir.path.string()), RangeError);
}

TEST_CASE("parse errors carry the line number") {
    TempDir dir("lgae_data_parse");
    write_file(dir.path / "edges.txt", "0 1\nnot numbers\n");
    write_manifest(dir.path, "toy", 3, 2, 0);
    try {
        load_dataset(dir.path.string());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
}

TEST_CASE("digest mismatches are integrity errors") {
    TempDir dir("lgae_data_hash");
    write_file(dir.path / "edges.txt", "0 1\n");
    write_manifest(dir.path, "toy", 2, 1, 0);
    write_file(dir.path / "edges.txt", "0 1\n1 2\n"); // mutate after manifest
    CHECK_THROWS_AS(load_dataset(dir.path.string()), IntegrityError);
}

TEST_CASE("edge count disagreements are integrity errors") {
    TempDir dir("lgae_data_count");
    write_file(dir.path / "edges.txt", "0 1\n1 0\n"); // dedups to 1 edge
    write_manifest(dir.path, "toy", 2, 2, 0);
    CHECK_THROWS_AS(load_dataset(dir.path.string()), IntegrityError);
}

TEST_CASE("save -> load round-trips the canonical form") {
    TempDir dir("lgae_data_roundtrip");
    const GraphDataset ds = generate_synthetic(SyntheticKind::ErdosRenyi, 23, 0.2, 5, 7);
    save_dataset(ds, dir.path.string());
    const GraphDataset back = load_dataset(dir.path.string());
    CHECK(back.name == ds.name);
    CHECK(back.num_nodes == ds.num_nodes);
    CHECK(back.edges == ds.edges);
    REQUIRE(back.features.has_value());
    CHECK(back.features->rows == ds.features->rows);
    CHECK(back.features->cols == ds.features->cols);
    CHECK(back.features->data == ds.features->data); // %.17g is lossless
}

TEST_CASE("manifest reports the declared metadata") {
    TempDir dir("lgae_data_manifest");
    const GraphDataset ds = generate_synthetic(SyntheticKind::Star, 6, 0.0, 6, 3);
    save_dataset(ds, dir.path.string());
    const DatasetManifest m = read_manifest(dir.path.string());
    CHECK(m.name == "star");
    CHECK(m.num_nodes == 6);
    CHECK(m.num_edges == 5);
    CHECK(m.feature_dim == 3);
    CHECK(m.content_hash.size() == 64);
}

TEST_CASE("synthetic generators produce the documented shapes") {
    const GraphDataset complete = generate_synthetic(SyntheticKind::Complete, 3, 0.0, 1);
    CHECK(complete.edges.size() == 3);

    const GraphDataset path = generate_synthetic(SyntheticKind::Path, 4, 0.0, 2);
    CHECK(path.edges == std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}});

    const GraphDataset star = generate_synthetic(SyntheticKind::Star, 5, 0.0, 3);
    CHECK(star.edges == std::vector<Edge>{{0, 1}, {0, 2}, {0, 3}, {0, 4}});
}

TEST_CASE("same seed reproduces the same synthetic dataset") {
    const GraphDataset a = generate_synthetic(SyntheticKind::ErdosRenyi, 40, 0.15, 9, 5);
    const GraphDataset b = generate_synthetic(SyntheticKind::ErdosRenyi, 40, 0.15, 9, 5);
    CHECK(a.edges == b.edges);
    CHECK(a.features->data == b.features->data);

    const GraphDataset c = generate_synthetic(SyntheticKind::ErdosRenyi, 40, 0.15, 10, 5);
    CHECK(a.edges != c.edges); // overwhelmingly likely
}

TEST_CASE("erdos-renyi edge counts stay inside the binomial envelope") {
    const std::size_t n = 30;
    const double p = 0.2;
    const double trials = static_cast<double>(n * (n - 1) / 2);
    const double mean = trials * p;
    const double sd = std::sqrt(trials * p * (1.0 - p));
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const GraphDataset ds = generate_synthetic(SyntheticKind::ErdosRenyi, n, p, seed);
        const double count = static_cast<double>(ds.edges.size());
        CHECK(count > mean - 5.0 * sd); // individual draws: generous bound
        CHECK(count < mean + 5.0 * sd);
        sum += count;
    }
    // Mean of 100 draws: 99% interval is mean +/- 2.58 sd/10.
    CHECK(std::abs(sum / 100.0 - mean) < 2.58 * sd / 10.0 + 1e-9);
}

} // TEST_SUITE
