#include "lgae/data.hpp"
#include "lgae/propagation.hpp"
#include "lgae/graph.hpp"
#include "lgae/linalg.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lgae;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* env = std::getenv("LGAE_CLI");
    return env != nullptr ? env : "";
}

struct CommandResult {
    int exit_code = -1;
    std::string output;
};

CommandResult run_command(const std::string& args) {
    const fs::path out_file = fs::temp_directory_path() / "lgae_cli_out.txt";
    const std::string cmd = cli_path() + " " + args + " > " + out_file.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    CommandResult r;
    r.exit_code = WEXITSTATUS(raw);
    std::ifstream in(out_file);
    std::ostringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    return r;
}

std::string file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("params table carries the audited counts") {
    if (cli_path().empty()) return; // binary location not provided
    const CommandResult r = run_command("params --dim 1433");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("46416") != std::string::npos);
    CHECK(r.output.find("46944") != std::string::npos);
    CHECK(r.output.find("2166784") != std::string::npos);
    CHECK(r.output.find("11/11") != std::string::npos);
}

TEST_CASE("usage errors exit with code 2") {
    if (cli_path().empty()) return;
    CHECK(run_command("").exit_code == 2);
    CHECK(run_command("train --dataset /nonexistent --variant bogus").exit_code == 2);
    CHECK(run_command("definitely-not-a-subcommand").exit_code == 2);
}

TEST_CASE("runtime failures exit with code 1") {
    if (cli_path().empty()) return;
    CHECK(run_command("train --dataset /nonexistent --variant lgae").exit_code == 1);
}

TEST_CASE("train writes a complete, rerunnable run directory") {
    if (cli_path().empty()) return;
    const fs::path base = fs::temp_directory_path() / "lgae_cli_train";
    fs::remove_all(base);
    fs::create_directories(base);
    const GraphDataset ds = generate_synthetic(SyntheticKind::ErdosRenyi, 40, 0.2, 11, 6);
    const fs::path data_dir = base / "data";
    save_dataset(ds, data_dir.string());

    const std::string common = "train --dataset " + data_dir.string() +
                               " --variant lvgae --k 2 --epochs 15 --seeds 0,1 --out ";
    const CommandResult r1 = run_command(common + (base / "run1").string());
    CHECK(r1.exit_code == 0);

    for (const char* name : {"config.json", "split.txt", "aggregate.json", "report_0.json",
                             "report_1.json", "checkpoint_0.bin", "checkpoint_1.bin",
                             "timings.json"}) {
        CHECK(fs::exists(base / "run1" / name));
    }

    // Same flags, second directory: deterministic artifacts byte-for-byte.
    const CommandResult r2 = run_command(common + (base / "run2").string());
    CHECK(r2.exit_code == 0);
    for (const char* name : {"config.json", "split.txt", "aggregate.json", "report_0.json",
                             "report_1.json", "checkpoint_0.bin", "checkpoint_1.bin"}) {
        CHECK(file_bytes(base / "run1" / name) == file_bytes(base / "run2" / name));
    }
    fs::remove_all(base);
}

TEST_CASE("replicate prints an eight-row comparison grid") {
    if (cli_path().empty()) return;
    const fs::path base = fs::temp_directory_path() / "lgae_cli_replicate";
    fs::remove_all(base);
    fs::create_directories(base);
    const GraphDataset ds = generate_synthetic(SyntheticKind::ErdosRenyi, 35, 0.25, 21, 5);
    const fs::path data_dir = base / "data";
    save_dataset(ds, data_dir.string());

    const CommandResult r = run_command("replicate --dataset " + data_dir.string() +
                                        " --epochs 10 --seeds 0 --out " + (base / "out").string());
    CHECK(r.exit_code == 0);
    // 4 variants x 2 streams.
    std::size_t rows = 0;
    std::istringstream lines(r.output);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.find("identity") != std::string::npos ||
            line.find("features") != std::string::npos) {
            if (line.find("+/-") != std::string::npos) ++rows;
        }
    }
    CHECK(rows == 8);
    CHECK(fs::exists(base / "out" / "lgae_identity" / "aggregate.json"));
    CHECK(fs::exists(base / "out" / "vgae_features" / "checkpoint_0.bin"));
    fs::remove_all(base);
}

TEST_CASE("preprocess with k = 0 caches the raw features") {
    if (cli_path().empty()) return;
    const fs::path base = fs::temp_directory_path() / "lgae_cli_prep";
    fs::remove_all(base);
    fs::create_directories(base);
    const GraphDataset ds = generate_synthetic(SyntheticKind::ErdosRenyi, 12, 0.3, 12, 4);
    const fs::path data_dir = base / "data";
    save_dataset(ds, data_dir.string());
    const fs::path cache_dir = base / "cache";

    const CommandResult r = run_command("preprocess --dataset " + data_dir.string() + " --k 0" +
                                        " --cache-dir " + cache_dir.string());
    CHECK(r.exit_code == 0);

    const DatasetManifest manifest = read_manifest(data_dir.string());
    const DenseMatrix cached =
        read_xbar_cache((cache_dir / xbar_cache_filename(manifest.content_hash, 0, false)).string());
    CHECK(cached.data == ds.features->data);
    fs::remove_all(base);
}

TEST_CASE("featureless preprocess with k = 1 caches the dense operator") {
    if (cli_path().empty()) return;
    const fs::path base = fs::temp_directory_path() / "lgae_cli_prep_id";
    fs::remove_all(base);
    fs::create_directories(base);
    const GraphDataset ds = generate_synthetic(SyntheticKind::ErdosRenyi, 5, 0.5, 13);
    const fs::path data_dir = base / "data";
    save_dataset(ds, data_dir.string());
    const fs::path cache_dir = base / "cache";

    const CommandResult r = run_command("preprocess --dataset " + data_dir.string() +
                                        " --k 1 --featureless --cache-dir " + cache_dir.string());
    CHECK(r.exit_code == 0);

    const DatasetManifest manifest = read_manifest(data_dir.string());
    const DenseMatrix cached =
        read_xbar_cache((cache_dir / xbar_cache_filename(manifest.content_hash, 1, true)).string());
    const SparseMatrix s = normalized_operator(adjacency_from_edges(ds));
    CHECK(cached.data == s.to_dense().data);
    fs::remove_all(base);
}

} // TEST_SUITE
