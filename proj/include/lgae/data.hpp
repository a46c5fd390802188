#pragma once

#include "lgae/graph.hpp"

#include <cstdint>
#include <string>

namespace lgae {

// Manifest checked before a dataset directory is trusted.
struct DatasetManifest {
    std::string name;
    std::size_t num_nodes = 0;
    std::size_t num_edges = 0;
    std::size_t feature_dim = 0; // 0 = no features file
    std::string sha256_edges;
    std::string sha256_features; // empty when feature_dim == 0

    // Digest covering edges file bytes followed by features file bytes.
    std::string content_hash;
};

DatasetManifest read_manifest(const std::string& dir);

// Loads <dir>/edges.txt (+ features.txt when declared) after verifying the
// manifest digests. Edge lines are "u v", 0-based; both directions and
// duplicates collapse to canonical u < v form; self-loops are rejected.
GraphDataset load_dataset(const std::string& dir);

// Writes the canonical plain-text form plus a fresh manifest.
void save_dataset(const GraphDataset& dataset, const std::string& dir);

enum class SyntheticKind { ErdosRenyi, Path, Star, Complete };

// Deterministic per seed, including the uniform [0,1) features when
// feature_dim > 0. `p` is only read for ErdosRenyi.
GraphDataset generate_synthetic(SyntheticKind kind, std::size_t n, double p, std::uint64_t seed,
                                std::size_t feature_dim = 0);

} // namespace lgae
