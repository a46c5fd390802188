#include "lgae/data.hpp"

#include "lgae/error.hpp"
#include "lgae/rng.hpp"
#include "lgae/sha256.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace lgae {

namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string, std::less<>> read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path);
    std::map<std::string, std::string, std::less<>> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

std::size_t parse_count(const std::string& path, const std::string& key, const std::string& value) {
    try {
        return static_cast<std::size_t>(std::stoull(value));
    } catch (const std::exception&) {
        throw ParseError(path + ": key '" + key + "' is not a count: " + value);
    }
}

std::string file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

DatasetManifest read_manifest(const std::string& dir) {
    const std::string path = (fs::path(dir) / "manifest.txt").string();
    const auto kv = read_key_values(path);
    const auto require = [&](const char* key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw ParseError(path + ": missing key '" + std::string(key) + "'");
        return it->second;
    };

    DatasetManifest m;
    m.name = require("name");
    m.num_nodes = parse_count(path, "num_nodes", require("num_nodes"));
    m.num_edges = parse_count(path, "num_edges", require("num_edges"));
    m.feature_dim = parse_count(path, "feature_dim", require("feature_dim"));
    m.sha256_edges = require("sha256_edges");
    if (m.feature_dim > 0) m.sha256_features = require("sha256_features");

    const std::string edges_path = (fs::path(dir) / "edges.txt").string();
    Sha256 content;
    const std::string edge_bytes = file_bytes(edges_path);
    content.update(edge_bytes);
    if (sha256_hex(edge_bytes) != m.sha256_edges) {
        throw IntegrityError(edges_path + ": sha256 mismatch against manifest");
    }
    if (m.feature_dim > 0) {
        const std::string features_path = (fs::path(dir) / "features.txt").string();
        const std::string feat_bytes = file_bytes(features_path);
        content.update(feat_bytes);
        if (sha256_hex(feat_bytes) != m.sha256_features) {
            throw IntegrityError(features_path + ": sha256 mismatch against manifest");
        }
    }
    m.content_hash = content.hex_digest();
    return m;
}

GraphDataset load_dataset(const std::string& dir) {
    const DatasetManifest manifest = read_manifest(dir);

    GraphDataset ds;
    ds.name = manifest.name;
    ds.num_nodes = manifest.num_nodes;

    const std::string edges_path = (fs::path(dir) / "edges.txt").string();
    std::ifstream in(edges_path);
    if (!in) throw IoError("cannot open edges file: " + edges_path);

    std::set<Edge> edge_set;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        long long u = -1, v = -1;
        std::string trailing;
        if (!(ls >> u >> v) || (ls >> trailing) || u < 0 || v < 0) {
            throw ParseError(edges_path + ":" + std::to_string(lineno) + ": expected 'u v'");
        }
        if (static_cast<std::size_t>(u) >= ds.num_nodes || static_cast<std::size_t>(v) >= ds.num_nodes) {
            throw RangeError(edges_path + ":" + std::to_string(lineno) + ": node index >= " +
                             std::to_string(ds.num_nodes));
        }
        if (u == v) {
            throw MalformedDataError(edges_path + ":" + std::to_string(lineno) + ": self-loop at node " +
                                     std::to_string(u));
        }
        const auto a = static_cast<std::uint32_t>(std::min(u, v));
        const auto b = static_cast<std::uint32_t>(std::max(u, v));
        edge_set.emplace(a, b);
    }
    ds.edges.assign(edge_set.begin(), edge_set.end());
    if (ds.edges.size() != manifest.num_edges) {
        throw IntegrityError(edges_path + ": canonical edge count " + std::to_string(ds.edges.size()) +
                             " != manifest num_edges " + std::to_string(manifest.num_edges));
    }

    if (manifest.feature_dim > 0) {
        const std::string features_path = (fs::path(dir) / "features.txt").string();
        std::ifstream fin(features_path);
        if (!fin) throw IoError("cannot open features file: " + features_path);
        DenseMatrix features(ds.num_nodes, manifest.feature_dim, 0.0);
        std::string frow;
        std::size_t row = 0, flineno = 0;
        while (std::getline(fin, frow)) {
            ++flineno;
            if (frow.empty()) continue;
            if (row >= ds.num_nodes) {
                throw ParseError(features_path + ":" + std::to_string(flineno) +
                                 ": more feature rows than nodes");
            }
            std::istringstream rs(frow);
            for (std::size_t j = 0; j < manifest.feature_dim; ++j) {
                if (!(rs >> features(row, j))) {
                    throw ParseError(features_path + ":" + std::to_string(flineno) + ": expected " +
                                     std::to_string(manifest.feature_dim) + " values");
                }
            }
            std::string trailing;
            if (rs >> trailing) {
                throw ParseError(features_path + ":" + std::to_string(flineno) + ": trailing tokens");
            }
            ++row;
        }
        if (row != ds.num_nodes) {
            throw ParseError(features_path + ": found " + std::to_string(row) + " feature rows, expected " +
                             std::to_string(ds.num_nodes));
        }
        ds.features = std::move(features);
    }

    ds.validate();
    return ds;
}

void save_dataset(const GraphDataset& dataset, const std::string& dir) {
    dataset.validate();
    fs::create_directories(dir);

    const std::string edges_path = (fs::path(dir) / "edges.txt").string();
    {
        std::ofstream out(edges_path, std::ios::binary);
        if (!out) throw IoError("cannot write edges file: " + edges_path);
        for (const auto& [u, v] : dataset.edges) {
            out << u << ' ' << v << '\n';
        }
    }

    const bool has_features = dataset.features.has_value();
    const std::string features_path = (fs::path(dir) / "features.txt").string();
    if (has_features) {
        std::ofstream out(features_path, std::ios::binary);
        if (!out) throw IoError("cannot write features file: " + features_path);
        char buf[64];
        const DenseMatrix& f = *dataset.features;
        for (std::size_t i = 0; i < f.rows; ++i) {
            for (std::size_t j = 0; j < f.cols; ++j) {
                // %.17g round-trips doubles exactly through the loader.
                std::snprintf(buf, sizeof(buf), "%.17g", f(i, j));
                if (j > 0) out << ' ';
                out << buf;
            }
            out << '\n';
        }
    }

    std::ofstream out((fs::path(dir) / "manifest.txt").string(), std::ios::binary);
    if (!out) throw IoError("cannot write manifest in: " + dir);
    out << "name=" << dataset.name << '\n';
    out << "num_nodes=" << dataset.num_nodes << '\n';
    out << "num_edges=" << dataset.edges.size() << '\n';
    out << "feature_dim=" << (has_features ? dataset.features->cols : 0) << '\n';
    out << "sha256_edges=" << sha256_file_hex(edges_path) << '\n';
    if (has_features) {
        out << "sha256_features=" << sha256_file_hex(features_path) << '\n';
    }
}

GraphDataset generate_synthetic(SyntheticKind kind, std::size_t n, double p, std::uint64_t seed,
                                std::size_t feature_dim) {
    if (n < 1) throw ConfigError("generate_synthetic: n must be >= 1");
    if (p < 0.0 || p > 1.0) throw ConfigError("generate_synthetic: p must be in [0, 1]");

    GraphDataset ds;
    ds.num_nodes = n;
    Rng rng(derive_seed(seed, "synthetic"));

    switch (kind) {
    case SyntheticKind::ErdosRenyi: {
        ds.name = "erdos_renyi";
        for (std::uint32_t u = 0; u + 1 < n; ++u) {
            for (std::uint32_t v = u + 1; v < n; ++v) {
                if (rng.next_double() < p) ds.edges.emplace_back(u, v);
            }
        }
        break;
    }
    case SyntheticKind::Path: {
        ds.name = "path";
        for (std::uint32_t u = 0; u + 1 < n; ++u) ds.edges.emplace_back(u, u + 1);
        break;
    }
    case SyntheticKind::Star: {
        ds.name = "star";
        for (std::uint32_t v = 1; v < n; ++v) ds.edges.emplace_back(0, v);
        break;
    }
    case SyntheticKind::Complete: {
        ds.name = "complete";
        for (std::uint32_t u = 0; u + 1 < n; ++u) {
            for (std::uint32_t v = u + 1; v < n; ++v) ds.edges.emplace_back(u, v);
        }
        break;
    }
    }

    if (feature_dim > 0) {
        DenseMatrix f(n, feature_dim, 0.0);
        for (double& x : f.data) x = rng.next_double();
        ds.features = std::move(f);
    }
    ds.validate();
    return ds;
}

} // namespace lgae
