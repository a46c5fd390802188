#include "lgae/propagation.hpp"

#include "lgae/error.hpp"
#include "lgae/linalg.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

namespace lgae {

namespace fs = std::filesystem;

void PropagationConfig::validate() const {
    if (k > kMaxHops) {
        throw ConfigError("propagation: k = " + std::to_string(k) + " exceeds cap " +
                          std::to_string(kMaxHops));
    }
}

DenseMatrix propagate(const SparseMatrix& s, const DenseMatrix& x, std::size_t k) {
    if (s.n_rows != s.n_cols) throw ShapeError("propagate: operator must be square");
    if (s.n_cols != x.rows) throw ShapeError("propagate: operator size must match feature rows");
    if (k > PropagationConfig::kMaxHops) {
        throw ConfigError("propagate: k exceeds cap " + std::to_string(PropagationConfig::kMaxHops));
    }
    DenseMatrix cur = x;
    for (std::size_t hop = 0; hop < k; ++hop) {
        cur = spmm(s, cur);
    }
    return cur;
}

DenseMatrix identity_features(std::size_t n) {
    if (n < 1) throw ConfigError("identity_features: n must be >= 1");
    return DenseMatrix::identity(n);
}

DenseMatrix propagate_identity(const SparseMatrix& s, std::size_t k, std::size_t block_cols) {
    if (s.n_rows != s.n_cols) throw ShapeError("propagate_identity: operator must be square");
    if (block_cols == 0) throw ConfigError("propagate_identity: block_cols must be >= 1");
    const std::size_t n = s.n_rows;
    DenseMatrix out(n, n, 0.0);
    for (std::size_t c0 = 0; c0 < n; c0 += block_cols) {
        const std::size_t c1 = std::min(c0 + block_cols, n);
        DenseMatrix block(n, c1 - c0, 0.0);
        for (std::size_t c = c0; c < c1; ++c) {
            block(c, c - c0) = 1.0;
        }
        block = propagate(s, block, k);
        for (std::size_t i = 0; i < n; ++i) {
            std::memcpy(out.row(i) + c0, block.row(i), (c1 - c0) * sizeof(double));
        }
    }
    return out;
}

namespace {

constexpr char kMagic[8] = {'L', 'G', 'A', 'E', 'X', 'B', 'A', 'R'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ofstream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}

void put_u64(std::ofstream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

std::uint32_t get_u32(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::ifstream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

static_assert(std::endian::native == std::endian::little,
              "doubles are written verbatim and the format is little-endian");

} // namespace

std::string xbar_cache_filename(const std::string& content_hash, std::size_t k, bool featureless) {
    return content_hash + "_k" + std::to_string(k) + (featureless ? "_id" : "_feat") + ".xbar";
}

void write_xbar_cache(const std::string& path, const DenseMatrix& xbar) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write cache file: " + tmp);
        out.write(kMagic, sizeof(kMagic));
        put_u32(out, kVersion);
        put_u64(out, xbar.rows);
        put_u64(out, xbar.cols);
        out.write(reinterpret_cast<const char*>(xbar.data.data()),
                  static_cast<std::streamsize>(xbar.data.size() * sizeof(double)));
        if (!out) throw IoError("short write to cache file: " + tmp);
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename cache file into place: " + path + " (" + ec.message() + ")");
}

DenseMatrix read_xbar_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open cache file: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw IntegrityError(path + ": bad cache magic");
    }
    const std::uint32_t version = get_u32(in);
    if (version != kVersion) {
        throw IntegrityError(path + ": unsupported cache version " + std::to_string(version));
    }
    const std::uint64_t rows = get_u64(in);
    const std::uint64_t cols = get_u64(in);
    DenseMatrix m(rows, cols, 0.0);
    in.read(reinterpret_cast<char*>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * sizeof(double)));
    if (!in) throw IntegrityError(path + ": truncated cache payload");
    return m;
}

DenseMatrix propagate_cached(const std::string& cache_dir, const std::string& content_hash,
                             const SparseMatrix& s, const DenseMatrix* features, std::size_t k,
                             bool featureless) {
    if (!featureless && features == nullptr) {
        throw ContractError("propagate_cached: features required unless featureless");
    }
    std::string path;
    if (!cache_dir.empty()) {
        fs::create_directories(cache_dir);
        path = (fs::path(cache_dir) / xbar_cache_filename(content_hash, k, featureless)).string();
        if (fs::exists(path)) {
            return read_xbar_cache(path);
        }
    }
    DenseMatrix xbar = featureless ? propagate_identity(s, k) : propagate(s, *features, k);
    if (!path.empty()) {
        write_xbar_cache(path, xbar);
    }
    return xbar;
}

} // namespace lgae
