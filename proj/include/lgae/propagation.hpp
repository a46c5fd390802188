#pragma once

#include "lgae/matrix.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace lgae {

struct PropagationConfig {
    std::size_t k = 2;
    bool featureless = false;

    static constexpr std::size_t kMaxHops = 64; // sanity cap

    void validate() const;
};

// X̄ = S^k X via repeated sparse-dense products; S^k is never materialized.
// k = 0 returns a copy of X.
DenseMatrix propagate(const SparseMatrix& s, const DenseMatrix& x, std::size_t k);

// The featureless stream's input: the n×n identity.
DenseMatrix identity_features(std::size_t n);

// S^k I assembled in column blocks, so the n×n identity never has to exist
// as a second full matrix. Result equals propagate(s, identity_features(n), k).
DenseMatrix propagate_identity(const SparseMatrix& s, std::size_t k, std::size_t block_cols = 1024);

// --- Smoothed-feature disk cache -------------------------------------------
// Flat binary layout: magic "LGAEXBAR", version u32, n_rows u64, n_cols u64,
// then row-major little-endian f64. Writes go through a temp file + atomic
// rename so concurrent readers never observe a torn file.

std::string xbar_cache_filename(const std::string& content_hash, std::size_t k, bool featureless);

void write_xbar_cache(const std::string& path, const DenseMatrix& xbar);
DenseMatrix read_xbar_cache(const std::string& path);

// Returns the cached matrix when present, otherwise computes and caches it.
// `features` may be null only in featureless mode. `cache_dir` empty = no
// caching.
DenseMatrix propagate_cached(const std::string& cache_dir, const std::string& content_hash,
                             const SparseMatrix& s, const DenseMatrix* features, std::size_t k,
                             bool featureless);

} // namespace lgae
