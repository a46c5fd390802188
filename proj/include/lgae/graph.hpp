#pragma once

#include "lgae/matrix.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lgae {

// Undirected edge, stored canonically with first < second.
using Edge = std::pair<std::uint32_t, std::uint32_t>;

// A loaded graph: node count, canonical edge list, optional node features.
struct GraphDataset {
    std::size_t num_nodes = 0;
    std::vector<Edge> edges; // u < v, sorted lexicographically, no duplicates
    std::optional<DenseMatrix> features;
    std::string name;

    // Throws MalformedDataError when any invariant fails.
    void validate() const;
};

// Symmetric 0/1 adjacency with zero diagonal, from the canonical edge list.
SparseMatrix adjacency_from_edges(const GraphDataset& dataset);

// Row sums of a square sparse matrix.
std::vector<double> degrees(const SparseMatrix& a);

// S = D̃^{-1/2} (A + I) D̃^{-1/2} with D̃ = D + I. Requires a square,
// symmetric, non-negative A with an empty diagonal.
SparseMatrix normalized_operator(const SparseMatrix& a);

} // namespace lgae
