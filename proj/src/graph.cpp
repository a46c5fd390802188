#include "lgae/graph.hpp"

#include "lgae/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lgae {

void GraphDataset::validate() const {
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [u, v] = edges[e];
        if (u >= num_nodes || v >= num_nodes) {
            throw MalformedDataError("dataset '" + name + "': edge (" + std::to_string(u) + ", " +
                                     std::to_string(v) + ") references a node >= " +
                                     std::to_string(num_nodes));
        }
        if (u == v) {
            throw MalformedDataError("dataset '" + name + "': self-loop at node " + std::to_string(u));
        }
        if (u > v) {
            throw MalformedDataError("dataset '" + name + "': edge not in canonical u < v form");
        }
        if (e > 0 && !(edges[e - 1] < edges[e])) {
            throw MalformedDataError("dataset '" + name + "': edges not sorted / duplicate edge");
        }
    }
    if (features && features->rows != num_nodes) {
        throw MalformedDataError("dataset '" + name + "': feature rows (" +
                                 std::to_string(features->rows) + ") != num_nodes (" +
                                 std::to_string(num_nodes) + ")");
    }
}

SparseMatrix adjacency_from_edges(const GraphDataset& dataset) {
    dataset.validate();
    const std::size_t n = dataset.num_nodes;

    std::vector<std::size_t> degree(n, 0);
    for (const auto& [u, v] : dataset.edges) {
        ++degree[u];
        ++degree[v];
    }

    SparseMatrix a;
    a.n_rows = n;
    a.n_cols = n;
    a.row_offsets.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        a.row_offsets[i + 1] = a.row_offsets[i] + degree[i];
    }
    a.col_indices.resize(a.row_offsets[n]);
    a.values.assign(a.row_offsets[n], 1.0);

    std::vector<std::size_t> cursor(a.row_offsets.begin(), a.row_offsets.end() - 1);
    for (const auto& [u, v] : dataset.edges) {
        a.col_indices[cursor[u]++] = v;
        a.col_indices[cursor[v]++] = u;
    }
    // Edges are sorted by (u, v), so each row u receives its v-neighbors in
    // increasing order, but the v-side entries arrive interleaved; sort rows.
    for (std::size_t i = 0; i < n; ++i) {
        std::sort(a.col_indices.begin() + static_cast<std::ptrdiff_t>(a.row_offsets[i]),
                  a.col_indices.begin() + static_cast<std::ptrdiff_t>(a.row_offsets[i + 1]));
    }
    return a;
}

std::vector<double> degrees(const SparseMatrix& a) {
    if (a.n_rows != a.n_cols) {
        throw ShapeError("degrees: matrix must be square");
    }
    std::vector<double> d(a.n_rows, 0.0);
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        double sum = 0.0;
        for (std::size_t p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p) {
            sum += a.values[p];
        }
        d[i] = sum;
    }
    return d;
}

SparseMatrix normalized_operator(const SparseMatrix& a) {
    if (a.n_rows != a.n_cols) {
        throw ContractError("normalized_operator: input must be square");
    }
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        for (std::size_t p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p) {
            const std::size_t j = a.col_indices[p];
            if (i == j) {
                throw ContractError("normalized_operator: input diagonal must be empty");
            }
            if (a.values[p] < 0.0) {
                throw ContractError("normalized_operator: input must be non-negative");
            }
            if (a.at(j, i) != a.values[p]) {
                throw ContractError("normalized_operator: input must be symmetric");
            }
        }
    }

    const std::vector<double> deg = degrees(a);
    std::vector<double> inv_sqrt(a.n_rows);
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        inv_sqrt[i] = 1.0 / std::sqrt(deg[i] + 1.0);
    }

    // Each row gains exactly one self-loop entry.
    SparseMatrix s;
    s.n_rows = a.n_rows;
    s.n_cols = a.n_cols;
    s.row_offsets.assign(a.n_rows + 1, 0);
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        s.row_offsets[i + 1] = s.row_offsets[i] + (a.row_offsets[i + 1] - a.row_offsets[i]) + 1;
    }
    s.col_indices.resize(s.row_offsets.back());
    s.values.resize(s.row_offsets.back());

    for (std::size_t i = 0; i < a.n_rows; ++i) {
        std::size_t out = s.row_offsets[i];
        bool placed_diag = false;
        for (std::size_t p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p) {
            const std::size_t j = a.col_indices[p];
            if (!placed_diag && j > i) {
                s.col_indices[out] = static_cast<std::uint32_t>(i);
                s.values[out] = inv_sqrt[i] * inv_sqrt[i];
                ++out;
                placed_diag = true;
            }
            s.col_indices[out] = static_cast<std::uint32_t>(j);
            s.values[out] = a.values[p] * inv_sqrt[i] * inv_sqrt[j];
            ++out;
        }
        if (!placed_diag) {
            s.col_indices[out] = static_cast<std::uint32_t>(i);
            s.values[out] = inv_sqrt[i] * inv_sqrt[i];
            ++out;
        }
    }
    return s;
}

} // namespace lgae
