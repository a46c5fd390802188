#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace lgae {

// Row-major dense real matrix. Holds features X, smoothed features X̄,
// hidden states H and latents Z.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data; // rows * cols, row-major

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    bool same_shape(const DenseMatrix& other) const {
        return rows == other.rows && cols == other.cols;
    }

    bool all_finite() const;

    static DenseMatrix identity(std::size_t n);
};

// Compressed sparse row real matrix. Holds the adjacency A and the
// normalized propagation operator S.
struct SparseMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::size_t> row_offsets; // n_rows + 1, non-decreasing
    std::vector<std::uint32_t> col_indices; // strictly increasing per row
    std::vector<double> values; // parallel to col_indices

    std::size_t nnz() const { return col_indices.size(); }

    // Stored value at (i, j), 0 when absent. Binary search within the row.
    double at(std::size_t i, std::size_t j) const;

    DenseMatrix to_dense() const;

    // Checks the CSR structural invariants; throws ContractError.
    void validate() const;
};

} // namespace lgae
