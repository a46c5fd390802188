#include "lgae/matrix.hpp"

#include "lgae/error.hpp"

#include <algorithm>
#include <cmath>

namespace lgae {

bool DenseMatrix::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
    const auto begin = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[i]);
    const auto end = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[i + 1]);
    const auto it = std::lower_bound(begin, end, static_cast<std::uint32_t>(j));
    if (it == end || *it != j) return 0.0;
    return values[static_cast<std::size_t>(it - col_indices.begin())];
}

DenseMatrix SparseMatrix::to_dense() const {
    DenseMatrix out(n_rows, n_cols, 0.0);
    for (std::size_t i = 0; i < n_rows; ++i) {
        for (std::size_t p = row_offsets[i]; p < row_offsets[i + 1]; ++p) {
            out(i, col_indices[p]) = values[p];
        }
    }
    return out;
}

void SparseMatrix::validate() const {
    if (row_offsets.size() != n_rows + 1) {
        throw ContractError("SparseMatrix: row_offsets length must be n_rows + 1");
    }
    if (row_offsets.front() != 0 || row_offsets.back() != col_indices.size()) {
        throw ContractError("SparseMatrix: row_offsets must start at 0 and end at nnz");
    }
    if (values.size() != col_indices.size()) {
        throw ContractError("SparseMatrix: values and col_indices length mismatch");
    }
    for (std::size_t i = 0; i < n_rows; ++i) {
        if (row_offsets[i] > row_offsets[i + 1]) {
            throw ContractError("SparseMatrix: row_offsets must be non-decreasing");
        }
        for (std::size_t p = row_offsets[i]; p < row_offsets[i + 1]; ++p) {
            if (col_indices[p] >= n_cols) {
                throw ContractError("SparseMatrix: column index out of range");
            }
            if (p > row_offsets[i] && col_indices[p] <= col_indices[p - 1]) {
                throw ContractError("SparseMatrix: column indices must be strictly increasing per row");
            }
        }
    }
}

} // namespace lgae
