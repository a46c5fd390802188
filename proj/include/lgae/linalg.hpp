#pragma once

#include "lgae/matrix.hpp"

#include <span>

namespace lgae {

// Dense products. All of them parallelize over output rows only, so each
// output element accumulates in a fixed left-to-right order and results are
// bit-reproducible regardless of thread count.

// a (n×k) · b (k×m)
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

// aᵀ (k×n) · b (n×m); row-blocked so column access of a stays cache-resident.
DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b);

// a (n×k) · bᵀ (m×k)ᵀ
DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix transpose(const DenseMatrix& a);

// out[i][j] += bias[j]
void add_row_vector(DenseMatrix& out, std::span<const double> bias);

// Column sums of a, as a 1×cols matrix (bias gradients).
DenseMatrix column_sums(const DenseMatrix& a);

// Sparse-dense product S (n×m) · x (m×d). Row-major, left-to-right
// accumulation inside each row; rows may run in parallel.
DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& x);

} // namespace lgae
