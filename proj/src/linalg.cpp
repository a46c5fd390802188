#include "lgae/linalg.hpp"

#include "lgae/error.hpp"

#include <string>

namespace lgae {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ShapeError(what);
}

} // namespace

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.cols == b.rows, "matmul: inner dimensions differ (" + std::to_string(a.cols) +
                                  " vs " + std::to_string(b.rows) + ")");
    DenseMatrix out(a.rows, b.cols, 0.0);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double* arow = a.row(static_cast<std::size_t>(i));
        double* orow = out.row(static_cast<std::size_t>(i));
        for (std::size_t l = 0; l < a.cols; ++l) {
            const double av = arow[l];
            if (av == 0.0) continue;
            const double* brow = b.row(l);
            for (std::size_t j = 0; j < b.cols; ++j) {
                orow[j] += av * brow[j];
            }
        }
    }
    return out;
}

DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.rows == b.rows, "matmul_at_b: row counts differ");
    DenseMatrix out(a.cols, b.cols, 0.0);

    // Process a in row blocks; transpose each block into scratch so the
    // accumulation loop reads contiguously. Blocks run sequentially, so per
    // output element the summation order equals plain i = 0..n-1.
    constexpr std::size_t kBlock = 256;
    DenseMatrix scratch(a.cols, kBlock, 0.0);
    for (std::size_t i0 = 0; i0 < a.rows; i0 += kBlock) {
        const std::size_t i1 = std::min(i0 + kBlock, a.rows);
        const std::size_t bsize = i1 - i0;
        for (std::size_t i = i0; i < i1; ++i) {
            const double* arow = a.row(i);
            for (std::size_t f = 0; f < a.cols; ++f) {
                scratch(f, i - i0) = arow[f];
            }
        }
        const std::ptrdiff_t fcount = static_cast<std::ptrdiff_t>(a.cols);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t f = 0; f < fcount; ++f) {
            const double* srow = scratch.row(static_cast<std::size_t>(f));
            double* orow = out.row(static_cast<std::size_t>(f));
            for (std::size_t i = 0; i < bsize; ++i) {
                const double av = srow[i];
                if (av == 0.0) continue;
                const double* brow = b.row(i0 + i);
                for (std::size_t j = 0; j < b.cols; ++j) {
                    orow[j] += av * brow[j];
                }
            }
        }
    }
    return out;
}

DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.cols == b.cols, "matmul_a_bt: column counts differ");
    DenseMatrix out(a.rows, b.rows, 0.0);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double* arow = a.row(static_cast<std::size_t>(i));
        double* orow = out.row(static_cast<std::size_t>(i));
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* brow = b.row(j);
            double acc = 0.0;
            for (std::size_t l = 0; l < a.cols; ++l) {
                acc += arow[l] * brow[l];
            }
            orow[j] = acc;
        }
    }
    return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix out(a.cols, a.rows, 0.0);
    constexpr std::size_t kBlock = 64;
    for (std::size_t i0 = 0; i0 < a.rows; i0 += kBlock) {
        const std::size_t i1 = std::min(i0 + kBlock, a.rows);
        for (std::size_t j0 = 0; j0 < a.cols; j0 += kBlock) {
            const std::size_t j1 = std::min(j0 + kBlock, a.cols);
            for (std::size_t i = i0; i < i1; ++i) {
                for (std::size_t j = j0; j < j1; ++j) {
                    out(j, i) = a(i, j);
                }
            }
        }
    }
    return out;
}

void add_row_vector(DenseMatrix& out, std::span<const double> bias) {
    require(bias.size() == out.cols, "add_row_vector: bias length must equal column count");
    for (std::size_t i = 0; i < out.rows; ++i) {
        double* orow = out.row(i);
        for (std::size_t j = 0; j < out.cols; ++j) {
            orow[j] += bias[j];
        }
    }
}

DenseMatrix column_sums(const DenseMatrix& a) {
    DenseMatrix out(1, a.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        for (std::size_t j = 0; j < a.cols; ++j) {
            out.data[j] += arow[j];
        }
    }
    return out;
}

DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& x) {
    require(s.n_cols == x.rows, "spmm: operator columns (" + std::to_string(s.n_cols) +
                                    ") must equal matrix rows (" + std::to_string(x.rows) + ")");
    DenseMatrix out(s.n_rows, x.cols, 0.0);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(s.n_rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double* orow = out.row(static_cast<std::size_t>(i));
        const std::size_t begin = s.row_offsets[static_cast<std::size_t>(i)];
        const std::size_t end = s.row_offsets[static_cast<std::size_t>(i) + 1];
        for (std::size_t p = begin; p < end; ++p) {
            const double v = s.values[p];
            const double* xrow = x.row(s.col_indices[p]);
            for (std::size_t j = 0; j < x.cols; ++j) {
                orow[j] += v * xrow[j];
            }
        }
    }
    return out;
}

} // namespace lgae
