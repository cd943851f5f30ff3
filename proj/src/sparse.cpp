#include "dilute/sparse.hpp"

#include <cmath>
#include <string>

#include "dilute/errors.hpp"

namespace dilute {

CsrMatrix CsrMatrix::from_dense(std::int64_t rows, std::int64_t cols, std::span<const double> a) {
    if (rows < 0 || cols < 0 || static_cast<std::int64_t>(a.size()) != rows * cols) {
        throw ValidationError("from_dense: size mismatch");
    }
    CsrMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_ptr.assign(1, 0);
    m.row_ptr.reserve(static_cast<std::size_t>(rows) + 1);
    for (std::int64_t i = 0; i < rows; ++i) {
        for (std::int64_t j = 0; j < cols; ++j) {
            const double v = a[static_cast<std::size_t>(i * cols + j)];
            if (v != 0.0) {
                m.col.push_back(static_cast<std::int32_t>(j));
                m.val.push_back(v);
            }
        }
        m.row_ptr.push_back(static_cast<std::int64_t>(m.val.size()));
    }
    return m;
}

std::vector<double> CsrMatrix::to_dense_col_major() const {
    std::vector<double> a(static_cast<std::size_t>(rows * cols), 0.0);
    for (std::int64_t i = 0; i < rows; ++i) {
        for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            a[static_cast<std::size_t>(i + col[k] * rows)] = val[k];
        }
    }
    return a;
}

std::vector<double> CsrMatrix::to_dense_row_major() const {
    std::vector<double> a(static_cast<std::size_t>(rows * cols), 0.0);
    for (std::int64_t i = 0; i < rows; ++i) {
        for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            a[static_cast<std::size_t>(i * cols + col[k])] = val[k];
        }
    }
    return a;
}

CsrMatrix CsrMatrix::transpose() const {
    CsrMatrix t;
    t.rows = cols;
    t.cols = rows;
    t.row_ptr.assign(static_cast<std::size_t>(cols) + 1, 0);
    for (auto c : col) ++t.row_ptr[static_cast<std::size_t>(c) + 1];
    for (std::int64_t j = 0; j < cols; ++j) t.row_ptr[j + 1] += t.row_ptr[j];
    t.col.resize(col.size());
    t.val.resize(val.size());
    std::vector<std::int64_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
    // Rows are visited in increasing order, so each transposed row comes out sorted.
    for (std::int64_t i = 0; i < rows; ++i) {
        for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            const auto dst = next[col[k]]++;
            t.col[dst] = static_cast<std::int32_t>(i);
            t.val[dst] = val[k];
        }
    }
    return t;
}

double CsrMatrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : val) s += v * v;
    return std::sqrt(s);
}

void CsrMatrix::validate() const {
    if (rows < 0 || cols < 0) throw InternalError("csr: negative dimension");
    if (static_cast<std::int64_t>(row_ptr.size()) != rows + 1 || row_ptr.front() != 0 ||
        row_ptr.back() != nnz() || col.size() != val.size()) {
        throw InternalError("csr: inconsistent row pointers");
    }
    for (std::int64_t i = 0; i < rows; ++i) {
        if (row_ptr[i + 1] < row_ptr[i]) throw InternalError("csr: row pointers decrease");
        for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            if (col[k] < 0 || col[k] >= cols) {
                throw InternalError("csr: column out of range in row " + std::to_string(i));
            }
            if (k > row_ptr[i] && col[k] <= col[k - 1]) {
                throw InternalError("csr: columns not strictly increasing in row " +
                                    std::to_string(i));
            }
        }
    }
}

}  // namespace dilute
