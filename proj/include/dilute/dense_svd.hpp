#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dilute {

/// Singular values (descending) and, optionally, right singular vectors
/// stored column-major: vector i occupies right[i*cols .. (i+1)*cols).
struct DenseSvd {
    std::vector<double> values;
    std::vector<double> right;
    std::int64_t sweeps = 0;
};

/// SVD of an upper bidiagonal matrix with diagonal d (length k) and superdiagonal e
/// (length k-1) by implicit-shift QR (Golub-Kahan steps with a Wilkinson shift).
/// When `right` is non-empty it must hold a k x k column-major matrix V0; on return
/// it holds V0 W where B = Q S W^T. Values come back sorted descending, non-negative.
/// Throws ConvergenceError after max_sweeps QR steps (default 100 k).
std::vector<double> bidiagonal_svd(std::vector<double> d, std::vector<double> e,
                                   std::span<double> right, std::int64_t* sweeps = nullptr,
                                   std::int64_t max_sweeps = -1);

/// Householder bidiagonalization of a column-major rows x cols matrix followed by
/// bidiagonal_svd. Wide matrices are handled through the transpose; in that case the
/// spectrum is padded with zeros to length cols and vectors are not available.
DenseSvd dense_svd(std::vector<double> a, std::int64_t rows, std::int64_t cols, bool want_vectors);

}  // namespace dilute
