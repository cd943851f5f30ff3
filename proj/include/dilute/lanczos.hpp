#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dilute/sparse.hpp"

namespace dilute {

/// Abstract real linear map R^cols -> R^rows with access to its transpose.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;
    virtual std::int64_t rows() const = 0;
    virtual std::int64_t cols() const = 0;
    /// y = A x
    virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
    /// y = A^T x
    virtual void apply_transpose(std::span<const double> x, std::span<double> y) const = 0;
};

/// A CSR matrix together with its CSR transpose, so both products are row gathers.
class CsrOperator final : public LinearOperator {
public:
    explicit CsrOperator(const CsrMatrix& a);
    std::int64_t rows() const override { return a_->rows; }
    std::int64_t cols() const override { return a_->cols; }
    void apply(std::span<const double> x, std::span<double> y) const override;
    void apply_transpose(std::span<const double> x, std::span<double> y) const override;

private:
    const CsrMatrix* a_;
    CsrMatrix at_;
};

/// A row-major dense copy of a CSR matrix. Cheaper than CsrOperator when most entries
/// are stored, since no transpose is built.
class DenseOperator final : public LinearOperator {
public:
    explicit DenseOperator(const CsrMatrix& a);
    std::int64_t rows() const override { return rows_; }
    std::int64_t cols() const override { return cols_; }
    void apply(std::span<const double> x, std::span<double> y) const override;
    void apply_transpose(std::span<const double> x, std::span<double> y) const override;

private:
    std::int64_t rows_;
    std::int64_t cols_;
    std::vector<double> a_;
};

/// R^{-1} for an upper-triangular n x n row-major R (the operator is never formed).
class InverseUpperOperator final : public LinearOperator {
public:
    InverseUpperOperator(std::span<const double> r, std::int64_t n) : r_(r), n_(n) {}
    std::int64_t rows() const override { return n_; }
    std::int64_t cols() const override { return n_; }
    void apply(std::span<const double> x, std::span<double> y) const override;
    void apply_transpose(std::span<const double> x, std::span<double> y) const override;

private:
    std::span<const double> r_;
    std::int64_t n_;
};

struct LanczosOptions {
    double tol = 1e-8;          // target for ||A^T A v - s^2 v|| / s^2
    std::int64_t max_iter = 300;
    std::uint64_t seed = 0;     // start vector seed
};

struct LanczosResult {
    double value = 0.0;                // largest singular value estimate
    std::vector<double> right_vector;  // unit Ritz vector (length cols)
    std::int64_t iterations = 0;
    bool converged = false;
    double residual = 0.0;  // explicit ||A^T A v - s^2 v|| / s^2 at the returned vector
};

/// Golub-Kahan-Lanczos bidiagonalization with full reorthogonalization.
/// Returns the best estimate with converged = false when max_iter is reached.
LanczosResult largest_sv_lanczos(const LinearOperator& op, const LanczosOptions& options);

}  // namespace dilute
