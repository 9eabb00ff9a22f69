#pragma once

// Dense row-major matrix of doubles. Batches are stored one sample per column,
// so a layer evaluates W * X + b over the whole batch.

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "conenet/error.hpp"

namespace conenet {

class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw DimensionError("matrix data length " + std::to_string(data_.size()) +
                                 " does not match shape " + shape_string(rows_, cols_));
        }
    }

    /// Nested-list literal, e.g. Matrix{{1, 2}, {3, 4}}. All rows must have equal length.
    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& row : rows) {
            if (row.size() != cols_) throw DimensionError("ragged matrix literal");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix column(std::span<const double> values) {
        return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    [[nodiscard]] std::span<const double> row(std::size_t r) const {
        return std::span<const double>(data_).subspan(r * cols_, cols_);
    }

    [[nodiscard]] std::vector<double> col(std::size_t c) const {
        std::vector<double> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    /// Copy of the given columns, in order.
    [[nodiscard]] Matrix select_cols(std::span<const std::size_t> indices) const {
        Matrix out(rows_, indices.size());
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t k = 0; k < indices.size(); ++k) out(r, k) = (*this)(r, indices[k]);
        }
        return out;
    }

    [[nodiscard]] bool all_finite() const noexcept {
        for (double v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    [[nodiscard]] std::string shape() const { return shape_string(rows_, cols_); }

    friend bool operator==(const Matrix&, const Matrix&) = default;

    static std::string shape_string(std::size_t r, std::size_t c) {
        return "(" + std::to_string(r) + "x" + std::to_string(c) + ")";
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Plain product, each output entry accumulated sequentially over k.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul shape mismatch: " + a.shape() + " x " + b.shape());
    }
    Matrix out(a.rows(), b.cols());
    // i-k-j order keeps the inner loop contiguous; each out(i,j) still sums k = 0..K-1 in order.
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            const auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * brow[j];
        }
    }
    return out;
}

/// a * bᵀ without materializing the transpose.
inline Matrix matmul_transpose_b(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw DimensionError("matmul_transpose_b shape mismatch: " + a.shape() + " x " + b.shape() + "^T");
    }
    Matrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto arow = a.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const auto brow = b.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) acc += arow[k] * brow[k];
            out(i, j) = acc;
        }
    }
    return out;
}

/// aᵀ * b without materializing the transpose.
inline Matrix matmul_transpose_a(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw DimensionError("matmul_transpose_a shape mismatch: " + a.shape() + "^T x " + b.shape());
    }
    Matrix out(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const auto arow = a.row(k);
        const auto brow = b.row(k);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = arow[i];
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aki * brow[j];
        }
    }
    return out;
}

inline Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    }
    return out;
}

template <typename F>
Matrix elementwise(const Matrix& a, F&& f) {
    Matrix out(a.rows(), a.cols());
    auto src = a.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
    return out;
}

/// out[i,j] = a[i,j] + bias[i,0]
inline Matrix add_broadcast_col(const Matrix& a, const Matrix& bias) {
    if (bias.cols() != 1 || bias.rows() != a.rows()) {
        throw DimensionError("add_broadcast_col shape mismatch: " + a.shape() + " + " + bias.shape());
    }
    Matrix out = a;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double bi = bias(i, 0);
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) += bi;
    }
    return out;
}

inline Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("hadamard shape mismatch: " + a.shape() + " .* " + b.shape());
    }
    Matrix out = a;
    auto dst = out.data();
    auto src = b.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] *= src[i];
    return out;
}

/// Column vector of row sums.
inline Matrix row_sums(const Matrix& a) {
    Matrix out(a.rows(), 1);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (double v : a.row(i)) acc += v;
        out(i, 0) = acc;
    }
    return out;
}

}  // namespace conenet
