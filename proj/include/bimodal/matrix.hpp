#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "bimodal/errors.hpp"

namespace bimodal {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Dense row-major matrix. Small, value-semantic; all the algebra in this
// artifact is O(n^3) dense work on matrices of a few hundred rows.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
        if (rows == 0 || cols == 0) throw std::invalid_argument("Matrix: zero dimension");
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

    Vec column(std::size_t j) const {
        Vec c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    Vec apply(std::span<const double> x) const {
        if (x.size() != cols_) throw std::invalid_argument("Matrix::apply: dimension mismatch");
        Vec y(rows_);
        for (std::size_t i = 0; i < rows_; ++i) y[i] = dot(row(i), x);
        return y;
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    // max |(A^T A - I)_{ij}|; 0 for a perfectly orthogonal matrix
    double orthogonality_defect() const {
        double worst = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) {
            for (std::size_t k = j; k < cols_; ++k) {
                double s = 0.0;
                for (std::size_t i = 0; i < rows_; ++i) s += (*this)(i, j) * (*this)(i, k);
                const double target = (j == k) ? 1.0 : 0.0;
                worst = std::max(worst, std::abs(s - target));
            }
        }
        return worst;
    }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vec data_;
};

// Direction vector pinned to unit length. Construction renormalizes but
// rejects inputs that are not already unit to within 1e-9.
class UnitVector {
public:
    explicit UnitVector(Vec entries) : entries_(std::move(entries)) {
        if (entries_.empty()) throw std::invalid_argument("UnitVector: empty");
        const double n = norm2(entries_);
        if (std::abs(n - 1.0) > 1e-9)
            throw std::invalid_argument("UnitVector: norm deviates from 1 by more than 1e-9");
        // keep already-unit entries bit-exact (serialized directions round-trip)
        if (std::abs(n - 1.0) > 1e-12)
            for (auto& e : entries_) e /= n;
    }

    // normalize an arbitrary nonzero vector
    static UnitVector normalized(Vec v) {
        const double n = norm2(v);
        if (!(n > 0.0) || !std::isfinite(n))
            throw std::invalid_argument("UnitVector::normalized: zero or non-finite vector");
        for (auto& e : v) e /= n;
        return UnitVector(std::move(v));
    }

    std::size_t dim() const noexcept { return entries_.size(); }
    double operator[](std::size_t i) const { return entries_[i]; }
    const Vec& entries() const noexcept { return entries_; }
    operator std::span<const double>() const { return entries_; }

    bool operator==(const UnitVector&) const = default;

private:
    Vec entries_;
};

}  // namespace bimodal
