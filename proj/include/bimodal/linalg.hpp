#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "bimodal/matrix.hpp"
#include "bimodal/rng.hpp"

namespace bimodal {

// Orthogonal matrix whose first column equals u, via the Householder
// reflection through w = u + sign(u1) e1 (sign picked against cancellation).
// Deterministic: the same u always yields the same completion.
inline Matrix orthogonal_completion(const UnitVector& u) {
    const std::size_t d = u.dim();
    const double norm_dev = std::abs(norm2(u.entries()) - 1.0);
    if (norm_dev > 1e-9) throw std::invalid_argument("orthogonal_completion: input not unit");

    double dist_e1 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double diff = u[i] - (i == 0 ? 1.0 : 0.0);
        dist_e1 += diff * diff;
    }
    if (std::sqrt(dist_e1) <= 1e-14) return Matrix::identity(d);

    const double s = (u[0] >= 0.0) ? 1.0 : -1.0;
    Vec w = u.entries();
    w[0] += s;
    const double beta = 2.0 / dot(w, w);

    // Q = -s (I - beta w w^T), so Q e1 = u
    Matrix q(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            q(i, j) = -s * ((i == j ? 1.0 : 0.0) - beta * w[i] * w[j]);
    return q;
}

// Scans the point stream in order and keeps the first k points that are
// linearly independent to within rel_tol (relative to the running max point
// norm), using incrementally maintained Gram-Schmidt elimination state.
// Throws rank_error with the achieved rank if the stream is exhausted first.
inline std::vector<std::size_t> select_independent_subset(std::span<const Vec> points,
                                                          std::size_t k,
                                                          double rel_tol = 1e-8) {
    if (points.empty()) throw rank_error(0, k);
    const std::size_t d = points.front().size();
    if (k > d) throw std::invalid_argument("select_independent_subset: k exceeds dimension");
    for (const auto& p : points)
        if (p.size() != d)
            throw std::invalid_argument("select_independent_subset: inconsistent dimensions");

    std::vector<Vec> basis;       // orthonormal
    std::vector<std::size_t> chosen;
    double max_norm = 0.0;
    for (std::size_t t = 0; t < points.size() && chosen.size() < k; ++t) {
        max_norm = std::max(max_norm, norm2(points[t]));
        Vec r = points[t];
        for (int pass = 0; pass < 2; ++pass) {  // reorthogonalize once
            for (const auto& b : basis) {
                const double c = dot(b, r);
                for (std::size_t i = 0; i < d; ++i) r[i] -= c * b[i];
            }
        }
        const double rn = norm2(r);
        if (rn > rel_tol * max_norm) {
            for (auto& e : r) e /= rn;
            basis.push_back(std::move(r));
            chosen.push_back(t);
        }
    }
    if (chosen.size() < k) throw rank_error(chosen.size(), k);
    return chosen;
}

namespace detail {

// LU with partial pivoting, in place. perm maps output row -> input row.
inline void lu_factor(Matrix& a, std::vector<std::size_t>& perm) {
    const std::size_t n = a.rows();
    perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;

    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t i = col + 1; i < n; ++i)
            if (std::abs(a(i, col)) > std::abs(a(pivot, col))) pivot = i;
        if (std::abs(a(pivot, col)) <= 1e-13 * scale) throw rank_error(col, n);
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
            std::swap(perm[col], perm[pivot]);
        }
        const double inv = 1.0 / a(col, col);
        for (std::size_t i = col + 1; i < n; ++i) {
            const double f = a(i, col) * inv;
            a(i, col) = f;
            for (std::size_t j = col + 1; j < n; ++j) a(i, j) -= f * a(col, j);
        }
    }
}

inline Vec lu_solve(const Matrix& lu, const std::vector<std::size_t>& perm,
                    std::span<const double> b) {
    const std::size_t n = lu.rows();
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm[i]];
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) x[i] -= lu(i, j) * x[j];
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu(i, j) * x[j];
        x[i] /= lu(i, i);
    }
    return x;
}

}  // namespace detail

// Recovers the d x d map Q with Q x_i = y_i from d full-rank samples.
// One partial-pivoted factorization of [x_1 ... x_d]^T is reused for every
// right-hand side.
inline Matrix solve_linear_map(std::span<const Vec> xs, std::span<const Vec> ys) {
    if (xs.empty() || xs.size() != ys.size())
        throw std::invalid_argument("solve_linear_map: need equally many x and y");
    const std::size_t d = xs.front().size();
    if (xs.size() != d) throw std::invalid_argument("solve_linear_map: need exactly d samples");

    Matrix m(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        if (xs[i].size() != d || ys[i].size() != d)
            throw std::invalid_argument("solve_linear_map: dimension mismatch");
        for (std::size_t j = 0; j < d; ++j) m(i, j) = xs[i][j];
    }
    std::vector<std::size_t> perm;
    detail::lu_factor(m, perm);

    // rows of [y_1 ... y_d]^T, one column of Q^T per solve
    Matrix q(d, d);
    Vec rhs(d);
    for (std::size_t col = 0; col < d; ++col) {
        for (std::size_t i = 0; i < d; ++i) rhs[i] = ys[i][col];
        const Vec qt_col = detail::lu_solve(m, perm, rhs);
        for (std::size_t j = 0; j < d; ++j) q(col, j) = qt_col[j];
    }
    return q;
}

// Uniform direction on the sphere: normalized standard Gaussian.
inline UnitVector unit_sphere_sample(Rng& rng, std::size_t d) {
    if (d == 0) throw std::invalid_argument("unit_sphere_sample: d must be positive");
    Vec v(d);
    double n = 0.0;
    do {
        for (auto& e : v) e = rng.next_gaussian();
        n = norm2(v);
    } while (n < 1e-150);
    for (auto& e : v) e /= n;
    return UnitVector(std::move(v));
}

inline Vec gaussian_vector(Rng& rng, std::size_t d) {
    Vec v(d);
    for (auto& e : v) e = rng.next_gaussian();
    return v;
}

}  // namespace bimodal
