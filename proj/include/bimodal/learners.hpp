#pragma once

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "bimodal/instance.hpp"
#include "bimodal/linalg.hpp"

namespace bimodal {

class decode_failure : public std::runtime_error {
public:
    explicit decode_failure(const rank_error& cause)
        : std::runtime_error(std::string("decode failure: ") + cause.what()),
          achieved_(cause.achieved_rank()) {}

    std::size_t achieved_rank() const noexcept { return achieved_; }

private:
    std::size_t achieved_;
};

// Reads the planted directions back out of a recovered fingerprint matrix.
// Proper mode: column n carries (r1/sqrt2 ; r2/sqrt2) below the identity
// block. Improper mode: column sqrt(n) carries the sqrt(n)-1 stacked
// directions scaled by 1/sqrt(sqrt(n)-1). Each extracted block must be unit
// after rescaling to within 1e-6, else the data did not come from this
// construction.
inline std::vector<UnitVector> recover_directions(const Matrix& q, Mode mode,
                                                  std::size_t n_base) {
    std::vector<UnitVector> out;
    const auto extract = [&](std::size_t col, std::size_t row0, std::size_t len, double scale) {
        Vec v(len);
        for (std::size_t i = 0; i < len; ++i) v[i] = q(row0 + i, col) * scale;
        const double dev = std::abs(norm2(v) - 1.0);
        if (dev > 1e-6) throw corrupted_fingerprint_error(dev);
        out.push_back(UnitVector::normalized(std::move(v)));
    };

    if (mode == Mode::proper) {
        const std::size_t n = n_base;
        if (q.rows() != 3 * n || q.cols() != 3 * n)
            throw std::invalid_argument("recover_directions: Q must be 3n x 3n");
        extract(n, n, n, std::sqrt(2.0));
        extract(n, 2 * n, n, std::sqrt(2.0));
    } else {
        const std::size_t s = n_base;  // sqrt(n)
        if (s < 2 || q.rows() != s * s || q.cols() != s * s)
            throw std::invalid_argument("recover_directions: Q must be n x n, n = n_base^2");
        const double scale = std::sqrt(static_cast<double>(s - 1));
        for (std::size_t j = 0; j + 1 < s; ++j) extract(s, s + j * s, s, scale);
    }
    return out;
}

// c_j = max over positive rows of r_j^T x. With no positive rows the max is
// undefined; the all-negative sentinel (min projection - 1) keeps the
// hypothesis consistent with the training set.
inline std::vector<double> fit_thresholds(std::span<const Row> rows,
                                          std::span<const UnitVector> directions) {
    std::vector<double> out;
    for (const auto& r : directions) {
        std::optional<double> best;
        double overall_min = 0.0;
        bool first = true;
        for (const auto& row : rows) {
            const double proj = dot(r, row.x);
            if (first || proj < overall_min) overall_min = proj;
            first = false;
            if (row.z > 0 && (!best || proj > *best)) best = proj;
        }
        out.push_back(best ? *best : overall_min - 1.0);
    }
    return out;
}

// Algorithm: pick ambient_dim linearly independent x rows, solve the linear
// system Q x_i = y_i, read the planted directions out of Q, and set each
// threshold to the max projection over the positive rows. Runs in
// O(m d^2 + d^3) for ambient dimension d.
inline Hypothesis multimodal_decode(const Dataset& d) {
    if (d.m() < d.ambient)
        throw std::invalid_argument("multimodal_decode: need at least ambient_dim rows");

    std::vector<Vec> xs;
    xs.reserve(d.m());
    for (const auto& row : d.rows) xs.push_back(row.x);

    std::vector<std::size_t> idx;
    try {
        idx = select_independent_subset(xs, d.ambient);
    } catch (const rank_error& e) {
        throw decode_failure(e);
    }

    std::vector<Vec> sel_x, sel_y;
    for (const std::size_t i : idx) {
        sel_x.push_back(d.rows[i].x);
        sel_y.push_back(d.rows[i].y);
    }
    Matrix q;
    try {
        q = solve_linear_map(sel_x, sel_y);
    } catch (const rank_error& e) {
        throw decode_failure(e);
    }

    const auto dirs = recover_directions(q, d.mode, d.n_base);
    std::vector<UnitVector> padded;
    for (const auto& r : dirs) padded.push_back(pad_direction(r, d.ambient));
    const auto thresholds = fit_thresholds(d.rows, padded);

    Hypothesis h;
    for (std::size_t j = 0; j < padded.size(); ++j)
        h.halfspaces.push_back({padded[j], thresholds[j]});
    return h;
}

// ---------------------------------------------------------------------------
// Unimodal baselines.

inline double risk_of(const Hypothesis& h, std::span<const Vec> xs, std::span<const int> zs) {
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (h.predict(xs[i]) != zs[i]) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(xs.size());
}

struct BruteForceBudget {
    std::uint64_t max_pair_evals = 2'000'000'000ULL;
    double deadline_seconds = 0.0;  // 0: no wall-clock limit
};

class budget_exceeded_error : public std::runtime_error {
public:
    budget_exceeded_error(Hypothesis best, double best_risk)
        : std::runtime_error("brute force budget exceeded (best risk so far " +
                             std::to_string(best_risk) + ")"),
          best_(std::move(best)), best_risk_(best_risk) {}

    const Hypothesis& best_so_far() const noexcept { return best_; }
    double best_risk() const noexcept { return best_risk_; }

private:
    Hypothesis best_;
    double best_risk_;
};

namespace detail {

// Normal of a hyperplane through the affine span of the given points,
// padded with coordinate axes when fewer than d points are supplied.
inline std::optional<Vec> hyperplane_normal(std::span<const Vec> pts,
                                            std::span<const std::size_t> subset,
                                            std::size_t d) {
    std::vector<Vec> rows;  // orthonormalized span of (p_i - p_0) and filler axes
    const auto add = [&](Vec v) {
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : rows) {
                const double c = dot(b, v);
                for (std::size_t i = 0; i < d; ++i) v[i] -= c * b[i];
            }
        const double n = norm2(v);
        if (n < 1e-10) return false;
        for (auto& e : v) e /= n;
        rows.push_back(std::move(v));
        return true;
    };

    const Vec& base = pts[subset[0]];
    for (std::size_t t = 1; t < subset.size(); ++t) {
        Vec diff(d);
        for (std::size_t i = 0; i < d; ++i) diff[i] = pts[subset[t]][i] - base[i];
        if (!add(std::move(diff))) return std::nullopt;  // degenerate subset
    }
    for (std::size_t axis = 0; axis < d && rows.size() < d - 1; ++axis) {
        Vec e(d, 0.0);
        e[axis] = 1.0;
        add(std::move(e));
    }
    if (rows.size() != d - 1) return std::nullopt;

    // remaining orthogonal direction
    for (std::size_t axis = 0; axis < d; ++axis) {
        Vec e(d, 0.0);
        e[axis] = 1.0;
        if (add(std::move(e))) return rows.back();
    }
    return std::nullopt;
}

struct MaskedCandidate {
    Vec r;          // unit normal
    double c;
    std::uint64_t inside;  // bit i set iff point i satisfies r^T x <= c
};

}  // namespace detail

// Exact 0-1 risk minimizer over the candidate family of halfspaces whose
// boundary passes through a size <= d subset of the points (threshold
// perturbed outward by +-eps), plus axis-aligned fallbacks. Exhaustive over
// pairs for k = 2. Intended for tiny scale; the pair loop respects the
// budget and throws with the best hypothesis found so far when it runs out.
inline Hypothesis brute_force_erm(std::span<const Vec> xs, std::span<const int> zs,
                                  std::size_t k, const BruteForceBudget& budget = {}) {
    const std::size_t m = xs.size();
    if (m == 0 || m != zs.size()) throw std::invalid_argument("brute_force_erm: bad inputs");
    if (m > 64) throw std::invalid_argument("brute_force_erm: at most 64 points");
    if (k != 1 && k != 2) throw std::invalid_argument("brute_force_erm: k must be 1 or 2");
    const std::size_t d = xs.front().size();

    double scale = 0.0;
    for (const auto& x : xs) scale = std::max(scale, norm2(x));
    const double eps = 1e-6 * std::max(scale, 1.0);

    std::vector<detail::MaskedCandidate> cands;
    const auto push = [&](Vec r, double c) {
        std::uint64_t inside = 0;
        for (std::size_t i = 0; i < m; ++i)
            if (dot(r, xs[i]) <= c) inside |= 1ULL << i;
        cands.push_back({std::move(r), c, inside});
    };
    const auto push_oriented = [&](const Vec& r, double c0) {
        push(r, c0 + eps);
        push(r, c0 - eps);
        Vec neg(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) neg[i] = -r[i];
        push(neg, -c0 + eps);
        push(neg, -c0 - eps);
    };

    // trivial accept-all / reject-all
    {
        Vec e1(d, 0.0);
        e1[0] = 1.0;
        double lo = dot(e1, xs[0]), hi = lo;
        for (const auto& x : xs) {
            lo = std::min(lo, x[0]);
            hi = std::max(hi, x[0]);
        }
        push(e1, hi + 1.0);
        push(e1, lo - 1.0);
    }
    // axis-aligned fallbacks at every point projection
    for (std::size_t axis = 0; axis < d; ++axis) {
        Vec e(d, 0.0);
        e[axis] = 1.0;
        for (const auto& x : xs) push_oriented(e, x[axis]);
    }
    // boundaries through point subsets of size 1..d
    std::vector<std::size_t> subset;
    const auto emit = [&]() {
        const auto normal = detail::hyperplane_normal(xs, subset, d);
        if (!normal) return;
        push_oriented(*normal, dot(*normal, xs[subset[0]]));
    };
    const auto enumerate = [&](auto&& self, std::size_t start, std::size_t remaining) -> void {
        if (remaining == 0) {
            emit();
            return;
        }
        for (std::size_t i = start; i + remaining <= m; ++i) {
            subset.push_back(i);
            self(self, i + 1, remaining - 1);
            subset.pop_back();
        }
    };
    for (std::size_t size = 1; size <= std::min(d, m); ++size)
        enumerate(enumerate, 0, size);

    std::uint64_t z_mask = 0;
    for (std::size_t i = 0; i < m; ++i)
        if (zs[i] > 0) z_mask |= 1ULL << i;
    const std::uint64_t all = (m == 64) ? ~0ULL : ((1ULL << m) - 1);

    const auto errors_of = [&](std::uint64_t inside) {
        return static_cast<std::size_t>(std::popcount((inside ^ z_mask) & all));
    };

    std::size_t best_errors = m + 1;
    std::size_t best_i = 0, best_j = 0;
    const auto consider = [&](std::size_t i, std::size_t j, std::uint64_t inside) {
        const std::size_t e = errors_of(inside);
        if (e < best_errors) {
            best_errors = e;
            best_i = i;
            best_j = j;
        }
    };

    const auto make_hypothesis = [&]() {
        Hypothesis h;
        h.halfspaces.push_back({UnitVector::normalized(cands[best_i].r), cands[best_i].c});
        if (k == 2 && best_j != best_i)
            h.halfspaces.push_back({UnitVector::normalized(cands[best_j].r), cands[best_j].c});
        return h;
    };

    for (std::size_t i = 0; i < cands.size(); ++i) consider(i, i, cands[i].inside);

    if (k == 2) {
        const auto start = std::chrono::steady_clock::now();
        std::uint64_t evals = 0;
        for (std::size_t i = 0; i < cands.size() && best_errors > 0; ++i) {
            for (std::size_t j = i + 1; j < cands.size(); ++j)
                consider(i, j, cands[i].inside & cands[j].inside);
            evals += cands.size() - i - 1;
            const bool over_time =
                budget.deadline_seconds > 0.0 &&
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >
                    budget.deadline_seconds;
            if (evals > budget.max_pair_evals || over_time) {
                const auto best = make_hypothesis();
                throw budget_exceeded_error(best,
                                            static_cast<double>(best_errors) /
                                                static_cast<double>(m));
            }
        }
    }
    return make_hypothesis();
}

// Hill climbing on 0-1 risk: random restarts, Gaussian perturbations of all
// (r_j, c_j) with geometric step decay, keep the best iterate. The
// all-negative hypothesis is always among the initial candidates.
inline Hypothesis local_search_unimodal(std::span<const Vec> xs, std::span<const int> zs,
                                        std::size_t k, std::size_t restarts,
                                        std::size_t iters, Rng rng) {
    if (xs.empty() || xs.size() != zs.size())
        throw std::invalid_argument("local_search_unimodal: bad inputs");
    if (k < 1 || k > 2) throw std::invalid_argument("local_search_unimodal: k must be 1 or 2");
    const std::size_t d = xs.front().size();

    double scale = 0.0;
    for (const auto& x : xs) scale = std::max(scale, norm2(x));
    scale = std::max(scale, 1.0);

    const auto all_negative = [&]() {
        Vec e1(d, 0.0);
        e1[0] = 1.0;
        double lo = xs[0][0];
        for (const auto& x : xs) lo = std::min(lo, x[0]);
        Hypothesis h;
        for (std::size_t j = 0; j < k; ++j)
            h.halfspaces.push_back({UnitVector(e1), lo - 1.0});
        return h;
    };

    Hypothesis best = all_negative();
    double best_risk = risk_of(best, xs, zs);

    for (std::size_t r = 0; r < restarts && best_risk > 0.0; ++r) {
        Rng local = rng.split(r + 1);
        Hypothesis cur;
        for (std::size_t j = 0; j < k; ++j) {
            const UnitVector dir = unit_sphere_sample(local, d);
            const std::size_t pick = local.next_below(xs.size());
            cur.halfspaces.push_back({dir, dot(dir, xs[pick])});
        }
        double cur_risk = risk_of(cur, xs, zs);

        double step = 0.5;
        for (std::size_t it = 0; it < iters && cur_risk > 0.0; ++it) {
            Hypothesis cand = cur;
            for (auto& h : cand.halfspaces) {
                Vec v = h.r.entries();
                for (auto& e : v) e += step * local.next_gaussian();
                const double n = norm2(v);
                if (n < 1e-12) continue;
                for (auto& e : v) e /= n;
                h.r = UnitVector(std::move(v));
                h.c += step * scale * local.next_gaussian() * 0.3;
            }
            const double cand_risk = risk_of(cand, xs, zs);
            if (cand_risk <= cur_risk) {
                cur = std::move(cand);
                cur_risk = cand_risk;
            }
            step *= 0.995;
        }
        if (cur_risk < best_risk) {
            best = std::move(cur);
            best_risk = cur_risk;
        }
    }
    return best;
}

// Perceptron with an affine term; returns the best pass by training risk.
// Label convention: z = +1 iff r^T x <= c, so the classifier sign is
// sgn(c - r^T x) with sgn(0) = +1.
inline Hypothesis single_halfspace_baseline(std::span<const Vec> xs, std::span<const int> zs,
                                            std::size_t passes) {
    if (xs.empty() || xs.size() != zs.size())
        throw std::invalid_argument("single_halfspace_baseline: bad inputs");
    const std::size_t d = xs.front().size();

    // augmented weight (w, b); predict +1 iff w^T x + b >= 0
    Vec w(d, 0.0);
    double b = 0.0;

    const auto to_hypothesis = [&](const Vec& wv, double bv) {
        const double n = norm2(wv);
        Hypothesis h;
        if (n < 1e-12) {
            // degenerate weight: constant sign(b); encode via a huge threshold
            Vec e1(d, 0.0);
            e1[0] = 1.0;
            double lo = xs[0][0], hi = lo;
            for (const auto& x : xs) {
                lo = std::min(lo, x[0]);
                hi = std::max(hi, x[0]);
            }
            h.halfspaces.push_back({UnitVector(e1), bv >= 0.0 ? hi + 1.0 : lo - 1.0});
        } else {
            Vec r(d);
            for (std::size_t i = 0; i < d; ++i) r[i] = -wv[i] / n;
            h.halfspaces.push_back({UnitVector::normalized(std::move(r)), bv / n});
        }
        return h;
    };

    Hypothesis best = to_hypothesis(w, b);
    double best_risk = risk_of(best, xs, zs);

    for (std::size_t pass = 0; pass < passes && best_risk > 0.0; ++pass) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double margin = dot(w, xs[i]) + b;
            const int pred = margin >= 0.0 ? +1 : -1;
            if (pred != zs[i]) {
                for (std::size_t j = 0; j < d; ++j) w[j] += zs[i] * xs[i][j];
                b += zs[i];
            }
        }
        const Hypothesis cur = to_hypothesis(w, b);
        const double cur_risk = risk_of(cur, xs, zs);
        if (cur_risk < best_risk) {
            best = cur;
            best_risk = cur_risk;
        }
    }
    return best;
}

}  // namespace bimodal
