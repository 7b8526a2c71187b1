#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "bimodal/linalg.hpp"
#include "bimodal/matrix.hpp"
#include "bimodal/rng.hpp"

namespace bimodal {

enum class Mode { proper, improper };

inline const char* mode_name(Mode m) { return m == Mode::proper ? "proper" : "improper"; }

// closed halfspace r^T x <= c
struct Halfspace {
    UnitVector r;
    double c;
};

// Intersection of halfspaces; predicts +1 iff the point satisfies every
// constraint. The boundary counts as inside (sgn(0) = +1).
struct Hypothesis {
    std::vector<Halfspace> halfspaces;

    std::size_t dim() const { return halfspaces.front().r.dim(); }

    int predict(std::span<const double> x) const {
        for (const auto& h : halfspaces) {
            if (x.size() != h.r.dim())
                throw std::invalid_argument("Hypothesis::predict: dimension mismatch");
            if (dot(h.r, x) > h.c) return -1;
        }
        return +1;
    }
};

inline int predict(const Hypothesis& h, std::span<const double> x) { return h.predict(x); }

inline std::optional<std::size_t> isqrt_exact(std::size_t n) {
    const auto s = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    return s * s == n ? std::optional(s) : std::nullopt;
}

// Hidden concept plus sampling configuration. Proper mode plants two
// directions in R^n with ambient dimension 3n; improper mode plants
// sqrt(n)-1 directions in R^sqrt(n) with ambient dimension n.
struct InstanceParams {
    Mode mode = Mode::proper;
    std::size_t n = 1;                     // base dimension
    std::vector<UnitVector> directions;
    std::vector<double> thresholds;        // empty: calibrate at generation
    double positive_target = 0.5;
    std::uint64_t seed = 0;

    std::size_t ambient_dim() const { return mode == Mode::proper ? 3 * n : n; }

    std::size_t base_dim() const {
        if (mode == Mode::proper) return n;
        return *isqrt_exact(n);
    }

    std::size_t halfspace_count() const {
        return mode == Mode::proper ? 2 : base_dim() - 1;
    }

    void validate() const {
        if (n == 0) throw std::invalid_argument("InstanceParams: n must be positive");
        if (!(positive_target > 0.0 && positive_target < 1.0))
            throw std::invalid_argument("InstanceParams: positive_target must be in (0,1)");
        if (mode == Mode::improper) {
            const auto s = isqrt_exact(n);
            if (!s || *s < 2)
                throw std::invalid_argument("InstanceParams: n must be a perfect square >= 4");
        }
        const std::size_t k = halfspace_count();
        if (directions.size() != k)
            throw std::invalid_argument("InstanceParams: expected " + std::to_string(k) +
                                        " directions");
        for (const auto& r : directions)
            if (r.dim() != base_dim())
                throw std::invalid_argument("InstanceParams: direction dimension mismatch");
        if (!thresholds.empty() && thresholds.size() != k)
            throw std::invalid_argument("InstanceParams: threshold count mismatch");
    }
};

// Draws the planted directions from the seed.
inline InstanceParams random_params(Mode mode, std::size_t n, std::uint64_t seed,
                                    double positive_target) {
    InstanceParams p;
    p.mode = mode;
    p.n = n;
    p.seed = seed;
    p.positive_target = positive_target;
    if (mode == Mode::improper) {
        const auto s = isqrt_exact(n);
        if (!s || *s < 2)
            throw std::invalid_argument("improper mode requires n a perfect square >= 4");
    }
    Rng rng(derive_seed(seed, 0x11));
    const std::size_t k = (mode == Mode::proper) ? 2 : *isqrt_exact(n) - 1;
    const std::size_t d = (mode == Mode::proper) ? n : *isqrt_exact(n);
    for (std::size_t j = 0; j < k; ++j) p.directions.push_back(unit_sphere_sample(rng, d));
    return p;
}

// (I_n 0; 0 F(r1, r2)) with F an orthogonal completion of the stacked
// column (r1/sqrt2, r2/sqrt2).
inline Matrix build_Q_proper(const UnitVector& r1, const UnitVector& r2) {
    if (r1.dim() != r2.dim())
        throw std::invalid_argument("build_Q_proper: direction dimensions differ");
    const std::size_t n = r1.dim();

    Vec stacked(2 * n);
    const double inv = 1.0 / std::sqrt(2.0);
    for (std::size_t i = 0; i < n; ++i) {
        stacked[i] = r1[i] * inv;
        stacked[n + i] = r2[i] * inv;
    }
    const Matrix f = orthogonal_completion(UnitVector::normalized(std::move(stacked)));

    Matrix q(3 * n, 3 * n);
    for (std::size_t i = 0; i < n; ++i) q(i, i) = 1.0;
    for (std::size_t i = 0; i < 2 * n; ++i)
        for (std::size_t j = 0; j < 2 * n; ++j) q(n + i, n + j) = f(i, j);
    return q;
}

// (I_sqrt(n) 0; 0 F(v_1..v_{sqrt(n)-1})) with the stacked column scaled by
// 1/sqrt(sqrt(n)-1).
inline Matrix build_Q_improper(std::span<const UnitVector> directions) {
    const std::size_t k = directions.size();
    if (k == 0) throw std::invalid_argument("build_Q_improper: no directions");
    const std::size_t s = k + 1;  // sqrt(n)
    const std::size_t n = s * s;
    for (const auto& v : directions)
        if (v.dim() != s)
            throw std::invalid_argument("build_Q_improper: directions must have dim sqrt(n)");

    Vec stacked(n - s);
    const double inv = 1.0 / std::sqrt(static_cast<double>(k));
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < s; ++i) stacked[j * s + i] = directions[j][i] * inv;
    const Matrix f = orthogonal_completion(UnitVector::normalized(std::move(stacked)));

    Matrix q(n, n);
    for (std::size_t i = 0; i < s; ++i) q(i, i) = 1.0;
    for (std::size_t i = 0; i < n - s; ++i)
        for (std::size_t j = 0; j < n - s; ++j) q(s + i, s + j) = f(i, j);
    return q;
}

inline Matrix build_Q(const InstanceParams& p) {
    p.validate();
    if (p.mode == Mode::proper) return build_Q_proper(p.directions[0], p.directions[1]);
    return build_Q_improper(p.directions);
}

// direction padded with zeros to the ambient dimension
inline UnitVector pad_direction(const UnitVector& r, std::size_t ambient) {
    Vec v(ambient, 0.0);
    std::copy(r.entries().begin(), r.entries().end(), v.begin());
    return UnitVector(std::move(v));
}

struct Row {
    Vec x;
    Vec y;
    int z;
};

struct Dataset {
    Mode mode = Mode::proper;
    std::size_t n_base = 1;
    std::size_t ambient = 3;
    std::uint64_t seed = 0;
    std::vector<Row> rows;

    std::size_t m() const { return rows.size(); }

    bool operator==(const Dataset& o) const {
        if (mode != o.mode || n_base != o.n_base || ambient != o.ambient || seed != o.seed ||
            rows.size() != o.rows.size())
            return false;
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i].x != o.rows[i].x || rows[i].y != o.rows[i].y || rows[i].z != o.rows[i].z)
                return false;
        return true;
    }
};

// Hidden instance data kept next to a dataset for post-hoc checks; never
// handed to learners.
struct Witness {
    InstanceParams params;
    Matrix Q;

    // planted hypothesis over the ambient space
    Hypothesis hypothesis() const {
        Hypothesis h;
        for (std::size_t j = 0; j < params.directions.size(); ++j)
            h.halfspaces.push_back(
                {pad_direction(params.directions[j], params.ambient_dim()), params.thresholds[j]});
        return h;
    }
};

// Thresholds such that the planted positive rate lands near the target:
// c_j is the q-th empirical quantile of r_j^T x with q = target^(1/k).
// Since x is standard Gaussian and r_j unit, r_j^T x is a standard normal
// scalar, so the calibration draw samples that scalar directly.
inline std::vector<double> calibrate_thresholds(std::size_t k, double positive_target,
                                                std::uint64_t seed) {
    constexpr std::size_t kCalibrationDraws = 100000;
    const double q = std::pow(positive_target, 1.0 / static_cast<double>(k));
    std::vector<double> out;
    for (std::size_t j = 0; j < k; ++j) {
        Rng rng(derive_seed(seed, 0x1000 + j));
        Vec sample(kCalibrationDraws);
        for (auto& v : sample) v = rng.next_gaussian();
        std::sort(sample.begin(), sample.end());
        const auto idx = static_cast<std::size_t>(q * (kCalibrationDraws - 1));
        out.push_back(sample[idx]);
    }
    return out;
}

// Samples m ambient Gaussian points, labels them with the planted
// intersection, and pairs each x with its fingerprinted image y = Qx.
inline std::pair<Dataset, Witness> generate_dataset(InstanceParams params, std::size_t m) {
    params.validate();
    if (m == 0) throw std::invalid_argument("generate_dataset: m must be positive");

    if (params.thresholds.empty())
        params.thresholds =
            calibrate_thresholds(params.halfspace_count(), params.positive_target, params.seed);

    Witness w{params, build_Q(params)};
    const Hypothesis planted = w.hypothesis();

    Dataset d;
    d.mode = params.mode;
    d.n_base = params.base_dim();
    d.ambient = params.ambient_dim();
    d.seed = params.seed;
    d.rows.reserve(m);

    Rng rng(derive_seed(params.seed, 0x2000));
    for (std::size_t i = 0; i < m; ++i) {
        Vec x = gaussian_vector(rng, d.ambient);
        Vec y = w.Q.apply(x);
        const int z = planted.predict(x);
        d.rows.push_back({std::move(x), std::move(y), z});
    }
    return {std::move(d), std::move(w)};
}

}  // namespace bimodal
