#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <future>
#include <string>
#include <vector>

#include "bimodal/instance.hpp"
#include "bimodal/learners.hpp"

namespace bimodal {

inline double empirical_risk(const Hypothesis& h, std::span<const Vec> xs,
                             std::span<const int> zs) {
    if (xs.empty() || xs.size() != zs.size())
        throw std::invalid_argument("empirical_risk: bad inputs");
    return risk_of(h, xs, zs);
}

inline double empirical_risk(const Hypothesis& h, const Dataset& d) {
    if (d.rows.empty()) throw std::invalid_argument("empirical_risk: empty dataset");
    std::size_t wrong = 0;
    for (const auto& row : d.rows)
        if (h.predict(row.x) != row.z) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(d.m());
}

// Monte Carlo estimate of the population risk: fresh ambient Gaussian draws
// labeled by the planted hypothesis from the witness.
inline double estimate_population_risk(const Hypothesis& h, const Witness& w,
                                       std::size_t n_test, Rng& rng) {
    if (n_test == 0) throw std::invalid_argument("estimate_population_risk: n_test >= 1");
    const Hypothesis planted = w.hypothesis();
    const std::size_t d = w.params.ambient_dim();
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < n_test; ++i) {
        const Vec x = gaussian_vector(rng, d);
        if (h.predict(x) != planted.predict(x)) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(n_test);
}

// C * sqrt((n ln m + ln(1/delta)) / m). The hidden constant of the
// VC-consistency bound is the explicit parameter C.
inline double vc_bound(std::size_t n_ambient, std::size_t m, double delta, double C) {
    if (m < 2) throw std::invalid_argument("vc_bound: m >= 2");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("vc_bound: delta in (0,1)");
    if (!(C > 0.0)) throw std::invalid_argument("vc_bound: C > 0");
    const double md = static_cast<double>(m);
    return C * std::sqrt((static_cast<double>(n_ambient) * std::log(md) +
                          std::log(1.0 / delta)) / md);
}

// ---------------------------------------------------------------------------
// Experiment orchestration.

struct MSpec {
    bool relative = true;  // m = value * ambient when true
    std::size_t value = 10;

    std::size_t resolve(std::size_t ambient) const { return relative ? value * ambient : value; }
};

struct ExperimentConfig {
    std::vector<std::string> learners;  // decoder | perceptron | localsearch | bruteforce
    Mode mode = Mode::proper;
    std::vector<std::size_t> n_grid;
    std::vector<MSpec> m_grid;
    std::size_t seeds = 1;
    std::size_t test_size = 10000;
    double positive_target = 0.5;
    std::uint64_t master_seed = 0;
    double delta = 0.05;
    double bound_C = 1.0;
    std::size_t jobs = 1;
};

struct ReportRow {
    std::string learner;
    Mode mode;
    std::size_t n = 0;
    std::size_t ambient = 0;
    std::size_t m = 0;
    std::uint64_t seed = 0;
    std::string status = "ok";
    double train_risk = 0.0;
    double test_risk = 0.0;
    double wall_ms = 0.0;
    double bound = 0.0;
};

struct ExperimentReport {
    std::vector<ReportRow> rows;

    std::string to_csv() const {
        const auto sig6 = [](double v) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.6g", v);
            return std::string(buf);
        };
        const auto dec6 = [](double v) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.6f", v);
            return std::string(buf);
        };
        std::string out = "learner,mode,n,ambient,m,seed,status,train_risk,test_risk,wall_ms,bound\n";
        for (const auto& r : rows) {
            out += r.learner;
            out += ',';
            out += mode_name(r.mode);
            out += ',' + std::to_string(r.n) + ',' + std::to_string(r.ambient) + ',' +
                   std::to_string(r.m) + ',' + std::to_string(r.seed) + ',' + r.status;
            if (r.status == "ok")
                out += ',' + dec6(r.train_risk) + ',' + dec6(r.test_risk) + ',' +
                       sig6(r.wall_ms) + ',' + sig6(r.bound);
            else
                out += ",,,,";
            out += '\n';
        }
        return out;
    }
};

inline Hypothesis run_learner(const std::string& name, const Dataset& d, std::uint64_t seed) {
    if (name == "decoder") return multimodal_decode(d);

    std::vector<Vec> xs;
    std::vector<int> zs;
    for (const auto& row : d.rows) {
        xs.push_back(row.x);
        zs.push_back(row.z);
    }
    const std::size_t k = (d.mode == Mode::proper) ? 2 : d.n_base - 1;
    if (name == "perceptron") return single_halfspace_baseline(xs, zs, 50);
    if (name == "localsearch")
        return local_search_unimodal(xs, zs, std::min<std::size_t>(k, 2), 20, 400,
                                     Rng(derive_seed(seed, 0x15)));
    if (name == "bruteforce") {
        BruteForceBudget budget;
        budget.deadline_seconds = 60.0;
        return brute_force_erm(xs, zs, std::min<std::size_t>(k, 2), budget);
    }
    throw std::invalid_argument("unknown learner '" + name + "'");
}

// One row per (learner, n, m, seed) cell, emitted in deterministic grid
// order. Per-cell seeds derive from (master seed, cell index), so cells are
// independent and may run concurrently. Learner failures land in the status
// column instead of aborting the sweep.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    struct Cell {
        std::string learner;
        std::size_t n, m;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    std::uint64_t index = 0;
    for (const auto& learner : cfg.learners)
        for (const std::size_t n : cfg.n_grid)
            for (const auto& mspec : cfg.m_grid) {
                const std::size_t ambient = (cfg.mode == Mode::proper) ? 3 * n : n;
                for (std::size_t s = 0; s < cfg.seeds; ++s)
                    cells.push_back({learner, n, mspec.resolve(ambient),
                                     derive_seed(cfg.master_seed, index++)});
            }

    const auto run_cell = [&](const Cell& cell) {
        ReportRow row;
        row.learner = cell.learner;
        row.mode = cfg.mode;
        row.n = cell.n;
        row.ambient = (cfg.mode == Mode::proper) ? 3 * cell.n : cell.n;
        row.m = cell.m;
        row.seed = cell.seed;
        try {
            const auto params =
                random_params(cfg.mode, cell.n, cell.seed, cfg.positive_target);
            auto [dataset, witness] = generate_dataset(params, cell.m);

            const auto t0 = std::chrono::steady_clock::now();
            const Hypothesis h = run_learner(cell.learner, dataset, cell.seed);
            const auto t1 = std::chrono::steady_clock::now();
            row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

            row.train_risk = empirical_risk(h, dataset);
            Rng test_rng(derive_seed(cell.seed, 0x7e57));
            row.test_risk = estimate_population_risk(h, witness, cfg.test_size, test_rng);
            row.bound = vc_bound(row.ambient, cell.m, cfg.delta, cfg.bound_C);
        } catch (const std::invalid_argument&) {
            row.status = "invalid-argument";
        } catch (const decode_failure&) {
            row.status = "decode-failure";
        } catch (const budget_exceeded_error&) {
            row.status = "budget-exceeded";
        }
        return row;
    };

    ExperimentReport report;
    report.rows.resize(cells.size());
    if (cfg.jobs <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) report.rows[i] = run_cell(cells[i]);
    } else {
        std::vector<std::future<void>> workers;
        std::atomic<std::size_t> next{0};
        for (std::size_t w = 0; w < cfg.jobs; ++w)
            workers.push_back(std::async(std::launch::async, [&] {
                for (std::size_t i = next++; i < cells.size(); i = next++)
                    report.rows[i] = run_cell(cells[i]);
            }));
        for (auto& f : workers) f.get();
    }
    return report;
}

// ---------------------------------------------------------------------------
// Runtime scaling.

struct ScalingRow {
    std::size_t n = 0;
    std::size_t m = 0;
    double decoder_ms = 0.0;
    double bruteforce_ms = -1.0;  // negative: not run
    bool bruteforce_timeout = false;
};

template <typename F>
double median_of_5_ms(F&& body) {
    body();  // warm-up, discarded
    std::vector<double> times;
    for (int rep = 0; rep < 5; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        body();
        const auto t1 = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::sort(times.begin(), times.end());
    return times[2];
}

// Decoder wall time (median of 5, warm-up discarded) over an ascending n
// grid at m = m_factor * ambient. Brute force runs only on cells within its
// budget; elsewhere it is marked as timed out without being attempted.
inline std::vector<ScalingRow> scaling_study(std::span<const std::size_t> n_grid,
                                             std::size_t m_factor = 10,
                                             std::uint64_t master_seed = 42,
                                             double bruteforce_deadline_seconds = 60.0,
                                             std::size_t bruteforce_max_ambient = 0) {
    std::vector<ScalingRow> table;
    for (std::size_t cell = 0; cell < n_grid.size(); ++cell) {
        const std::size_t n = n_grid[cell];
        const std::size_t ambient = 3 * n;
        const std::size_t m = m_factor * ambient;

        const auto params =
            random_params(Mode::proper, n, derive_seed(master_seed, cell), 0.4);
        auto [dataset, witness] = generate_dataset(params, m);

        ScalingRow row;
        row.n = n;
        row.m = m;
        row.decoder_ms = median_of_5_ms([&] { (void)multimodal_decode(dataset); });

        if (ambient <= bruteforce_max_ambient) {
            std::vector<Vec> xs;
            std::vector<int> zs;
            for (const auto& r : dataset.rows) {
                xs.push_back(r.x);
                zs.push_back(r.z);
            }
            BruteForceBudget budget;
            budget.deadline_seconds = bruteforce_deadline_seconds;
            try {
                const auto t0 = std::chrono::steady_clock::now();
                (void)brute_force_erm(xs, zs, 2, budget);
                const auto t1 = std::chrono::steady_clock::now();
                row.bruteforce_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            } catch (const budget_exceeded_error&) {
                row.bruteforce_timeout = true;
            }
        }
        table.push_back(row);
    }
    return table;
}

// least-squares slope of log(time) vs log(n)
inline double log_log_slope(std::span<const ScalingRow> table) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double count = static_cast<double>(table.size());
    for (const auto& r : table) {
        const double lx = std::log(static_cast<double>(r.n));
        const double ly = std::log(std::max(r.decoder_ms, 1e-6));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

}  // namespace bimodal
