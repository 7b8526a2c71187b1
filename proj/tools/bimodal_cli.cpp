// Command-line front end: instance generation, decoding, unimodal
// baselines, dataset verification, benchmark sweeps, and bound curves.
//
// Exit codes: 0 success, 1 I/O failure, 2 usage or file-format error,
// 3 decode failure, 4 verification failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bimodal/eval.hpp"
#include "bimodal/io.hpp"
#include "bimodal/learners.hpp"

using namespace bimodal;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDecode = 3;
constexpr int kExitVerify = 4;

struct io_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_failure("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_failure("cannot write " + path);
    out << content;
    if (!out) throw io_failure("write failed for " + path);
}

Mode parse_mode(const std::string& s) {
    if (s == "proper") return Mode::proper;
    if (s == "improper") return Mode::improper;
    throw CLI::ValidationError("--mode", "must be proper or improper");
}

// hypothesis file: witness-format halfspaces without the Q block
std::string serialize_hypothesis(const Hypothesis& h, Mode mode, std::size_t n_base) {
    std::string out = "HYPOTHESIS v1\n";
    out += "mode=" + std::string(mode_name(mode)) + " n=" + std::to_string(n_base) +
           " k=" + std::to_string(h.halfspaces.size()) + "\n";
    for (std::size_t j = 0; j < h.halfspaces.size(); ++j) {
        out += "r " + std::to_string(j + 1) + ":";
        for (const double v : h.halfspaces[j].r.entries()) out += ' ' + fmt17(v);
        out += "\nc " + std::to_string(j + 1) + ": " + fmt17(h.halfspaces[j].c) + '\n';
    }
    return out;
}

void split_xz(const Dataset& d, std::vector<Vec>& xs, std::vector<int>& zs) {
    for (const auto& row : d.rows) {
        xs.push_back(row.x);
        zs.push_back(row.z);
    }
}

// `--config file` of key=value lines; each key maps to --key. A key that is
// also given on the command line is a conflict, not a silent override.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
    std::string config_path;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") {
            config_path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
            break;
        }
    if (config_path.empty()) return args;

    std::ifstream in(config_path);
    if (!in) throw io_failure("cannot open config " + config_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0)
            throw CLI::ParseError("config line " + std::to_string(lineno) +
                                      ": expected key=value",
                                  kExitUsage);
        const std::string flag = "--" + line.substr(0, eq);
        for (const auto& a : args)
            if (a == flag)
                throw CLI::ParseError("config key '" + line.substr(0, eq) +
                                          "' conflicts with command-line flag",
                                      kExitUsage);
        args.push_back(flag);
        args.push_back(line.substr(eq + 1));
    }
    return args;
}

// --- gen -------------------------------------------------------------------

int cmd_gen(const std::string& mode_str, std::size_t n, std::size_t m, std::uint64_t seed,
            double pos, const std::string& out, const std::string& witness_out) {
    const Mode mode = parse_mode(mode_str);
    if (mode == Mode::improper && !isqrt_exact(n)) {
        std::cerr << "gen: n must be a perfect square in improper mode\n";
        return kExitUsage;
    }
    InstanceParams params;
    try {
        params = random_params(mode, n, seed, pos);
    } catch (const std::invalid_argument& e) {
        std::cerr << "gen: " << e.what() << '\n';
        return kExitUsage;
    }
    const auto [dataset, witness] = generate_dataset(params, m);
    write_file(out, serialize_dataset(dataset));
    write_file(witness_out, serialize_witness(witness));

    std::size_t positives = 0;
    for (const auto& row : dataset.rows)
        if (row.z > 0) ++positives;
    std::printf("mode=%s n=%zu ambient=%zu m=%zu positive_fraction=%.6f\n", mode_name(mode),
                dataset.n_base, dataset.ambient, dataset.m(),
                static_cast<double>(positives) / static_cast<double>(m));
    return kExitOk;
}

// --- decode ----------------------------------------------------------------

int cmd_decode(const std::string& data_path, const std::string& witness_path,
               const std::string& out) {
    const Dataset dataset = parse_dataset(read_file(data_path));

    const auto t0 = std::chrono::steady_clock::now();
    Hypothesis h;
    try {
        h = multimodal_decode(dataset);
    } catch (const decode_failure& e) {
        std::cerr << "decode: " << e.what() << '\n';
        return kExitDecode;
    } catch (const corrupted_fingerprint_error& e) {
        std::cerr << "decode: " << e.what() << '\n';
        return kExitDecode;
    }
    const auto t1 = std::chrono::steady_clock::now();

    if (!out.empty()) write_file(out, serialize_hypothesis(h, dataset.mode, dataset.n_base));
    std::printf("train_risk=%.6f wall_ms=%.6g\n", empirical_risk(h, dataset),
                std::chrono::duration<double, std::milli>(t1 - t0).count());

    if (!witness_path.empty()) {
        const Witness w = parse_witness(read_file(witness_path));
        double worst = 0.0;
        for (std::size_t j = 0; j < w.params.directions.size(); ++j) {
            const UnitVector planted =
                pad_direction(w.params.directions[j], w.params.ambient_dim());
            for (std::size_t i = 0; i < planted.dim(); ++i)
                worst = std::max(worst, std::abs(h.halfspaces[j].r[i] - planted[i]));
        }
        std::printf("max_direction_deviation=%.6g\n", worst);
    }
    return kExitOk;
}

// --- baseline --------------------------------------------------------------

int cmd_baseline(const std::string& data_path, const std::string& learner, std::uint64_t seed,
                 std::size_t restarts, std::size_t iters, std::size_t passes,
                 double deadline_seconds) {
    const Dataset dataset = parse_dataset(read_file(data_path));
    std::vector<Vec> xs;
    std::vector<int> zs;
    split_xz(dataset, xs, zs);
    const std::size_t k =
        dataset.mode == Mode::proper ? 2 : std::min<std::size_t>(dataset.n_base - 1, 2);

    const auto t0 = std::chrono::steady_clock::now();
    Hypothesis h;
    try {
        if (learner == "bruteforce") {
            BruteForceBudget budget;
            budget.deadline_seconds = deadline_seconds;
            h = brute_force_erm(xs, zs, k, budget);
        } else if (learner == "localsearch") {
            h = local_search_unimodal(xs, zs, k, restarts, iters, Rng(seed));
        } else if (learner == "perceptron") {
            h = single_halfspace_baseline(xs, zs, passes);
        } else {
            std::cerr << "baseline: unknown learner '" << learner << "'\n";
            return kExitUsage;
        }
    } catch (const budget_exceeded_error& e) {
        const auto t1 = std::chrono::steady_clock::now();
        std::printf("learner=%s status=budget-exceeded best_risk=%.6f wall_ms=%.6g\n",
                    learner.c_str(), e.best_risk(),
                    std::chrono::duration<double, std::milli>(t1 - t0).count());
        return kExitOk;
    }
    const auto t1 = std::chrono::steady_clock::now();
    std::printf("learner=%s train_risk=%.6f wall_ms=%.6g\n", learner.c_str(),
                risk_of(h, xs, zs),
                std::chrono::duration<double, std::milli>(t1 - t0).count());
    return kExitOk;
}

// --- verify ----------------------------------------------------------------

int cmd_verify(const std::string& data_path, const std::string& witness_path) {
    Dataset dataset;
    Witness witness{InstanceParams{}, Matrix::identity(1)};
    try {
        dataset = parse_dataset(read_file(data_path));
        witness = parse_witness(read_file(witness_path));
    } catch (const parse_error& e) {
        std::cerr << "verify: format check failed: " << e.what() << '\n';
        return kExitVerify;
    } catch (const std::invalid_argument& e) {
        std::cerr << "verify: format check failed: " << e.what() << '\n';
        return kExitVerify;
    }

    const auto checks = run_verification(dataset, witness);
    for (const auto& c : checks)
        if (!c.passed) {
            std::cerr << "verify: " << c.name << " failed: " << c.detail << '\n';
            return kExitVerify;
        }
    std::printf("all checks passed (%zu/%zu)\n", checks.size(), checks.size());
    return kExitOk;
}

// --- bench -----------------------------------------------------------------

MSpec parse_mspec(const std::string& s) {
    MSpec spec;
    if (!s.empty() && s.back() == 'x') {
        spec.relative = true;
        spec.value = std::stoull(s.substr(0, s.size() - 1));
    } else {
        spec.relative = false;
        spec.value = std::stoull(s);
    }
    return spec;
}

int cmd_bench(const std::vector<std::string>& grid, const std::string& learners_csv,
              const std::string& mode_str, std::size_t seeds, std::size_t test_size,
              std::uint64_t master_seed, std::size_t jobs, const std::string& out) {
    ExperimentConfig cfg;
    cfg.mode = parse_mode(mode_str);
    cfg.seeds = seeds;
    cfg.test_size = test_size;
    cfg.master_seed = master_seed;
    cfg.jobs = jobs;
    cfg.m_grid = {{true, 10}};

    for (const auto& entry : grid) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--grid", "entries look like n=2,4,8 or m=10x");
        const std::string key = entry.substr(0, eq);
        std::stringstream vals(entry.substr(eq + 1));
        std::string tok;
        if (key == "n") {
            cfg.n_grid.clear();
            while (std::getline(vals, tok, ',')) cfg.n_grid.push_back(std::stoull(tok));
        } else if (key == "m") {
            cfg.m_grid.clear();
            while (std::getline(vals, tok, ',')) cfg.m_grid.push_back(parse_mspec(tok));
        } else {
            throw CLI::ValidationError("--grid", "unknown grid key '" + key + "'");
        }
    }
    if (cfg.n_grid.empty()) throw CLI::ValidationError("--grid", "needs at least n=...");

    std::stringstream ls(learners_csv);
    std::string tok;
    while (std::getline(ls, tok, ',')) cfg.learners.push_back(tok);
    if (cfg.learners.empty()) throw CLI::ValidationError("--learners", "empty");

    const auto report = run_experiment(cfg);
    const std::string csv = report.to_csv();
    if (out.empty())
        std::fputs(csv.c_str(), stdout);
    else
        write_file(out, csv);
    return kExitOk;
}

// --- bound-curve -----------------------------------------------------------

int cmd_bound_curve(std::size_t n, const std::string& m_csv, std::size_t seeds,
                    std::size_t test_size, double delta, double bound_C,
                    std::uint64_t master_seed, const std::string& out) {
    std::vector<std::size_t> ms;
    std::stringstream ss(m_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) ms.push_back(std::stoull(tok));
    if (ms.empty()) throw CLI::ValidationError("--m", "needs a comma-separated list");

    std::string csv = "m,seed,test_risk,bound\n";
    std::uint64_t cell = 0;
    for (const std::size_t m : ms) {
        for (std::size_t s = 0; s < seeds; ++s) {
            const std::uint64_t seed = derive_seed(master_seed, cell++);
            const auto params = random_params(Mode::proper, n, seed, 0.4);
            const auto [dataset, witness] = generate_dataset(params, m);
            const Hypothesis h = multimodal_decode(dataset);
            Rng test_rng(derive_seed(seed, 0x7e57));
            const double risk = estimate_population_risk(h, witness, test_size, test_rng);
            const double bound = vc_bound(3 * n, m, delta, bound_C);
            char buf[128];
            std::snprintf(buf, sizeof buf, "%zu,%llu,%.6f,%.6g\n", m,
                          static_cast<unsigned long long>(seed), risk, bound);
            csv += buf;
        }
    }
    if (out.empty())
        std::fputs(csv.c_str(), stdout);
    else
        write_file(out, csv);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bimodal halfspace-intersection benchmark"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a planted dataset and witness");
    std::string gen_mode = "proper", gen_out, gen_witness;
    std::size_t gen_n = 1, gen_m = 100;
    std::uint64_t gen_seed = 0;
    double gen_pos = 0.5;
    gen->add_option("--mode", gen_mode, "proper|improper");
    gen->add_option("--n", gen_n, "base dimension")->required();
    gen->add_option("--m", gen_m, "number of rows")->required();
    gen->add_option("--seed", gen_seed, "64-bit seed");
    gen->add_option("--pos", gen_pos, "target positive fraction in (0,1)")
        ->check(CLI::Range(1e-9, 1.0 - 1e-9));
    gen->add_option("--out", gen_out, "dataset path")->required();
    gen->add_option("--witness", gen_witness, "witness path")->required();

    // decode
    auto* decode = app.add_subcommand("decode", "run the multimodal decoder on a dataset");
    std::string dec_data, dec_witness, dec_out;
    decode->add_option("--data", dec_data)->required();
    decode->add_option("--witness", dec_witness, "compare recovered directions to the witness");
    decode->add_option("--out", dec_out, "hypothesis output path");

    // baseline
    auto* baseline = app.add_subcommand("baseline", "run a unimodal baseline learner");
    std::string bl_data, bl_learner = "perceptron";
    std::uint64_t bl_seed = 0;
    std::size_t bl_restarts = 20, bl_iters = 400, bl_passes = 50;
    double bl_deadline = 60.0;
    baseline->add_option("--data", bl_data)->required();
    baseline->add_option("--learner", bl_learner, "bruteforce|localsearch|perceptron");
    baseline->add_option("--seed", bl_seed);
    baseline->add_option("--restarts", bl_restarts);
    baseline->add_option("--iters", bl_iters);
    baseline->add_option("--passes", bl_passes);
    baseline->add_option("--budget-seconds", bl_deadline, "brute force wall-clock budget");

    // verify
    auto* verify = app.add_subcommand("verify", "re-check a dataset against its witness");
    std::string vf_data, vf_witness;
    verify->add_option("--data", vf_data)->required();
    verify->add_option("--witness", vf_witness)->required();

    // bench
    auto* bench = app.add_subcommand("bench", "grid sweep, CSV report");
    std::vector<std::string> bn_grid;
    std::string bn_learners = "decoder", bn_mode = "proper", bn_out;
    std::size_t bn_seeds = 1, bn_test = 10000, bn_jobs = 1;
    std::uint64_t bn_seed = 0;
    bench->add_option("--grid", bn_grid, "n=2,4,8 [m=10x|m=200,400]")->expected(1, 2)->required();
    bench->add_option("--learners", bn_learners, "comma-separated learner list");
    bench->add_option("--mode", bn_mode);
    bench->add_option("--seeds", bn_seeds);
    bench->add_option("--test", bn_test, "test-set size");
    bench->add_option("--master-seed", bn_seed);
    bench->add_option("--jobs", bn_jobs, "concurrent cells");
    bench->add_option("--out", bn_out, "CSV path (stdout when omitted)");

    // bound-curve
    auto* curve = app.add_subcommand("bound-curve", "(m, test risk, bound) CSV for the decoder");
    std::size_t bc_n = 5, bc_seeds = 20, bc_test = 10000;
    std::string bc_m = "50,150,500,1500,5000", bc_out;
    double bc_delta = 0.05, bc_C = 1.0;
    std::uint64_t bc_seed = 0;
    curve->add_option("--n", bc_n, "base dimension");
    curve->add_option("--m", bc_m, "comma-separated training sizes");
    curve->add_option("--seeds", bc_seeds);
    curve->add_option("--test", bc_test);
    curve->add_option("--delta", bc_delta)->check(CLI::Range(1e-9, 1.0 - 1e-9));
    curve->add_option("--C", bc_C);
    curve->add_option("--master-seed", bc_seed);
    curve->add_option("--out", bc_out, "CSV path (stdout when omitted)");

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = apply_config_file(std::move(args));
        // CLI11 consumes reversed arguments
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);

        if (gen->parsed())
            return cmd_gen(gen_mode, gen_n, gen_m, gen_seed, gen_pos, gen_out, gen_witness);
        if (decode->parsed()) return cmd_decode(dec_data, dec_witness, dec_out);
        if (baseline->parsed())
            return cmd_baseline(bl_data, bl_learner, bl_seed, bl_restarts, bl_iters, bl_passes,
                                bl_deadline);
        if (verify->parsed()) return cmd_verify(vf_data, vf_witness);
        if (bench->parsed())
            return cmd_bench(bn_grid, bn_learners, bn_mode, bn_seeds, bn_test, bn_seed, bn_jobs,
                             bn_out);
        if (curve->parsed())
            return cmd_bound_curve(bc_n, bc_m, bc_seeds, bc_test, bc_delta, bc_C, bc_seed,
                                   bc_out);
        std::cerr << app.help();
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            (void)app.exit(e);
            return kExitOk;
        }
        std::cerr << e.what() << '\n' << app.help();
        return kExitUsage;
    } catch (const parse_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const io_failure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}
