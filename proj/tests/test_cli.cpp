#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bimodal/io.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli() {
    const char* path = std::getenv("BIMODAL_CLI");
    REQUIRE(path != nullptr);
    return path;
}

struct RunResult {
    int exit_code;
    std::string stdout_text;
};

RunResult run(const std::string& args) {
    const fs::path out = fs::temp_directory_path() / "bimodal_cli_out.txt";
    const std::string cmd = cli() + " " + args + " >" + out.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WEXITSTATUS(status), ss.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("bimodal_cli_test_" +
                                                  std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("gen writes both files deterministically and prints a summary") {
    TempDir tmp;
    const std::string d = (tmp.path / "d.txt").string();
    const std::string w = (tmp.path / "w.txt").string();
    const std::string flags =
        "gen --mode proper --n 4 --m 200 --seed 7 --pos 0.3 --out " + d + " --witness " + w;

    auto r = run(flags);
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text.find("mode=proper n=4 ambient=12 m=200") != std::string::npos);

    const std::string first_d = slurp(d);
    const std::string first_w = slurp(w);
    CHECK(first_d.rfind("BIMODAL-HS v1\nmode=proper n=4 ambient=12 m=200 seed=7\n", 0) == 0);

    CHECK(run(flags).exit_code == 0);
    CHECK(slurp(d) == first_d);  // byte identical on re-run
    CHECK(slurp(w) == first_w);
}

TEST_CASE("gen rejects improper with a non-square n") {
    TempDir tmp;
    const auto r = run("gen --mode improper --n 10 --m 50 --out " + (tmp.path / "d").string() +
                       " --witness " + (tmp.path / "w").string());
    CHECK(r.exit_code == 2);
    CHECK(r.stdout_text.find("perfect square") != std::string::npos);
}

TEST_CASE("decode reports zero risk on generated data and matches the witness") {
    TempDir tmp;
    const std::string d = (tmp.path / "d.txt").string();
    const std::string w = (tmp.path / "w.txt").string();
    REQUIRE(run("gen --mode proper --n 3 --m 120 --seed 5 --pos 0.35 --out " + d +
                " --witness " + w)
                .exit_code == 0);

    const auto r = run("decode --data " + d + " --witness " + w + " --out " +
                       (tmp.path / "h.txt").string());
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text.find("train_risk=0.000000") != std::string::npos);

    // deviation line present and tiny
    const auto pos = r.stdout_text.find("max_direction_deviation=");
    REQUIRE(pos != std::string::npos);
    const double dev = std::stod(r.stdout_text.substr(pos + 24));
    CHECK(dev <= 1e-8);

    const std::string hyp = slurp(tmp.path / "h.txt");
    CHECK(hyp.rfind("HYPOTHESIS v1\nmode=proper n=3 k=2\n", 0) == 0);
}

TEST_CASE("decode on a truncated file exits 2 with a line number") {
    TempDir tmp;
    const std::string d = (tmp.path / "d.txt").string();
    const std::string w = (tmp.path / "w.txt").string();
    REQUIRE(run("gen --mode proper --n 2 --m 30 --seed 1 --pos 0.4 --out " + d + " --witness " +
                w)
                .exit_code == 0);
    std::string text = slurp(d);
    text.resize(text.size() / 2);
    std::ofstream(d, std::ios::binary) << text;

    const auto r = run("decode --data " + d);
    CHECK(r.exit_code == 2);
    CHECK(r.stdout_text.find("line") != std::string::npos);
}

TEST_CASE("verify passes on generator output") {
    TempDir tmp;
    const std::string d = (tmp.path / "d.txt").string();
    const std::string w = (tmp.path / "w.txt").string();
    REQUIRE(run("gen --mode improper --n 9 --m 90 --seed 3 --pos 0.3 --out " + d +
                " --witness " + w)
                .exit_code == 0);
    const auto r = run("verify --data " + d + " --witness " + w);
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text.find("all checks passed (5/5)") != std::string::npos);
}

TEST_CASE("verify exits 4 on a flipped label, naming the row") {
    TempDir tmp;
    const std::string d = (tmp.path / "d.txt").string();
    const std::string w = (tmp.path / "w.txt").string();
    REQUIRE(run("gen --mode proper --n 2 --m 40 --seed 11 --pos 0.4 --out " + d + " --witness " +
                w)
                .exit_code == 0);

    std::string text = slurp(d);
    const auto pos = text.find("| +1\n");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 5, "| -1\n");
    std::ofstream(d, std::ios::binary) << text;

    const auto r = run("verify --data " + d + " --witness " + w);
    CHECK(r.exit_code == 4);
    CHECK(r.stdout_text.find("realizability") != std::string::npos);
}

TEST_CASE("baseline runs each learner") {
    TempDir tmp;
    const std::string d = (tmp.path / "d.txt").string();
    const std::string w = (tmp.path / "w.txt").string();
    REQUIRE(run("gen --mode proper --n 1 --m 12 --seed 2 --pos 0.4 --out " + d + " --witness " +
                w)
                .exit_code == 0);
    for (const std::string learner : {"perceptron", "localsearch", "bruteforce"}) {
        const auto r = run("baseline --data " + d + " --learner " + learner);
        CHECK(r.exit_code == 0);
        CHECK(r.stdout_text.find("train_risk=") != std::string::npos);
    }
    CHECK(run("baseline --data " + d + " --learner nonsense").exit_code == 2);
}

TEST_CASE("bench emits one CSV row per cell") {
    const auto r = run("bench --grid n=2,4,8 m=10x --seeds 5 --test 200");
    CHECK(r.exit_code == 0);
    std::size_t rows = 0;
    for (const char c : r.stdout_text)
        if (c == '\n') ++rows;
    CHECK(rows == 16);  // header + 15 decoder rows
    CHECK(r.stdout_text.rfind("learner,mode,n,ambient,m,seed,status,train_risk,test_risk,"
                              "wall_ms,bound\n",
                              0) == 0);
}

TEST_CASE("bound-curve emits the (m, risk, bound) table") {
    const auto r = run("bound-curve --n 2 --m 50,100 --seeds 2 --test 500");
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text.rfind("m,seed,test_risk,bound\n", 0) == 0);
    std::size_t rows = 0;
    for (const char c : r.stdout_text)
        if (c == '\n') ++rows;
    CHECK(rows == 5);
}

TEST_CASE("unknown subcommand exits 2 with usage text") {
    const auto r = run("frobnicate");
    CHECK(r.exit_code == 2);
    CHECK(r.stdout_text.find("Usage") != std::string::npos);
}

TEST_CASE("config file supplies flags but conflicts are fatal") {
    TempDir tmp;
    const std::string d = (tmp.path / "d.txt").string();
    const std::string w = (tmp.path / "w.txt").string();
    const std::string cfg = (tmp.path / "cfg").string();
    std::ofstream(cfg) << "n=2\nm=30\n";

    CHECK(run("gen --config " + cfg + " --seed 4 --pos 0.4 --out " + d + " --witness " + w)
              .exit_code == 0);
    CHECK(run("gen --config " + cfg + " --n 3 --seed 4 --pos 0.4 --out " + d + " --witness " +
              w)
              .exit_code == 2);
}
