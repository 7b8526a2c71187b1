#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "bimodal/io.hpp"

using namespace bimodal;

TEST_CASE("dataset round trip is bit exact") {
    const auto params = random_params(Mode::proper, 2, 42, 0.3);
    const auto [d, w] = generate_dataset(params, 25);
    const std::string text = serialize_dataset(d);
    const Dataset back = parse_dataset(text);
    CHECK(back == d);
    CHECK(serialize_dataset(back) == text);
}

TEST_CASE("round trip property over seeded generators") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const bool proper = seed % 2 == 0;
        const auto params = proper ? random_params(Mode::proper, 1 + seed % 4, seed, 0.4)
                                   : random_params(Mode::improper, 9, seed, 0.4);
        const auto [d, w] = generate_dataset(params, 10 + seed);
        REQUIRE(parse_dataset(serialize_dataset(d)) == d);

        const Witness back = parse_witness(serialize_witness(w));
        REQUIRE(back.Q == w.Q);
        REQUIRE(back.params.directions == w.params.directions);
        REQUIRE(back.params.thresholds == w.params.thresholds);
    }
}

TEST_CASE("empty dataset parses when header says m = 0") {
    const std::string text = "BIMODAL-HS v1\nmode=proper n=1 ambient=3 m=0 seed=9\n";
    const Dataset d = parse_dataset(text);
    CHECK(d.m() == 0);
    CHECK(serialize_dataset(d) == text);
}

TEST_CASE("missing rows are reported with the failing line") {
    const auto params = random_params(Mode::proper, 1, 4, 0.5);
    const auto [d, w] = generate_dataset(params, 4);
    std::string text = serialize_dataset(d);
    // claim 5 rows while providing 4
    const auto pos = text.find("m=4");
    text.replace(pos, 3, "m=5");
    try {
        (void)parse_dataset(text);
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line() == 7);
    }
}

TEST_CASE("malformed inputs are rejected with line numbers") {
    CHECK_THROWS_AS((void)parse_dataset("garbage\n"), parse_error);
    CHECK_THROWS_AS((void)parse_dataset("BIMODAL-HS v1\nmode=proper n=1\n"), parse_error);

    const std::string base = "BIMODAL-HS v1\nmode=proper n=1 ambient=3 m=1 seed=0\n";
    CHECK_THROWS_AS((void)parse_dataset(base + "1 2 3 | 1 2 | +1\n"), parse_error);   // short y
    CHECK_THROWS_AS((void)parse_dataset(base + "1 2 3 | 1 2 3 | 5\n"), parse_error);  // bad label
    CHECK_THROWS_AS((void)parse_dataset(base + "1 nan 3 | 1 2 3 | +1\n"), parse_error);
    CHECK_THROWS_AS((void)parse_dataset(base + "1 2 3 1 2 3 +1\n"), parse_error);     // no bars

    try {
        (void)parse_dataset(base + "1 x 3 | 1 2 3 | +1\n");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("witness parse rejects structural damage") {
    const auto params = random_params(Mode::improper, 9, 6, 0.3);
    const auto [d, w] = generate_dataset(params, 5);
    const std::string text = serialize_witness(w);

    CHECK_THROWS_AS((void)parse_witness("WITNESS v2\n"), parse_error);
    // truncate the Q block
    const auto qpos = text.find("Q:\n");
    CHECK_THROWS_AS((void)parse_witness(text.substr(0, qpos + 3)), parse_error);
}

TEST_CASE("verification passes on generator output and flags injected faults") {
    const auto params = random_params(Mode::proper, 2, 11, 0.3);
    auto [d, w] = generate_dataset(params, 30);

    for (const auto& check : run_verification(d, w)) CHECK(check.passed);

    SUBCASE("flipped label") {
        d.rows[7].z = -d.rows[7].z;
        const auto checks = run_verification(d, w);
        bool failed = false;
        for (const auto& c : checks)
            if (!c.passed) {
                failed = true;
                CHECK(c.name == "realizability");
                CHECK(c.detail.find("row 8") != std::string::npos);
            }
        CHECK(failed);
    }
    SUBCASE("corrupted y") {
        d.rows[3].y[1] += 0.5;
        bool failed = false;
        for (const auto& c : run_verification(d, w))
            if (!c.passed) {
                failed = true;
                CHECK(c.name == "modality-consistency");
            }
        CHECK(failed);
    }
    SUBCASE("non-orthogonal Q") {
        w.Q(4, 4) += 0.01;
        bool failed = false;
        for (const auto& c : run_verification(d, w))
            if (!c.passed) failed = true;
        CHECK(failed);
    }
}
