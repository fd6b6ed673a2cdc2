#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "pdc/errors.hpp"
#include "pdc/util.hpp"

using namespace pdc;

TEST_CASE("fmt_double renders shortest round-trip form") {
    CHECK(fmt_double(0.0) == "0");
    CHECK(fmt_double(1.0) == "1");
    CHECK(fmt_double(-0.5) == "-0.5");
    CHECK(fmt_double(0.1) == "0.1");
    CHECK(fmt_double(1e300) == "1e+300");

    // Round-trip property on awkward values.
    std::vector<double> vals = {3.141592653589793, 1.0 / 3.0, -2.2250738585072014e-308,
                                6.93147180559945286, 1e-12, 123456789.123456789};
    for (double v : vals) {
        std::string s = fmt_double(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("fnv1a64_hex matches published vectors") {
    CHECK(fnv1a64_hex("") == "cbf29ce484222325");
    CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
    // Same data, same digest; different data, different digest.
    CHECK(fnv1a64_hex("hello") == fnv1a64_hex("hello"));
    CHECK(fnv1a64_hex("hello") != fnv1a64_hex("hellp"));
    CHECK(fnv1a64_hex("x").size() == 16);
}

TEST_CASE("split_lines handles terminators and blank lines") {
    auto ls = split_lines("a\nb\nc");
    REQUIRE(ls.size() == 3);
    CHECK(ls[0] == "a");
    CHECK(ls[2] == "c");

    // Trailing newline is end-of-input, not an extra empty line.
    CHECK(split_lines("a\nb\n").size() == 2);
    CHECK(split_lines("").empty());
    CHECK(split_lines("\n").size() == 1);

    auto crlf = split_lines("a\r\nb\r\n");
    REQUIRE(crlf.size() == 2);
    CHECK(crlf[0] == "a");
    CHECK(crlf[1] == "b");

    auto mid = split_lines("a\n\nb");
    REQUIRE(mid.size() == 3);
    CHECK(mid[1] == "");
}

TEST_CASE("split_on keeps empty fields") {
    auto fs = split_on("a\t\tb", '\t');
    REQUIRE(fs.size() == 3);
    CHECK(fs[0] == "a");
    CHECK(fs[1] == "");
    CHECK(fs[2] == "b");
    CHECK(split_on("abc", ',').size() == 1);
}

TEST_CASE("read_file and write_file round-trip binary data") {
    auto dir = std::filesystem::temp_directory_path() / "pdc_util_test";
    std::filesystem::create_directories(dir);
    auto p = dir / "blob.bin";
    std::string data("\x00\x01\xff ok\n", 6);
    write_file(p, data);
    CHECK(read_file(p) == data);
    CHECK_THROWS_AS((void)read_file(dir / "missing.txt"), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("rng stream is the standard one") {
    // The standard pins the 10000th draw of a default-seeded mt19937_64.
    Rng r;
    std::uint64_t v = 0;
    for (int i = 0; i < 10000; ++i) v = r();
    CHECK(v == 9981545732273789042ull);
}

TEST_CASE("deterministic_shuffle reproduces per seed and permutes") {
    std::vector<int> a(50), b(50), c(50);
    for (int i = 0; i < 50; ++i) a[i] = b[i] = c[i] = i;
    Rng r1(7), r2(7), r3(8);
    deterministic_shuffle(a, r1);
    deterministic_shuffle(b, r2);
    deterministic_shuffle(c, r3);
    CHECK(a == b);
    CHECK(a != c);  // astronomically unlikely to collide

    auto sorted = a;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);

    // Empty and singleton vectors are untouched.
    std::vector<int> e, s{42};
    deterministic_shuffle(e, r1);
    deterministic_shuffle(s, r1);
    CHECK(e.empty());
    CHECK(s == std::vector<int>{42});
}
