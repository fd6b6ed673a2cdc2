#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace pdc {

// Shortest round-trip decimal rendering of a double. Locale-free and
// deterministic, so artifact bytes never depend on the environment.
std::string fmt_double(double v);

// FNV-1a 64-bit digest, rendered as 16 lowercase hex digits. Used for input
// fingerprints in the run manifest; not a cryptographic hash.
std::string fnv1a64_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view data);

// Splits on '\n', treating a trailing newline as end-of-input rather than an
// extra empty line. '\r' before a split point is stripped.
std::vector<std::string_view> split_lines(std::string_view text);

std::vector<std::string_view> split_on(std::string_view text, char sep);

// The engine's PRNG stream. mt19937_64 output is pinned by the standard, and
// the Fisher-Yates below draws via modulo, so shuffles are reproducible
// across platforms and toolchains for a given seed.
using Rng = std::mt19937_64;

template <class T>
void deterministic_shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace pdc
