#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ehrenc {

/// Raised for every contract violation in the library. Messages name the
/// offending value so CLI users can act on them.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kVersion = "0.3.0";

constexpr bool is_power_of_two(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

/// log2 of a power of two. Caller guarantees is_power_of_two(v).
constexpr int log2_exact(std::int64_t v)
{
    int r = 0;
    while (v > 1) {
        v >>= 1;
        ++r;
    }
    return r;
}

/// ASCII lowercase; bytes outside A-Z pass through unchanged.
std::string casefold(std::string_view s);

/// Splits on runs of ASCII whitespace, dropping empty pieces.
std::vector<std::string> split_words(std::string_view s);

std::vector<std::string> split(std::string_view s, char delim);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// True for -?[0-9]+(\.[0-9]+)?; the only numeric cell syntax accepted.
bool is_decimal(std::string_view s);

/// Seeded generator with platform-independent draws. std distributions are
/// implementation-defined, so the mapping from engine bits is done here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    /// Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi);

    /// Uniform double in [0, 1) with 53 random bits.
    double unit();

    template <typename T>
    void shuffle(std::vector<T>& v)
    {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace ehrenc
