#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace playmech {

/// Invalid configuration or arguments supplied by the caller.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data that cannot be processed (unreadable file, empty corpus, ...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An internal invariant was violated. Always a bug.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline void ensure(bool condition, const std::string& what) {
    if (!condition) throw InvariantError(what);
}

// ---------------------------------------------------------------------------
// Hashing and seed derivation
// ---------------------------------------------------------------------------

constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for an independent stream keyed by (seed, key, index). Stable across
/// platforms and independent of evaluation order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view key,
                                    std::uint64_t index = 0) {
    return splitmix64(splitmix64(seed ^ fnv1a64(key)) + index);
}

std::string hex64(std::uint64_t v);

// ---------------------------------------------------------------------------
// Small statistics helpers
// ---------------------------------------------------------------------------

/// Median of the values; mean of the two middle values for even counts.
/// Throws DataError on empty input.
double median(std::vector<double> values);

/// Welford accumulator. Standard error is sample stddev / sqrt(n).
class RunningStats {
public:
    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stddev() const;
    double stderr_mean() const;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct TestResult {
    double statistic = 0.0;
    double df = 0.0;
    double p_value = 1.0;
};

/// Two-sample chi-square homogeneity test on a 2 x k table of counts.
/// Columns empty in both rows are dropped; df = (non-empty columns - 1).
TestResult chi_square_two_sample(std::span<const std::uint64_t> a,
                                 std::span<const std::uint64_t> b);

/// Two-sample Kolmogorov-Smirnov test over the CDF induced by the index
/// order of the categories. Asymptotic p-value.
TestResult ks_two_sample(std::span<const std::uint64_t> a,
                         std::span<const std::uint64_t> b);

/// Survival function of the Kolmogorov distribution, Q(lambda).
double kolmogorov_q(double lambda);

/// Two-sided p-value of Student's t with the given degrees of freedom.
double students_t_two_sided(double t, double df);

/// Probability-valued cell: numerator/denominator with binomial standard error.
struct Proportion {
    std::uint64_t numerator = 0;
    std::uint64_t denominator = 0;

    bool defined() const { return denominator > 0; }
    double value() const;
    double stderr_value() const;
};

}  // namespace playmech
