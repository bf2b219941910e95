#include "playmech/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace playmech {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

double median(std::vector<double> values) {
    if (values.empty()) throw DataError("median of an empty sample");
    const auto n = values.size();
    auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(values.begin(), mid, values.end());
    if (n % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(values.begin(), mid);
    return 0.5 * (lower + upper);
}

double RunningStats::stddev() const { return std::sqrt(variance()); }

double RunningStats::stderr_mean() const {
    return n_ > 1 ? stddev() / std::sqrt(static_cast<double>(n_)) : 0.0;
}

TestResult chi_square_two_sample(std::span<const std::uint64_t> a,
                                 std::span<const std::uint64_t> b) {
    ensure(a.size() == b.size(), "chi-square: count vectors differ in length");
    double na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += static_cast<double>(a[i]);
        nb += static_cast<double>(b[i]);
    }
    TestResult r;
    if (na == 0 || nb == 0) return r;
    const double n = na + nb;
    int columns = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double col = static_cast<double>(a[i] + b[i]);
        if (col == 0) continue;
        ++columns;
        const double ea = na * col / n;
        const double eb = nb * col / n;
        const double da = static_cast<double>(a[i]) - ea;
        const double db = static_cast<double>(b[i]) - eb;
        r.statistic += da * da / ea + db * db / eb;
    }
    r.df = columns - 1;
    if (r.df <= 0) return r;
    r.p_value = boost::math::cdf(
        boost::math::complement(boost::math::chi_squared(r.df), r.statistic));
    return r;
}

double kolmogorov_q(double lambda) {
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 200; ++j) {
        const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_two_sample(std::span<const std::uint64_t> a,
                         std::span<const std::uint64_t> b) {
    ensure(a.size() == b.size(), "KS: count vectors differ in length");
    double na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += static_cast<double>(a[i]);
        nb += static_cast<double>(b[i]);
    }
    TestResult r;
    if (na == 0 || nb == 0) return r;
    double ca = 0, cb = 0, d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ca += static_cast<double>(a[i]);
        cb += static_cast<double>(b[i]);
        d = std::max(d, std::abs(ca / na - cb / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    r.statistic = d;
    r.df = na * nb / (na + nb);
    r.p_value = kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
    return r;
}

double students_t_two_sided(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    const boost::math::students_t dist(df);
    return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))),
                      0.0, 1.0);
}

double Proportion::value() const {
    ensure(numerator <= denominator, "proportion numerator exceeds denominator");
    return denominator == 0 ? 0.0
                            : static_cast<double>(numerator) / static_cast<double>(denominator);
}

double Proportion::stderr_value() const {
    if (denominator == 0) return 0.0;
    const double p = value();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(denominator));
}

}  // namespace playmech
