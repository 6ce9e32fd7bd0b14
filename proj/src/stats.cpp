#include "fuzzyduo/stats.hpp"

#include "fuzzyduo/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fuzzyduo {

namespace {

std::vector<double> differences(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw DimensionError("paired samples differ in length (" + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()) + ")");
    if (a.size() < 2)
        throw DimensionError("paired statistics need at least two pairs");
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        diff[i] = a[i] - b[i];
    return diff;
}

double checked_sd(std::span<const double> diff)
{
    const double sd = sample_sd(diff);
    if (!(sd > 0.0))
        throw DegenerateVariance("paired differences have zero variance");
    return sd;
}

} // namespace

double mean_of(std::span<const double> values)
{
    if (values.empty())
        throw InvalidInput("mean of an empty sample");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values)
{
    if (values.size() < 2)
        throw InvalidInput("sample standard deviation needs at least two values");
    const double m = mean_of(values);
    double ss = 0.0;
    for (const double v : values)
        ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double student_t_two_sided_p(double t, double df)
{
    if (!(df > 0.0) || !std::isfinite(t))
        throw InvalidInput("t-distribution needs df > 0 and a finite statistic");
    const boost::math::students_t dist(df);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b)
{
    const auto diff = differences(a, b);
    const double sd = checked_sd(diff);
    const double n = static_cast<double>(diff.size());
    PairedTTest r;
    r.t = mean_of(diff) / (sd / std::sqrt(n));
    r.df = static_cast<int>(diff.size()) - 1;
    r.p_two_sided = student_t_two_sided_p(r.t, r.df);
    return r;
}

double cohens_d_paired(std::span<const double> a, std::span<const double> b)
{
    const auto diff = differences(a, b);
    return mean_of(diff) / checked_sd(diff);
}

std::vector<double> fdr_bh(std::span<const double> p_values)
{
    for (const double p : p_values)
        if (!(p >= 0.0 && p <= 1.0))
            throw InvalidInput("p-values must lie in [0, 1]");
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return p_values[i] < p_values[j]; });

    std::vector<double> adjusted(m);
    double running = 1.0;
    for (std::size_t k = m; k-- > 0;) {
        const double rank = static_cast<double>(k + 1);
        running = std::min(running, p_values[order[k]] * (static_cast<double>(m) / rank));
        adjusted[order[k]] = std::min(running, 1.0);
    }
    return adjusted;
}

} // namespace fuzzyduo
