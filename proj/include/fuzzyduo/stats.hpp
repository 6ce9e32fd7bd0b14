#pragma once

#include <span>
#include <vector>

namespace fuzzyduo {

struct PairedTTest {
    double t = 0.0;
    int df = 0;
    double p_two_sided = 1.0;
};

double mean_of(std::span<const double> values);
/// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> values);

/// Two-sided p-value of Student's t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

/// Paired two-sided t-test on a - b. Throws DimensionError on length mismatch
/// or n < 2, DegenerateVariance when every difference is identical.
PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b);

/// Paired-samples effect size mean(a - b) / sd(a - b).
double cohens_d_paired(std::span<const double> a, std::span<const double> b);

/// Benjamini-Hochberg adjusted p-values, returned in input order.
std::vector<double> fdr_bh(std::span<const double> p_values);

} // namespace fuzzyduo
