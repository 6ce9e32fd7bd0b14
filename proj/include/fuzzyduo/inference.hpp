#pragma once

#include "fuzzyduo/linalg.hpp"
#include "fuzzyduo/membership.hpp"

namespace fuzzyduo {

/// Antecedents of R zero-order TSK rules over D features. Entry (r, d) holds
/// the center and raw width of rule r's fuzzy set on feature d.
///
/// With tie_widths set, every row of width_raw is identical, i.e. a single
/// width per feature shared by all rules. Training keeps the rows tied.
struct RuleBank {
    MfFamily family = MfFamily::ModifiedLaplace;
    bool tie_widths = false;
    Matrix centers;
    Matrix width_raw;

    RuleBank() = default;
    RuleBank(Matrix centers, Matrix width_raw, MfFamily family, bool tie_widths);

    Index num_rules() const { return centers.rows(); }
    Index num_features() const { return centers.cols(); }
    double width(Index r, Index d) const { return std::exp(width_raw(r, d)); }
    MfParams mf(Index r, Index d) const { return {centers(r, d), width_raw(r, d), family}; }

    // Throws DimensionError / InvalidParameter if the invariants do not hold.
    void validate() const;

    /// log mu_r(q): sum over features of the log membership of q_d in rule r's
    /// fuzzy set. No bounds checks; q must have num_features() entries.
    double rule_log_strength(Index r, const double* q) const;
};

struct FiringStrengths {
    Vector log_strengths;
    Vector normalized;
};

/// Entry r is log of the product of rule r's memberships at x; always <= 0.
Vector log_firing_strengths(const Vector& x, const RuleBank& bank);

/// Softmax with max-subtraction. Sums to 1 for any finite input.
Vector normalized_firing_strengths(const Vector& log_strengths);

// Unchecked in-place kernel behind normalized_firing_strengths.
void softmax_in_place(double* values, Index n);

FiringStrengths firing_strengths(const Vector& x, const RuleBank& bank);

/// Zero-order TSK output: sum_r normalized_r * u_r.
double tsk_aggregate(const Vector& normalized, const Vector& consequents);

} // namespace fuzzyduo
