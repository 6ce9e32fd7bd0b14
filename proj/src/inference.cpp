#include "fuzzyduo/inference.hpp"

#include "fuzzyduo/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fuzzyduo {

RuleBank::RuleBank(Matrix centers_, Matrix width_raw_, MfFamily family_, bool tie_widths_)
    : family(family_), tie_widths(tie_widths_), centers(std::move(centers_)), width_raw(std::move(width_raw_))
{
    validate();
}

void RuleBank::validate() const
{
    if (centers.rows() < 1 || centers.cols() < 1)
        throw DimensionError("rule bank needs at least one rule and one feature");
    if (centers.rows() != width_raw.rows() || centers.cols() != width_raw.cols())
        throw DimensionError("rule bank centers and widths differ in shape");
    if (!centers.allFinite() || !width_raw.allFinite())
        throw InvalidParameter("rule bank has non-finite entries");
    if (!width_raw.array().exp().isFinite().all() || !(width_raw.array().exp() > 0.0).all())
        throw InvalidParameter("rule bank widths overflow or underflow");
    if (tie_widths) {
        for (Index r = 1; r < width_raw.rows(); ++r)
            if (width_raw.row(r) != width_raw.row(0))
                throw InvalidParameter("tied rule bank has differing width rows");
    }
}

double RuleBank::rule_log_strength(Index r, const double* q) const
{
    const Index dims = num_features();
    const double* m = centers.data() + r * dims;
    const double* raw = width_raw.data() + r * dims;
    double sum = 0.0;
    if (family == MfFamily::ModifiedLaplace) {
        for (Index d = 0; d < dims; ++d)
            sum += logmf::ml(q[d], m[d], std::exp(raw[d]));
    } else {
        for (Index d = 0; d < dims; ++d)
            sum += logmf::gaussian(q[d], m[d], std::exp(raw[d]));
    }
    return sum;
}

Vector log_firing_strengths(const Vector& x, const RuleBank& bank)
{
    if (x.size() != bank.num_features())
        throw DimensionError("input has " + std::to_string(x.size()) + " features, rule bank expects " +
                             std::to_string(bank.num_features()));
    if (!x.allFinite())
        throw InvalidInput("non-finite input to firing strength");
    Vector out(bank.num_rules());
    for (Index r = 0; r < bank.num_rules(); ++r)
        out[r] = bank.rule_log_strength(r, x.data());
    return out;
}

Vector normalized_firing_strengths(const Vector& log_strengths)
{
    if (log_strengths.size() == 0)
        throw InvalidInput("normalization of an empty rule set");
    if (!log_strengths.allFinite())
        throw InvalidInput("non-finite log firing strength");
    Vector out = log_strengths;
    softmax_in_place(out.data(), out.size());
    return out;
}

void softmax_in_place(double* values, Index n)
{
    double peak = values[0];
    for (Index i = 1; i < n; ++i)
        peak = std::max(peak, values[i]);
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
        values[i] = std::exp(values[i] - peak);
        total += values[i];
    }
    for (Index i = 0; i < n; ++i)
        values[i] /= total;
}

FiringStrengths firing_strengths(const Vector& x, const RuleBank& bank)
{
    FiringStrengths fs;
    fs.log_strengths = log_firing_strengths(x, bank);
    fs.normalized = normalized_firing_strengths(fs.log_strengths);
    return fs;
}

double tsk_aggregate(const Vector& normalized, const Vector& consequents)
{
    if (normalized.size() != consequents.size())
        throw DimensionError("tsk_aggregate: strengths and consequents differ in length");
    if (normalized.size() == 0 || std::abs(normalized.sum() - 1.0) > 1e-6)
        throw InvalidInput("tsk_aggregate: normalized strengths must sum to 1");
    return normalized.dot(consequents);
}

} // namespace fuzzyduo
