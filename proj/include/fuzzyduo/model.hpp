#pragma once

#include "fuzzyduo/inference.hpp"
#include "fuzzyduo/linalg.hpp"

#include <vector>

namespace fuzzyduo {

/// A fuzzy filter: a rule bank evaluated in a per-rule query space, with
/// per-rule value projections as consequents. Every projection is D x D.
struct FuzzyFilterParams {
    RuleBank bank;
    std::vector<Matrix> query;
    std::vector<Matrix> value;

    Index num_rules() const { return bank.num_rules(); }
    Index dim() const { return bank.num_features(); }
    void validate() const;
};

struct ModelShape {
    Index channels = 0;
    Index timesteps = 0;
    Index classes = 2;
    Index spatial_rules = 5;
    Index temporal_rules = 5;
    MfFamily family = MfFamily::ModifiedLaplace;
    bool tie_widths = false;
};

/// Spatial filter over channel vectors (D = C), temporal filter over channel
/// time-courses (D = T), then a linear classifier on the pooled outputs.
struct DuoModelParams {
    FuzzyFilterParams spatial;
    FuzzyFilterParams temporal;
    Matrix classifier_weights; // M x (R_s*C + R_t*T)
    Vector classifier_bias;    // M

    Index channels() const { return spatial.dim(); }
    Index timesteps() const { return temporal.dim(); }
    Index num_classes() const { return classifier_bias.size(); }
    Index feature_width() const
    {
        return spatial.num_rules() * spatial.dim() + temporal.num_rules() * temporal.dim();
    }
    ModelShape shape() const;
    void validate() const;
};

/// Per-slice intermediates of one filter. A slice is one input vector: a
/// timestep's channel vector for the spatial filter, a channel's time-course
/// for the temporal filter.
struct FilterTrace {
    Matrix inputs;              // S x D, one slice per row
    std::vector<Matrix> query;  // per rule, S x D: W_Q[r] applied to each slice
    std::vector<Matrix> value;  // per rule, S x D: W_V[r] applied to each slice
    Matrix strength;            // S x R normalized firing strengths
    Matrix pooled;              // R x D mean over slices of signed-log(strength * value)
};

/// Runs a filter over every row of `slices` (S x D).
FilterTrace trace_filter(const Matrix& slices, const FuzzyFilterParams& p);

/// Single-slice filter output before stabilization; row r is
/// normalized_strength_r(W_Q[r] x) * (W_V[r] x).
Matrix filter_forward(const Vector& x, const FuzzyFilterParams& p);

/// sign(y) * ln(1 + |y|).
inline double signed_log_stabilize(double y) { return std::copysign(std::log1p(std::abs(y)), y); }

/// Derivative of signed_log_stabilize: 1 / (1 + |y|).
inline double signed_log_slope(double y) { return 1.0 / (1.0 + std::abs(y)); }

/// R_s x C: per-timestep filter output, stabilized, averaged over time.
Matrix spatial_forward(const Matrix& trial, const FuzzyFilterParams& p);

/// R_t x T: per-channel filter output, stabilized, averaged over channels.
Matrix temporal_forward(const Matrix& trial, const FuzzyFilterParams& p);

/// Concatenation of the flattened spatial and temporal outputs, spatial first.
Vector pooled_features(const Matrix& spatial_out, const Matrix& temporal_out);

Vector model_forward(const Matrix& trial, const DuoModelParams& params);

/// -ln softmax(logits)[label], via log-sum-exp.
double cross_entropy(const Vector& logits, int label);

Vector softmax(const Vector& logits);

/// argmax of the logits, lowest index on ties.
int argmax(const Vector& logits);

int predict(const Matrix& trial, const DuoModelParams& params);

// Shape checks shared by the forward passes and the trainer.
void check_trial_shape(const Matrix& trial, const DuoModelParams& params);

} // namespace fuzzyduo
