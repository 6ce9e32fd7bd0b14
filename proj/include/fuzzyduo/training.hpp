#pragma once

#include "fuzzyduo/data.hpp"
#include "fuzzyduo/model.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace fuzzyduo {

struct FilterGradients {
    Matrix centers;
    Matrix width_raw;
    std::vector<Matrix> query;
    std::vector<Matrix> value;
};

/// Loss gradient for every tensor of DuoModelParams, shape for shape. In tied
/// width mode each row of a width_raw gradient holds the column sum over rules.
struct GradientSet {
    FilterGradients spatial;
    FilterGradients temporal;
    Matrix classifier_weights;
    Vector classifier_bias;

    static GradientSet zeros_like(const DuoModelParams& params);
    GradientSet& operator+=(const GradientSet& other);
    GradientSet& operator*=(double factor);
    bool all_finite() const;
};

// Flat views over every tensor, in serialization order: spatial filter
// (centers, width_raw, query..., value...), temporal filter, classifier
// weights, classifier bias. Both functions yield matching sequences.
std::vector<std::span<double>> parameter_views(DuoModelParams& params);
std::vector<std::span<double>> gradient_views(GradientSet& grads);
std::vector<std::span<const double>> gradient_views(const GradientSet& grads);

struct BackwardResult {
    double loss = 0.0;
    GradientSet grads;
};

/// Exact gradient of cross_entropy(model_forward(trial), label) by
/// backpropagation. The |q - m| kink contributes a zero subgradient.
BackwardResult backward(const Matrix& trial, int label, const DuoModelParams& params);

/// Mean loss and mean gradient over the selected trials, summed in index order.
BackwardResult batch_backward(const Dataset& dataset, std::span<const std::size_t> indices,
                              const DuoModelParams& params);

/// Largest relative error |a - n| / max(|a|, |n|) between backward's gradient
/// and central differences with the given step, over entries where
/// |a| + |n| > 1e-8. Centers and query rows within reach of an |q - m| kink are
/// skipped. Tied widths are perturbed as a whole column.
double finite_diff_check(const Matrix& trial, int label, const DuoModelParams& params, double step);

/// Centers uniform in [-1, 1], raw widths 0, projections uniform in
/// [-a, a] with a = sqrt(6 / 2D), classifier zero. Deterministic in seed.
DuoModelParams init_params(const ModelShape& shape, std::uint64_t seed);

enum class OptimizerKind { SGD, Adam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view text);

struct TrainConfig {
    int epochs = 200;
    int batch_size = 32;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 42;
    bool shuffle = true;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double mean_loss = 0.0;
    double accuracy = 0.0;
};

struct FitResult {
    DuoModelParams params;
    std::vector<EpochRecord> history;
};

void sgd_step(DuoModelParams& params, const GradientSet& grads, double learning_rate);

using EpochObserver = std::function<void(const EpochRecord&, const DuoModelParams&)>;

/// Mini-batch training. Each history entry is the loss and accuracy of the
/// whole training set under the parameters at the end of that epoch.
FitResult fit(const Dataset& dataset, const TrainConfig& config, DuoModelParams params,
              const EpochObserver& on_epoch = {});

struct Evaluation {
    double accuracy = 0.0;
    double mean_loss = 0.0;
};

Evaluation evaluate(const Dataset& dataset, const DuoModelParams& params);

/// Header "epoch,mean_loss,accuracy"; values at 17 significant digits.
void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history);

} // namespace fuzzyduo
