#include "fuzzyduo/model.hpp"

#include "fuzzyduo/error.hpp"

#include <cmath>
#include <string>

namespace fuzzyduo {

void FuzzyFilterParams::validate() const
{
    bank.validate();
    const auto rules = static_cast<std::size_t>(bank.num_rules());
    if (query.size() != rules || value.size() != rules)
        throw DimensionError("filter needs one query and one value projection per rule");
    const Index d = dim();
    for (std::size_t r = 0; r < rules; ++r) {
        if (query[r].rows() != d || query[r].cols() != d || value[r].rows() != d || value[r].cols() != d)
            throw DimensionError("filter projection for rule " + std::to_string(r) + " is not " +
                                 std::to_string(d) + "x" + std::to_string(d));
        if (!query[r].allFinite() || !value[r].allFinite())
            throw InvalidParameter("filter projection has non-finite entries");
    }
}

ModelShape DuoModelParams::shape() const
{
    ModelShape s;
    s.channels = channels();
    s.timesteps = timesteps();
    s.classes = num_classes();
    s.spatial_rules = spatial.num_rules();
    s.temporal_rules = temporal.num_rules();
    s.family = spatial.bank.family;
    s.tie_widths = spatial.bank.tie_widths;
    return s;
}

void DuoModelParams::validate() const
{
    spatial.validate();
    temporal.validate();
    if (classifier_bias.size() < 2)
        throw DimensionError("classifier needs at least two classes");
    if (classifier_weights.rows() != classifier_bias.size() || classifier_weights.cols() != feature_width())
        throw DimensionError("classifier weights are " + std::to_string(classifier_weights.rows()) + "x" +
                             std::to_string(classifier_weights.cols()) + ", expected " +
                             std::to_string(classifier_bias.size()) + "x" + std::to_string(feature_width()));
    if (!classifier_weights.allFinite() || !classifier_bias.allFinite())
        throw InvalidParameter("classifier has non-finite entries");
}

FilterTrace trace_filter(const Matrix& slices, const FuzzyFilterParams& p)
{
    if (slices.cols() != p.dim())
        throw DimensionError("filter expects " + std::to_string(p.dim()) + " features per slice, got " +
                             std::to_string(slices.cols()));
    if (slices.rows() < 1)
        throw DimensionError("filter needs at least one slice");
    if (!slices.allFinite())
        throw InvalidInput("non-finite filter input");

    const Index n_slices = slices.rows();
    const Index rules = p.num_rules();
    const Index dims = p.dim();

    FilterTrace t;
    t.inputs = slices;
    t.query.resize(rules);
    t.value.resize(rules);
    for (Index r = 0; r < rules; ++r) {
        t.query[r].noalias() = slices * p.query[r].transpose();
        t.value[r].noalias() = slices * p.value[r].transpose();
    }

    // Each rule is evaluated in its own query space; normalization runs across rules.
    t.strength.resize(n_slices, rules);
    for (Index s = 0; s < n_slices; ++s) {
        double* row = t.strength.row(s).data();
        for (Index r = 0; r < rules; ++r)
            row[r] = p.bank.rule_log_strength(r, t.query[r].row(s).data());
        softmax_in_place(row, rules);
    }

    t.pooled = Matrix::Zero(rules, dims);
    for (Index r = 0; r < rules; ++r) {
        double* out = t.pooled.row(r).data();
        for (Index s = 0; s < n_slices; ++s) {
            const double f = t.strength(s, r);
            const double* v = t.value[r].row(s).data();
            for (Index d = 0; d < dims; ++d)
                out[d] += signed_log_stabilize(f * v[d]);
        }
    }
    t.pooled /= static_cast<double>(n_slices);
    return t;
}

Matrix filter_forward(const Vector& x, const FuzzyFilterParams& p)
{
    if (x.size() != p.dim())
        throw DimensionError("filter expects " + std::to_string(p.dim()) + " features, got " +
                             std::to_string(x.size()));
    const FilterTrace t = trace_filter(x.transpose(), p);
    Matrix out(p.num_rules(), p.dim());
    for (Index r = 0; r < p.num_rules(); ++r)
        out.row(r) = t.strength(0, r) * t.value[r].row(0);
    return out;
}

void check_trial_shape(const Matrix& trial, const DuoModelParams& params)
{
    if (trial.rows() != params.channels() || trial.cols() != params.timesteps())
        throw DimensionError("trial is " + std::to_string(trial.rows()) + "x" + std::to_string(trial.cols()) +
                             ", model expects " + std::to_string(params.channels()) + "x" +
                             std::to_string(params.timesteps()));
}

Matrix spatial_forward(const Matrix& trial, const FuzzyFilterParams& p)
{
    if (trial.rows() != p.dim())
        throw DimensionError("spatial filter expects " + std::to_string(p.dim()) + " channels");
    return trace_filter(trial.transpose(), p).pooled;
}

Matrix temporal_forward(const Matrix& trial, const FuzzyFilterParams& p)
{
    if (trial.cols() != p.dim())
        throw DimensionError("temporal filter expects " + std::to_string(p.dim()) + " timesteps");
    return trace_filter(trial, p).pooled;
}

Vector pooled_features(const Matrix& spatial_out, const Matrix& temporal_out)
{
    Vector features(spatial_out.size() + temporal_out.size());
    features.head(spatial_out.size()) = Eigen::Map<const Vector>(spatial_out.data(), spatial_out.size());
    features.tail(temporal_out.size()) = Eigen::Map<const Vector>(temporal_out.data(), temporal_out.size());
    return features;
}

Vector model_forward(const Matrix& trial, const DuoModelParams& params)
{
    check_trial_shape(trial, params);
    const Vector features = pooled_features(spatial_forward(trial, params.spatial),
                                            temporal_forward(trial, params.temporal));
    Vector logits = params.classifier_bias;
    logits.noalias() += params.classifier_weights * features;
    return logits;
}

Vector softmax(const Vector& logits)
{
    Vector p = logits;
    softmax_in_place(p.data(), p.size());
    return p;
}

double cross_entropy(const Vector& logits, int label)
{
    if (label < 0 || label >= logits.size())
        throw InvalidLabel("label " + std::to_string(label) + " outside [0, " + std::to_string(logits.size()) + ")");
    const double peak = logits.maxCoeff();
    const double lse = peak + std::log((logits.array() - peak).exp().sum());
    return lse - logits[label];
}

int argmax(const Vector& logits)
{
    Index best = 0;
    for (Index i = 1; i < logits.size(); ++i)
        if (logits[i] > logits[best])
            best = i;
    return static_cast<int>(best);
}

int predict(const Matrix& trial, const DuoModelParams& params)
{
    return argmax(model_forward(trial, params));
}

} // namespace fuzzyduo
