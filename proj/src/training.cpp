#include "fuzzyduo/training.hpp"

#include "fuzzyduo/error.hpp"
#include "fuzzyduo/kv_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

namespace fuzzyduo {

namespace {

FilterGradients filter_zeros(const FuzzyFilterParams& p)
{
    FilterGradients g;
    g.centers = Matrix::Zero(p.num_rules(), p.dim());
    g.width_raw = Matrix::Zero(p.num_rules(), p.dim());
    g.query.assign(p.query.size(), Matrix::Zero(p.dim(), p.dim()));
    g.value.assign(p.value.size(), Matrix::Zero(p.dim(), p.dim()));
    return g;
}

template <typename T, typename M>
void append_views(std::vector<std::span<T>>& out, M& m)
{
    out.emplace_back(m.data(), static_cast<std::size_t>(m.size()));
}

template <typename T, typename F>
void append_filter(std::vector<std::span<T>>& out, F& f)
{
    append_views(out, f.centers);
    append_views(out, f.width_raw);
    for (auto& m : f.query)
        append_views(out, m);
    for (auto& m : f.value)
        append_views(out, m);
}

template <typename T, typename G>
std::vector<std::span<T>> views_of_gradients(G& grads)
{
    std::vector<std::span<T>> out;
    append_filter(out, grads.spatial);
    append_filter(out, grads.temporal);
    append_views(out, grads.classifier_weights);
    append_views(out, grads.classifier_bias);
    return out;
}

// Backpropagates d loss / d pooled (R x D) through one filter into `g`.
void backprop_filter(const FilterTrace& t, const FuzzyFilterParams& p, const Matrix& d_pooled, FilterGradients& g)
{
    const Index n_slices = t.inputs.rows();
    const Index rules = p.num_rules();
    const Index dims = p.dim();
    const double inv_slices = 1.0 / static_cast<double>(n_slices);
    const bool laplace = p.bank.family == MfFamily::ModifiedLaplace;
    const Matrix widths = p.bank.width_raw.array().exp().matrix();

    std::vector<Matrix> d_query(rules, Matrix(n_slices, dims));
    std::vector<Matrix> d_value(rules, Matrix(n_slices, dims));
    Vector d_strength(rules);

    for (Index s = 0; s < n_slices; ++s) {
        const double* f = t.strength.row(s).data();

        // Through mean pooling, the signed log and the product f_r * v_r.
        for (Index r = 0; r < rules; ++r) {
            const double* v = t.value[r].row(s).data();
            const double* up = d_pooled.row(r).data();
            double* dv = d_value[r].row(s).data();
            double df = 0.0;
            for (Index d = 0; d < dims; ++d) {
                const double dy = up[d] * inv_slices * signed_log_slope(f[r] * v[d]);
                dv[d] = dy * f[r];
                df += dy * v[d];
            }
            d_strength[r] = df;
        }

        // Through the softmax across rules to the log firing strengths.
        double weighted = 0.0;
        for (Index r = 0; r < rules; ++r)
            weighted += f[r] * d_strength[r];

        for (Index r = 0; r < rules; ++r) {
            const double d_log = f[r] * (d_strength[r] - weighted);
            const double* q = t.query[r].row(s).data();
            const double* m = p.bank.centers.row(r).data();
            const double* w = widths.row(r).data();
            double* dq = d_query[r].row(s).data();
            double* dm = g.centers.row(r).data();
            double* draw = g.width_raw.row(r).data();
            // d/dq of log mu is the negative of d/dm; the width chain rule
            // through exp(raw) multiplies by the width itself.
            if (laplace) {
                for (Index d = 0; d < dims; ++d) {
                    const double dc = d_log * logmf::d_ml_d_center(q[d], m[d], w[d]);
                    dm[d] += dc;
                    dq[d] = -dc;
                    draw[d] += d_log * logmf::d_ml_d_lambda(q[d], m[d]) * w[d];
                }
            } else {
                for (Index d = 0; d < dims; ++d) {
                    const double dc = d_log * logmf::d_gauss_d_center(q[d], m[d], w[d]);
                    dm[d] += dc;
                    dq[d] = -dc;
                    draw[d] += d_log * logmf::d_gauss_d_sigma(q[d], m[d], w[d]) * w[d];
                }
            }
        }
    }

    for (Index r = 0; r < rules; ++r) {
        g.query[r].noalias() += d_query[r].transpose() * t.inputs;
        g.value[r].noalias() += d_value[r].transpose() * t.inputs;
    }

    if (p.bank.tie_widths) {
        const Eigen::RowVectorXd column_sums = g.width_raw.colwise().sum();
        g.width_raw.rowwise() = column_sums;
    }
}

double loss_at(const Matrix& trial, int label, const DuoModelParams& params)
{
    return cross_entropy(model_forward(trial, params), label);
}

} // namespace

GradientSet GradientSet::zeros_like(const DuoModelParams& params)
{
    GradientSet g;
    g.spatial = filter_zeros(params.spatial);
    g.temporal = filter_zeros(params.temporal);
    g.classifier_weights = Matrix::Zero(params.classifier_weights.rows(), params.classifier_weights.cols());
    g.classifier_bias = Vector::Zero(params.classifier_bias.size());
    return g;
}

GradientSet& GradientSet::operator+=(const GradientSet& other)
{
    auto mine = gradient_views(*this);
    auto theirs = gradient_views(other);
    if (mine.size() != theirs.size())
        throw DimensionError("gradient sets differ in structure");
    for (std::size_t i = 0; i < mine.size(); ++i) {
        if (mine[i].size() != theirs[i].size())
            throw DimensionError("gradient sets differ in shape");
        for (std::size_t j = 0; j < mine[i].size(); ++j)
            mine[i][j] += theirs[i][j];
    }
    return *this;
}

GradientSet& GradientSet::operator*=(double factor)
{
    for (auto view : gradient_views(*this))
        for (double& v : view)
            v *= factor;
    return *this;
}

bool GradientSet::all_finite() const
{
    for (auto view : gradient_views(*this))
        for (double v : view)
            if (!std::isfinite(v))
                return false;
    return true;
}

std::vector<std::span<double>> parameter_views(DuoModelParams& params)
{
    std::vector<std::span<double>> out;
    for (auto* f : {&params.spatial, &params.temporal}) {
        append_views(out, f->bank.centers);
        append_views(out, f->bank.width_raw);
        for (auto& m : f->query)
            append_views(out, m);
        for (auto& m : f->value)
            append_views(out, m);
    }
    append_views(out, params.classifier_weights);
    append_views(out, params.classifier_bias);
    return out;
}

std::vector<std::span<double>> gradient_views(GradientSet& grads)
{
    return views_of_gradients<double>(grads);
}

std::vector<std::span<const double>> gradient_views(const GradientSet& grads)
{
    return views_of_gradients<const double>(grads);
}

BackwardResult backward(const Matrix& trial, int label, const DuoModelParams& params)
{
    check_trial_shape(trial, params);
    if (label < 0 || label >= params.num_classes())
        throw InvalidLabel("label " + std::to_string(label) + " outside [0, " +
                           std::to_string(params.num_classes()) + ")");

    const FilterTrace spatial = trace_filter(trial.transpose(), params.spatial);
    const FilterTrace temporal = trace_filter(trial, params.temporal);
    const Vector features = pooled_features(spatial.pooled, temporal.pooled);
    Vector logits = params.classifier_bias;
    logits.noalias() += params.classifier_weights * features;

    BackwardResult result;
    result.loss = cross_entropy(logits, label);
    result.grads = GradientSet::zeros_like(params);

    Vector d_logits = softmax(logits);
    d_logits[label] -= 1.0;
    result.grads.classifier_bias = d_logits;
    result.grads.classifier_weights.noalias() = d_logits * features.transpose();

    const Vector d_features = params.classifier_weights.transpose() * d_logits;
    const Index spatial_width = spatial.pooled.size();
    const Matrix d_spatial =
        Eigen::Map<const Matrix>(d_features.data(), spatial.pooled.rows(), spatial.pooled.cols());
    const Matrix d_temporal =
        Eigen::Map<const Matrix>(d_features.data() + spatial_width, temporal.pooled.rows(), temporal.pooled.cols());

    backprop_filter(spatial, params.spatial, d_spatial, result.grads.spatial);
    backprop_filter(temporal, params.temporal, d_temporal, result.grads.temporal);
    return result;
}

BackwardResult batch_backward(const Dataset& dataset, std::span<const std::size_t> indices,
                              const DuoModelParams& params)
{
    if (indices.empty())
        throw InvalidInput("empty batch");
    BackwardResult total;
    total.grads = GradientSet::zeros_like(params);
    for (const std::size_t i : indices) {
        const auto& trial = dataset.trials.at(i);
        const BackwardResult one = backward(trial.signal, trial.label, params);
        total.loss += one.loss;
        total.grads += one.grads;
    }
    const double scale = 1.0 / static_cast<double>(indices.size());
    total.loss *= scale;
    total.grads *= scale;
    return total;
}

double finite_diff_check(const Matrix& trial, int label, const DuoModelParams& params, double step)
{
    if (!(step >= 1e-8 && step <= 1e-3))
        throw InvalidParameter("finite-difference step must lie in [1e-8, 1e-3]");

    BackwardResult analytic = backward(trial, label, params);
    auto grad_views = gradient_views(analytic.grads);
    DuoModelParams probe = params;
    auto param_views = parameter_views(probe);

    // A perturbation of a center or of a query row moves q - m by at most
    // step * max(1, max|x|); entries whose slices sit that close to the kink
    // are not differentiable in the difference quotient.
    const double margin = std::max(1e-4, step * std::max(1.0, trial.cwiseAbs().maxCoeff()));
    auto near_kink = [&](const FuzzyFilterParams& p, const Matrix& slices) {
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask(p.num_rules(), p.dim());
        mask.setConstant(false);
        if (p.bank.family != MfFamily::ModifiedLaplace)
            return mask;
        const FilterTrace t = trace_filter(slices, p);
        for (Index r = 0; r < p.num_rules(); ++r)
            for (Index s = 0; s < slices.rows(); ++s)
                for (Index d = 0; d < p.dim(); ++d)
                    if (std::abs(t.query[r](s, d) - p.bank.centers(r, d)) < margin)
                        mask(r, d) = true;
        return mask;
    };
    const auto spatial_kinks = near_kink(params.spatial, trial.transpose());
    const auto temporal_kinks = near_kink(params.temporal, trial);

    double worst = 0.0;
    auto compare = [&](double a, double n) {
        if (std::abs(a) + std::abs(n) <= 1e-8)
            return;
        worst = std::max(worst, std::abs(a - n) / std::max(std::abs(a), std::abs(n)));
    };
    auto central = [&](const std::vector<double*>& entries) {
        std::vector<double> saved;
        for (double* e : entries)
            saved.push_back(*e);
        for (std::size_t i = 0; i < entries.size(); ++i)
            *entries[i] = saved[i] + step;
        const double plus = loss_at(trial, label, probe);
        for (std::size_t i = 0; i < entries.size(); ++i)
            *entries[i] = saved[i] - step;
        const double minus = loss_at(trial, label, probe);
        for (std::size_t i = 0; i < entries.size(); ++i)
            *entries[i] = saved[i];
        return (plus - minus) / (2.0 * step);
    };

    // Views per filter: centers, width_raw, R query, R value.
    std::size_t view = 0;
    const FuzzyFilterParams* filters[] = {&params.spatial, &params.temporal};
    const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>* kinks[] = {&spatial_kinks, &temporal_kinks};
    for (int fi = 0; fi < 2; ++fi) {
        const FuzzyFilterParams& p = *filters[fi];
        const auto& kink = *kinks[fi];
        const Index rules = p.num_rules();
        const Index dims = p.dim();

        const std::size_t centers_view = view++;
        for (Index r = 0; r < rules; ++r)
            for (Index d = 0; d < dims; ++d) {
                if (kink(r, d))
                    continue;
                const auto k = static_cast<std::size_t>(r * dims + d);
                compare(grad_views[centers_view][k], central({&param_views[centers_view][k]}));
            }

        const std::size_t width_view = view++;
        if (p.bank.tie_widths) {
            for (Index d = 0; d < dims; ++d) {
                std::vector<double*> column;
                for (Index r = 0; r < rules; ++r)
                    column.push_back(&param_views[width_view][static_cast<std::size_t>(r * dims + d)]);
                compare(grad_views[width_view][static_cast<std::size_t>(d)], central(column));
            }
        } else {
            for (std::size_t k = 0; k < param_views[width_view].size(); ++k)
                compare(grad_views[width_view][k], central({&param_views[width_view][k]}));
        }

        for (Index r = 0; r < rules; ++r, ++view)
            for (Index row = 0; row < dims; ++row) {
                if (kink(r, row))
                    continue;
                for (Index col = 0; col < dims; ++col) {
                    const auto k = static_cast<std::size_t>(row * dims + col);
                    compare(grad_views[view][k], central({&param_views[view][k]}));
                }
            }

        for (Index r = 0; r < rules; ++r, ++view)
            for (std::size_t k = 0; k < param_views[view].size(); ++k)
                compare(grad_views[view][k], central({&param_views[view][k]}));
    }

    for (; view < param_views.size(); ++view)
        for (std::size_t k = 0; k < param_views[view].size(); ++k)
            compare(grad_views[view][k], central({&param_views[view][k]}));
    return worst;
}

DuoModelParams init_params(const ModelShape& shape, std::uint64_t seed)
{
    if (shape.channels < 1 || shape.timesteps < 1)
        throw InvalidParameter("model needs at least one channel and one timestep");
    if (shape.classes < 2)
        throw InvalidParameter("model needs at least two classes");
    if (shape.spatial_rules < 1 || shape.temporal_rules < 1)
        throw InvalidParameter("each filter needs at least one rule");

    std::mt19937_64 rng(seed);
    auto make_filter = [&](Index rules, Index dims) {
        std::uniform_real_distribution<double> center_dist(-1.0, 1.0);
        const double bound = std::sqrt(6.0 / (2.0 * static_cast<double>(dims)));
        std::uniform_real_distribution<double> proj_dist(-bound, bound);

        FuzzyFilterParams p;
        p.bank.family = shape.family;
        p.bank.tie_widths = shape.tie_widths;
        p.bank.centers.resize(rules, dims);
        for (Index i = 0; i < p.bank.centers.size(); ++i)
            p.bank.centers.data()[i] = center_dist(rng);
        p.bank.width_raw = Matrix::Zero(rules, dims);
        auto draw_matrix = [&] {
            Matrix m(dims, dims);
            for (Index i = 0; i < m.size(); ++i)
                m.data()[i] = proj_dist(rng);
            return m;
        };
        for (Index r = 0; r < rules; ++r)
            p.query.push_back(draw_matrix());
        for (Index r = 0; r < rules; ++r)
            p.value.push_back(draw_matrix());
        return p;
    };

    DuoModelParams params;
    params.spatial = make_filter(shape.spatial_rules, shape.channels);
    params.temporal = make_filter(shape.temporal_rules, shape.timesteps);
    params.classifier_weights = Matrix::Zero(shape.classes, params.feature_width());
    params.classifier_bias = Vector::Zero(shape.classes);
    return params;
}

std::string_view to_string(OptimizerKind kind)
{
    return kind == OptimizerKind::SGD ? "sgd" : "adam";
}

OptimizerKind parse_optimizer(std::string_view text)
{
    if (text == "sgd")
        return OptimizerKind::SGD;
    if (text == "adam")
        return OptimizerKind::Adam;
    throw InvalidParameter("unknown optimizer '" + std::string(text) + "' (expected sgd or adam)");
}

void TrainConfig::validate() const
{
    if (epochs < 0)
        throw InvalidParameter("epochs must be >= 0");
    if (batch_size < 1)
        throw InvalidParameter("batch_size must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw InvalidParameter("learning_rate must be positive");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
        throw InvalidParameter("adam betas must lie in [0, 1)");
    if (!(adam_eps > 0.0))
        throw InvalidParameter("adam_eps must be positive");
}

void sgd_step(DuoModelParams& params, const GradientSet& grads, double learning_rate)
{
    auto p = parameter_views(params);
    auto g = gradient_views(grads);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < p[i].size(); ++j)
            p[i][j] -= learning_rate * g[i][j];
}

namespace {

class Adam {
public:
    Adam(const TrainConfig& config, std::size_t size)
        : lr_(config.learning_rate), beta1_(config.adam_beta1), beta2_(config.adam_beta2), eps_(config.adam_eps),
          m_(size, 0.0), v_(size, 0.0)
    {
    }

    void step(DuoModelParams& params, const GradientSet& grads)
    {
        ++t_;
        const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        auto p = parameter_views(params);
        auto g = gradient_views(grads);
        std::size_t k = 0;
        for (std::size_t i = 0; i < p.size(); ++i)
            for (std::size_t j = 0; j < p[i].size(); ++j, ++k) {
                const double grad = g[i][j];
                m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * grad;
                v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * grad * grad;
                const double m_hat = m_[k] / correction1;
                const double v_hat = v_[k] / correction2;
                p[i][j] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
            }
    }

private:
    double lr_, beta1_, beta2_, eps_;
    long long t_ = 0;
    std::vector<double> m_, v_;
};

std::size_t parameter_count(DuoModelParams& params)
{
    std::size_t n = 0;
    for (auto v : parameter_views(params))
        n += v.size();
    return n;
}

void check_dataset_for_model(const Dataset& dataset, const DuoModelParams& params)
{
    if (dataset.empty())
        throw InvalidInput("dataset is empty");
    dataset.validate();
    if (dataset.channels() != params.channels() || dataset.timesteps() != params.timesteps())
        throw DimensionError("dataset is " + std::to_string(dataset.channels()) + "x" +
                             std::to_string(dataset.timesteps()) + " but the model expects " +
                             std::to_string(params.channels()) + "x" + std::to_string(params.timesteps()));
    for (const auto& t : dataset.trials)
        if (t.label < 0 || t.label >= params.num_classes())
            throw InvalidLabel("trial " + std::to_string(t.id) + " has label " + std::to_string(t.label) +
                               " but the model has " + std::to_string(params.num_classes()) + " classes");
}

} // namespace

FitResult fit(const Dataset& dataset, const TrainConfig& config, DuoModelParams params, const EpochObserver& on_epoch)
{
    config.validate();
    params.validate();
    check_dataset_for_model(dataset, params);

    FitResult result;
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(config.seed);
    Adam adam(config, parameter_count(params));
    const auto batch = static_cast<std::size_t>(config.batch_size);

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        if (config.shuffle)
            std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t stop = std::min(order.size(), start + batch);
            BackwardResult step = batch_backward(dataset, std::span(order).subspan(start, stop - start), params);
            if (!std::isfinite(step.loss) || !step.grads.all_finite())
                throw DivergenceError("training diverged at epoch " + std::to_string(epoch));
            if (config.optimizer == OptimizerKind::SGD)
                sgd_step(params, step.grads, config.learning_rate);
            else
                adam.step(params, step.grads);
        }
        const Evaluation e = evaluate(dataset, params);
        if (!std::isfinite(e.mean_loss))
            throw DivergenceError("training diverged at epoch " + std::to_string(epoch));
        result.history.push_back({epoch, e.mean_loss, e.accuracy});
        if (on_epoch)
            on_epoch(result.history.back(), params);
    }
    result.params = std::move(params);
    return result;
}

Evaluation evaluate(const Dataset& dataset, const DuoModelParams& params)
{
    check_dataset_for_model(dataset, params);
    double loss = 0.0;
    std::size_t correct = 0;
    for (const auto& t : dataset.trials) {
        const Vector logits = model_forward(t.signal, params);
        loss += cross_entropy(logits, t.label);
        if (argmax(logits) == t.label)
            ++correct;
    }
    const auto n = static_cast<double>(dataset.size());
    return {static_cast<double>(correct) / n, loss / n};
}

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw Error("cannot open " + path.string() + " for writing");
    out << "epoch,mean_loss,accuracy\n";
    for (const auto& h : history)
        out << h.epoch << ',' << format_real(h.mean_loss) << ',' << format_real(h.accuracy) << '\n';
}

} // namespace fuzzyduo
