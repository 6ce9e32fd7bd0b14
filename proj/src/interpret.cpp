#include "fuzzyduo/interpret.hpp"

#include "fuzzyduo/error.hpp"
#include "fuzzyduo/kv_config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

namespace fuzzyduo {

std::string_view to_string(FilterKind kind)
{
    return kind == FilterKind::Spatial ? "spatial" : "temporal";
}

FilterKind parse_filter_kind(std::string_view text)
{
    if (text == "spatial")
        return FilterKind::Spatial;
    if (text == "temporal")
        return FilterKind::Temporal;
    throw InvalidParameter("unknown filter '" + std::string(text) + "' (expected spatial or temporal)");
}

const FuzzyFilterParams& filter_of(const DuoModelParams& params, FilterKind kind)
{
    return kind == FilterKind::Spatial ? params.spatial : params.temporal;
}

Matrix filter_slices(const Matrix& trial, FilterKind kind)
{
    return kind == FilterKind::Spatial ? Matrix(trial.transpose()) : trial;
}

std::vector<RankedFeature> top_k_features(const Vector& contributions, std::size_t k)
{
    std::vector<Index> order(static_cast<std::size_t>(contributions.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return contributions[a] > contributions[b]; });
    k = std::min(k, order.size());
    std::vector<RankedFeature> top;
    for (std::size_t i = 0; i < k; ++i)
        top.push_back({order[i], contributions[order[i]]});
    return top;
}

namespace {

FilterExplanation explain_filter(const Matrix& trial, const FuzzyFilterParams& p, FilterKind kind, std::size_t k)
{
    const FilterTrace t = trace_filter(filter_slices(trial, kind), p);
    const auto n_slices = static_cast<double>(t.inputs.rows());
    FilterExplanation out;
    out.kind = kind;
    for (Index r = 0; r < p.num_rules(); ++r) {
        RuleExplanation rule;
        rule.contributions = Vector::Zero(p.dim());
        for (Index s = 0; s < t.inputs.rows(); ++s)
            for (Index d = 0; d < p.dim(); ++d)
                rule.contributions[d] += std::exp(p.bank.mf(r, d).log_eval(t.query[r](s, d)));
        rule.contributions /= n_slices;
        rule.firing_strength = t.strength.col(r).sum() / n_slices;
        rule.top_k = top_k_features(rule.contributions, k);
        out.rules.push_back(std::move(rule));
    }
    return out;
}

std::string cell(const RankedFeature& f) { return std::to_string(f.feature + 1) + ": " + format_fixed(f.value, 2); }

} // namespace

ExplanationReport explain_trial(const Trial& trial, const DuoModelParams& params, std::size_t k)
{
    check_trial_shape(trial.signal, params);
    if (k < 1)
        throw InvalidInput("top-k needs k >= 1");
    ExplanationReport report;
    report.trial_id = trial.id;
    report.true_label = trial.label;
    report.predicted_label = predict(trial.signal, params);
    report.spatial = explain_filter(trial.signal, params.spatial, FilterKind::Spatial, k);
    report.temporal = explain_filter(trial.signal, params.temporal, FilterKind::Temporal, k);
    return report;
}

std::string render_table_row(std::size_t rule_one_based, const std::vector<RankedFeature>& top)
{
    std::string row = std::to_string(rule_one_based);
    for (const auto& f : top)
        row += " & " + cell(f);
    return row;
}

std::string render_table(const FilterExplanation& filter)
{
    std::size_t columns = 0;
    for (const auto& r : filter.rules)
        columns = std::max(columns, r.top_k.size());

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"Rule"};
    for (std::size_t c = 0; c < columns; ++c)
        header.push_back("Top" + std::to_string(c + 1));
    rows.push_back(header);
    for (std::size_t r = 0; r < filter.rules.size(); ++r) {
        std::vector<std::string> row{std::to_string(r + 1)};
        for (std::size_t c = 0; c < columns; ++c)
            row.push_back(c < filter.rules[r].top_k.size() ? cell(filter.rules[r].top_k[c]) : "");
        rows.push_back(std::move(row));
    }

    std::vector<std::size_t> width(columns + 1, 0);
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c)
            width[c] = std::max(width[c], row[c].size());

    std::string out;
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c)
                line += " | ";
            line += row[c];
            if (c + 1 < row.size())
                line.append(width[c] - row[c].size(), ' ');
        }
        out += line + '\n';
    }
    return out;
}

std::string render_report(const ExplanationReport& report)
{
    std::ostringstream out;
    out << "Trial " << report.trial_id << ": true label " << report.true_label << ", predicted "
        << report.predicted_label << '\n';
    for (const auto* f : {&report.spatial, &report.temporal}) {
        out << '\n' << (f->kind == FilterKind::Spatial ? "Spatial filter" : "Temporal filter") << '\n';
        out << render_table(*f);
    }
    return out.str();
}

void write_report_jsonl(std::ostream& out, const ExplanationReport& report)
{
    for (const auto* f : {&report.spatial, &report.temporal}) {
        for (std::size_t r = 0; r < f->rules.size(); ++r) {
            const auto& rule = f->rules[r];
            nlohmann::json rec;
            rec["format_version"] = kReportFormatVersion;
            rec["trial_id"] = report.trial_id;
            rec["true_label"] = report.true_label;
            rec["predicted_label"] = report.predicted_label;
            rec["filter"] = std::string(to_string(f->kind));
            rec["rule"] = r + 1;
            rec["firing_strength"] = rule.firing_strength;
            auto top = nlohmann::json::array();
            for (const auto& t : rule.top_k)
                top.push_back({{"feature", t.feature + 1}, {"strength", t.value}});
            rec["top_k"] = std::move(top);
            rec["contributions"] = std::vector<double>(rule.contributions.begin(), rule.contributions.end());
            out << rec.dump() << '\n';
        }
    }
}

CurveSamples sample_mf_curves(const RuleBank& bank, Index feature, double x_min, double x_max, Index n_points)
{
    if (n_points < 2)
        throw InvalidInput("curve sampling needs at least two points");
    if (!(x_min < x_max) || !std::isfinite(x_min) || !std::isfinite(x_max))
        throw InvalidInput("curve range must satisfy x_min < x_max");
    if (feature < 0 || feature >= bank.num_features())
        throw DimensionError("feature " + std::to_string(feature) + " outside the rule bank");

    CurveSamples c;
    c.grid.resize(n_points);
    const double step = (x_max - x_min) / static_cast<double>(n_points - 1);
    for (Index i = 0; i < n_points; ++i)
        c.grid[i] = x_min + step * static_cast<double>(i);
    c.grid[n_points - 1] = x_max;

    c.values.resize(bank.num_rules(), n_points);
    for (Index r = 0; r < bank.num_rules(); ++r) {
        const MfParams mf = bank.mf(r, feature);
        for (Index i = 0; i < n_points; ++i)
            c.values(r, i) = mf.eval(c.grid[i]);
    }
    return c;
}

void write_curves_csv(std::ostream& out, const CurveSamples& curves)
{
    out << "x";
    for (Index r = 0; r < curves.values.rows(); ++r)
        out << ",rule" << r + 1;
    out << '\n';
    for (Index i = 0; i < curves.grid.size(); ++i) {
        out << format_real(curves.grid[i]);
        for (Index r = 0; r < curves.values.rows(); ++r)
            out << ',' << format_real(curves.values(r, i));
        out << '\n';
    }
}

QueryHistogram query_histogram(const Dataset& dataset, const DuoModelParams& params, FilterKind kind, Index rule,
                               Index feature, Index n_bins, Index curve_points)
{
    if (dataset.empty())
        throw InvalidInput("query histogram of an empty dataset");
    if (n_bins < 1)
        throw InvalidInput("histogram needs at least one bin");
    const FuzzyFilterParams& p = filter_of(params, kind);
    if (rule < 0 || rule >= p.num_rules())
        throw DimensionError("rule " + std::to_string(rule) + " outside the filter");
    if (feature < 0 || feature >= p.dim())
        throw DimensionError("feature " + std::to_string(feature) + " outside the filter");

    std::vector<double> projected;
    for (const auto& trial : dataset.trials) {
        check_trial_shape(trial.signal, params);
        const Matrix slices = filter_slices(trial.signal, kind);
        const Vector coord = slices * p.query[static_cast<std::size_t>(rule)].row(feature).transpose();
        projected.insert(projected.end(), coord.data(), coord.data() + coord.size());
    }

    const auto [min_it, max_it] = std::minmax_element(projected.begin(), projected.end());
    double lo = *min_it;
    double hi = *max_it;
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }

    QueryHistogram h;
    h.edges.resize(n_bins + 1);
    const double width = (hi - lo) / static_cast<double>(n_bins);
    for (Index b = 0; b <= n_bins; ++b)
        h.edges[b] = lo + width * static_cast<double>(b);
    h.edges[n_bins] = hi;
    h.counts.assign(static_cast<std::size_t>(n_bins), 0);
    for (const double v : projected) {
        auto b = static_cast<Index>(std::floor((v - lo) / (hi - lo) * static_cast<double>(n_bins)));
        b = std::clamp<Index>(b, 0, n_bins - 1);
        ++h.counts[static_cast<std::size_t>(b)];
    }
    h.curves = sample_mf_curves(p.bank, feature, lo, hi, curve_points);
    return h;
}

void write_histogram_csv(std::ostream& out, const QueryHistogram& hist)
{
    out << "bin_lower,bin_upper,count\n";
    for (std::size_t b = 0; b < hist.counts.size(); ++b)
        out << format_real(hist.edges[static_cast<Index>(b)]) << ',' << format_real(hist.edges[static_cast<Index>(b) + 1])
            << ',' << hist.counts[b] << '\n';
}

} // namespace fuzzyduo
