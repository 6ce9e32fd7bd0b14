#pragma once

#include "fuzzyduo/data.hpp"
#include "fuzzyduo/model.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fuzzyduo {

enum class FilterKind { Spatial, Temporal };

std::string_view to_string(FilterKind kind);
FilterKind parse_filter_kind(std::string_view text);

const FuzzyFilterParams& filter_of(const DuoModelParams& params, FilterKind kind);

/// Rows of the filter's input slices for one trial: timesteps (S = T, D = C)
/// for the spatial filter, channels (S = C, D = T) for the temporal filter.
Matrix filter_slices(const Matrix& trial, FilterKind kind);

struct RankedFeature {
    Index feature = 0; // 0-indexed; reports print feature + 1
    double value = 0.0;
};

struct RuleExplanation {
    Vector contributions;    // per feature: membership degree mu(q_d), averaged over slices
    double firing_strength;  // normalized strength, averaged over slices
    std::vector<RankedFeature> top_k;
};

struct FilterExplanation {
    FilterKind kind = FilterKind::Spatial;
    std::vector<RuleExplanation> rules;
};

struct ExplanationReport {
    std::size_t trial_id = 0;
    int true_label = 0;
    int predicted_label = 0;
    FilterExplanation spatial;
    FilterExplanation temporal;
};

inline constexpr int kReportFormatVersion = 1;

/// The k largest entries, descending, ties broken by the lower index. k is
/// clipped to the number of entries.
std::vector<RankedFeature> top_k_features(const Vector& contributions, std::size_t k);

ExplanationReport explain_trial(const Trial& trial, const DuoModelParams& params, std::size_t k = 3);

/// One rule in the ampersand row layout, e.g. "3 & 20: 0.96 & 6: 0.96 & 8: 0.87".
std::string render_table_row(std::size_t rule_one_based, const std::vector<RankedFeature>& top);

/// Aligned "Rule | Top1 | Top2 | Top3" table for one filter.
std::string render_table(const FilterExplanation& filter);

/// Heading plus one table per filter.
std::string render_report(const ExplanationReport& report);

/// JSON Lines, one record per (filter, rule).
void write_report_jsonl(std::ostream& out, const ExplanationReport& report);

struct CurveSamples {
    Vector grid;   // ascending, endpoints exact
    Matrix values; // rules x grid points
};

/// Each rule's membership function for `feature`, sampled on a uniform grid.
CurveSamples sample_mf_curves(const RuleBank& bank, Index feature, double x_min, double x_max, Index n_points);

/// Columns: x, then one column per rule (rule1, rule2, ...).
void write_curves_csv(std::ostream& out, const CurveSamples& curves);

struct QueryHistogram {
    Vector edges;                    // n_bins + 1
    std::vector<std::size_t> counts; // n_bins
    CurveSamples curves;             // MF overlays on [edges.front(), edges.back()]
};

/// Histogram of coordinate `feature` of W_Q[rule] applied to every input slice
/// of every trial. Bins span the observed range; a constant sample gets a unit
/// range around its value. The last bin is closed on the right.
QueryHistogram query_histogram(const Dataset& dataset, const DuoModelParams& params, FilterKind kind, Index rule,
                               Index feature, Index n_bins, Index curve_points = 101);

/// Columns: bin_lower,bin_upper,count.
void write_histogram_csv(std::ostream& out, const QueryHistogram& hist);

} // namespace fuzzyduo
