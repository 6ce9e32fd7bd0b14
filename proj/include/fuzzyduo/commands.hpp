#pragma once

#include "fuzzyduo/data.hpp"
#include "fuzzyduo/interpret.hpp"
#include "fuzzyduo/kv_config.hpp"
#include "fuzzyduo/model_io.hpp"
#include "fuzzyduo/training.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fuzzyduo::cli {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 2;
inline constexpr int runtime = 3;
} // namespace exit_code

/// Independent, reproducible sub-seeds (split, init, shuffling) from one run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Synthetic generator settings from key=value text; unset keys keep the
/// benchmark defaults. Channel sets are comma-separated 0-indexed channels.
SyntheticSpec synthetic_spec_from(const KeyValueFile& kv);

/// Everything `train` and `compare` need: optimizer settings, model shape,
/// split and standardization, and the run seed.
struct RunConfig {
    TrainConfig train;
    Index spatial_rules = 5;
    Index temporal_rules = 5;
    MfFamily family = MfFamily::ModifiedLaplace;
    bool tie_widths = false;
    double test_fraction = 0.2;
    bool standardize = true;
    std::uint64_t seed = 42;

    static RunConfig from(const KeyValueFile& kv);
    static const std::vector<std::string>& known_keys();
};

struct TrainOutcome {
    ModelFile model;
    std::vector<EpochRecord> history;
    Evaluation train_eval;
    std::optional<Evaluation> test_eval;
    Dataset train_raw;
    Dataset test_raw;
};

/// Split, standardize on the training half, initialize, fit, evaluate.
TrainOutcome run_training(const Dataset& data, const RunConfig& config);

/// Applies the model's stored standardization (if any) to raw data.
Dataset prepare_for_model(const Dataset& raw, const ModelFile& model);

struct ConfigSource {
    std::optional<std::filesystem::path> config;
    std::vector<std::string> overrides; // key=value
    std::optional<std::uint64_t> seed;

    KeyValueFile load() const;
};

struct GenDataArgs {
    ConfigSource source;
    std::filesystem::path out;
};

struct TrainArgs {
    ConfigSource source;
    std::filesystem::path data;
    std::filesystem::path out;
};

struct EvalArgs {
    std::filesystem::path model;
    std::filesystem::path data;
};

struct ExplainArgs {
    std::filesystem::path model;
    std::filesystem::path data;
    std::size_t trial_id = 0;
    std::size_t k = 3;
    std::filesystem::path out;
};

struct CurvesArgs {
    std::filesystem::path model;
    FilterKind filter = FilterKind::Spatial;
    Index feature = 1; // 1-indexed
    double x_min = -3.0;
    double x_max = 3.0;
    Index points = 201;
    std::optional<std::filesystem::path> data;
    Index rule = 1; // 1-indexed, histogram only
    Index bins = 30;
    std::filesystem::path out;
};

struct CompareArgs {
    ConfigSource source;
    std::filesystem::path data;
    int n_seeds = 10;
    MfFamily family_a = MfFamily::ModifiedLaplace;
    MfFamily family_b = MfFamily::Gaussian;
    std::filesystem::path out;
};

// Each command returns its exit code: 0 success, 2 usage or validation
// error, 3 runtime or numeric failure. Messages go to `err`.
int cmd_gen_data(const GenDataArgs& args, std::ostream& out, std::ostream& err);
int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_explain(const ExplainArgs& args, std::ostream& out, std::ostream& err);
int cmd_curves(const CurvesArgs& args, std::ostream& out, std::ostream& err);
int cmd_compare(const CompareArgs& args, std::ostream& out, std::ostream& err);

} // namespace fuzzyduo::cli
