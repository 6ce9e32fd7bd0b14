#pragma once

#include "fuzzyduo/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fuzzyduo {

/// One labeled recording, channels x timesteps.
struct Trial {
    std::size_t id = 0;
    Matrix signal;
    int label = 0;
};

struct Dataset {
    std::vector<Trial> trials;
    int num_classes = 2;
    std::vector<std::string> channel_names;
    double sampling_rate_hz = 1.0;

    Index channels() const { return static_cast<Index>(channel_names.size()); }
    Index timesteps() const { return trials.empty() ? 0 : trials.front().signal.cols(); }
    std::size_t size() const { return trials.size(); }
    bool empty() const { return trials.empty(); }

    // Shapes, labels and finiteness; throws DimensionError / InvalidLabel / InvalidInput.
    void validate() const;
    const Trial& find(std::size_t trial_id) const;
};

/// Parameters of the synthetic two-class benchmark: Gaussian noise everywhere,
/// plus a sinusoidal burst on the class's channel set inside the burst window.
struct SyntheticSpec {
    Index channels = 8;
    Index timesteps = 64;
    int trials_per_class = 200;
    int num_classes = 2;
    double amplitude = 1.0;
    double noise_sigma = 0.5;
    std::vector<Index> class0_channels{0, 1, 2};
    std::vector<Index> class1_channels{3, 4, 5};
    Index burst_start = 16;
    Index burst_end = 48; // exclusive
    double base_frequency_hz = 0.1;
    double sampling_rate_hz = 7.8125;
    std::uint64_t seed = 42;

    void validate() const;
};

Dataset generate_synthetic(const SyntheticSpec& spec);

/// Per-channel z-score parameters.
struct ChannelStats {
    Vector mean;
    Vector sd;
};

ChannelStats compute_channel_stats(const Dataset& dataset);

/// Z-scores every channel with `stats`, or with statistics computed over all
/// trials and timesteps of `dataset` when none are given. Channels whose sd is
/// below 1e-12 are only centered. Returns the transformed copy and the stats used.
std::pair<Dataset, ChannelStats> standardize(const Dataset& dataset,
                                             const std::optional<ChannelStats>& stats = std::nullopt);

/// Per-class split: floor(n_k * test_fraction) trials of class k go to test
/// after a seeded shuffle within the class; both halves are sorted by id.
std::pair<Dataset, Dataset> stratified_split(const Dataset& dataset, double test_fraction, std::uint64_t seed);

inline constexpr int kDatasetFormatVersion = 1;

// Directory layout: manifest.txt (key=value), labels.csv (trial_id,label) and
// one trial_<id>.csv per trial with C rows of T comma-separated values.
void save_csv_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_csv_dataset(const std::filesystem::path& dir);

} // namespace fuzzyduo
