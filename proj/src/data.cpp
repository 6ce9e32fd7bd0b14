#include "fuzzyduo/data.hpp"

#include "fuzzyduo/error.hpp"
#include "fuzzyduo/kv_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace fuzzyduo {

void Dataset::validate() const
{
    if (num_classes < 2)
        throw InvalidInput("dataset needs at least two classes");
    if (!(sampling_rate_hz > 0.0) || !std::isfinite(sampling_rate_hz))
        throw InvalidInput("sampling rate must be positive");
    const Index c = channels();
    const Index t = timesteps();
    for (const auto& trial : trials) {
        if (trial.signal.rows() != c || trial.signal.cols() != t)
            throw DimensionError("trial " + std::to_string(trial.id) + " is " + std::to_string(trial.signal.rows()) +
                                 "x" + std::to_string(trial.signal.cols()) + ", dataset is " + std::to_string(c) +
                                 "x" + std::to_string(t));
        if (trial.label < 0 || trial.label >= num_classes)
            throw InvalidLabel("trial " + std::to_string(trial.id) + " has label " + std::to_string(trial.label) +
                               " outside [0, " + std::to_string(num_classes) + ")");
        if (!trial.signal.allFinite())
            throw InvalidInput("trial " + std::to_string(trial.id) + " has non-finite samples");
    }
}

const Trial& Dataset::find(std::size_t trial_id) const
{
    for (const auto& t : trials)
        if (t.id == trial_id)
            return t;
    throw InvalidInput("no trial with id " + std::to_string(trial_id));
}

void SyntheticSpec::validate() const
{
    if (channels < 1 || timesteps < 1)
        throw InvalidSpec("synthetic spec needs positive channel and timestep counts");
    if (trials_per_class < 1)
        throw InvalidSpec("trials_per_class must be >= 1");
    if (num_classes != 2)
        throw InvalidSpec("the synthetic generator produces exactly two classes");
    if (!(noise_sigma >= 0.0) || !std::isfinite(amplitude))
        throw InvalidSpec("noise_sigma must be >= 0 and amplitude finite");
    if (!(sampling_rate_hz > 0.0) || !std::isfinite(base_frequency_hz))
        throw InvalidSpec("sampling rate must be positive and base frequency finite");
    if (class0_channels.empty() || class1_channels.empty())
        throw InvalidSpec("class channel sets must be non-empty");
    for (const auto* set : {&class0_channels, &class1_channels})
        for (const Index c : *set)
            if (c < 0 || c >= channels)
                throw InvalidSpec("class channel " + std::to_string(c) + " outside [0, " + std::to_string(channels) +
                                  ")");
    for (const Index c : class0_channels)
        if (std::find(class1_channels.begin(), class1_channels.end(), c) != class1_channels.end())
            throw InvalidSpec("class channel sets overlap at channel " + std::to_string(c));
    if (burst_start < 0 || burst_end > timesteps || burst_start >= burst_end)
        throw InvalidSpec("burst window must satisfy 0 <= start < end <= timesteps");
}

Dataset generate_synthetic(const SyntheticSpec& spec)
{
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    Dataset ds;
    ds.num_classes = spec.num_classes;
    ds.sampling_rate_hz = spec.sampling_rate_hz;
    for (Index c = 0; c < spec.channels; ++c)
        ds.channel_names.push_back("ch" + std::to_string(c + 1));

    const std::vector<Index>* class_channels[] = {&spec.class0_channels, &spec.class1_channels};
    std::size_t id = 0;
    // Trials alternate class 0, class 1 so any prefix stays nearly balanced.
    for (int i = 0; i < spec.trials_per_class; ++i) {
        for (int k = 0; k < spec.num_classes; ++k) {
            Trial trial;
            trial.id = id++;
            trial.label = k;
            trial.signal.resize(spec.channels, spec.timesteps);
            for (Index j = 0; j < trial.signal.size(); ++j)
                trial.signal.data()[j] = spec.noise_sigma * noise(rng);
            for (const Index c : *class_channels[k])
                for (Index t = spec.burst_start; t < spec.burst_end; ++t)
                    trial.signal(c, t) += spec.amplitude * std::sin(2.0 * std::numbers::pi * spec.base_frequency_hz *
                                                                    static_cast<double>(t) / spec.sampling_rate_hz);
            ds.trials.push_back(std::move(trial));
        }
    }
    return ds;
}

ChannelStats compute_channel_stats(const Dataset& dataset)
{
    if (dataset.empty())
        throw InvalidInput("cannot compute channel statistics of an empty dataset");
    const Index channels = dataset.channels();
    ChannelStats stats;
    stats.mean = Vector::Zero(channels);
    stats.sd = Vector::Zero(channels);
    const double count = static_cast<double>(dataset.size()) * static_cast<double>(dataset.timesteps());
    for (const auto& t : dataset.trials)
        stats.mean += t.signal.rowwise().sum();
    stats.mean /= count;
    // Two-pass population variance.
    for (const auto& t : dataset.trials)
        stats.sd += (t.signal.colwise() - stats.mean).array().square().rowwise().sum().matrix();
    stats.sd = (stats.sd / count).array().sqrt().matrix();
    return stats;
}

std::pair<Dataset, ChannelStats> standardize(const Dataset& dataset, const std::optional<ChannelStats>& stats)
{
    ChannelStats used = stats ? *stats : compute_channel_stats(dataset);
    if (used.mean.size() != dataset.channels() || used.sd.size() != dataset.channels())
        throw DimensionError("standardization stats cover " + std::to_string(used.mean.size()) +
                             " channels, dataset has " + std::to_string(dataset.channels()));
    Dataset out = dataset;
    for (auto& t : out.trials) {
        for (Index c = 0; c < t.signal.rows(); ++c) {
            t.signal.row(c).array() -= used.mean[c];
            if (used.sd[c] >= 1e-12)
                t.signal.row(c).array() /= used.sd[c];
        }
    }
    return {std::move(out), std::move(used)};
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& dataset, double test_fraction, std::uint64_t seed)
{
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw InvalidInput("test fraction must lie in (0, 1)");
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(dataset.num_classes));
    for (std::size_t i = 0; i < dataset.trials.size(); ++i) {
        const int label = dataset.trials[i].label;
        if (label < 0 || label >= dataset.num_classes)
            throw InvalidLabel("trial " + std::to_string(dataset.trials[i].id) + " has an invalid label");
        by_class[static_cast<std::size_t>(label)].push_back(i);
    }

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    for (std::size_t k = 0; k < by_class.size(); ++k) {
        auto& members = by_class[k];
        if (members.size() < 2)
            throw InvalidInput("class " + std::to_string(k) + " has fewer than 2 trials; cannot split");
        std::shuffle(members.begin(), members.end(), rng);
        // The epsilon keeps exact products such as 10 * 0.2 from flooring to 1.
        const auto n_test =
            static_cast<std::size_t>(std::floor(static_cast<double>(members.size()) * test_fraction + 1e-9));
        test_idx.insert(test_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
        train_idx.insert(train_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
    }

    auto build = [&](std::vector<std::size_t> idx) {
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return dataset.trials[a].id < dataset.trials[b].id; });
        Dataset part;
        part.num_classes = dataset.num_classes;
        part.channel_names = dataset.channel_names;
        part.sampling_rate_hz = dataset.sampling_rate_hz;
        for (const std::size_t i : idx)
            part.trials.push_back(dataset.trials[i]);
        return part;
    };
    return {build(std::move(train_idx)), build(std::move(test_idx))};
}

namespace {

std::string trial_file_name(std::size_t id) { return "trial_" + std::to_string(id) + ".csv"; }

std::ofstream open_for_write(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw Error("cannot open " + path.string() + " for writing");
    return out;
}

std::string join(const std::vector<std::string>& parts, char sep)
{
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i)
            s += sep;
        s += parts[i];
    }
    return s;
}

} // namespace

void save_csv_dataset(const Dataset& dataset, const std::filesystem::path& dir)
{
    dataset.validate();
    for (const auto& name : dataset.channel_names)
        if (name.find_first_of(",\n\r=") != std::string::npos)
            throw InvalidInput("channel name '" + name + "' contains a reserved character");
    std::filesystem::create_directories(dir);

    {
        auto out = open_for_write(dir / "manifest.txt");
        out << "format_version=" << kDatasetFormatVersion << '\n'
            << "num_classes=" << dataset.num_classes << '\n'
            << "channels=" << dataset.channels() << '\n'
            << "timesteps=" << dataset.timesteps() << '\n'
            << "sampling_rate_hz=" << format_real(dataset.sampling_rate_hz) << '\n'
            << "channel_names=" << join(dataset.channel_names, ',') << '\n';
    }
    {
        auto out = open_for_write(dir / "labels.csv");
        out << "trial_id,label\n";
        for (const auto& t : dataset.trials)
            out << t.id << ',' << t.label << '\n';
    }
    for (const auto& t : dataset.trials) {
        auto out = open_for_write(dir / trial_file_name(t.id));
        for (Index c = 0; c < t.signal.rows(); ++c) {
            for (Index j = 0; j < t.signal.cols(); ++j) {
                if (j)
                    out << ',';
                out << format_real(t.signal(c, j));
            }
            out << '\n';
        }
    }
}

Dataset load_csv_dataset(const std::filesystem::path& dir)
{
    const auto manifest_path = dir / "manifest.txt";
    if (!std::filesystem::exists(manifest_path))
        throw ParseError("missing manifest: " + manifest_path.string());
    const auto manifest = KeyValueFile::load(manifest_path);
    const auto version = manifest.get_integer("format_version", -1);
    if (version != kDatasetFormatVersion)
        throw ParseError(manifest_path.string() + ": unsupported format_version " + std::to_string(version));

    Dataset ds;
    ds.num_classes = static_cast<int>(parse_integer(manifest.get("num_classes"), manifest_path.string()));
    const auto channels = parse_integer(manifest.get("channels"), manifest_path.string());
    const auto timesteps = parse_integer(manifest.get("timesteps"), manifest_path.string());
    ds.sampling_rate_hz = parse_real(manifest.get("sampling_rate_hz"), manifest_path.string());
    ds.channel_names = split(manifest.get("channel_names"), ',');
    if (channels < 1 || timesteps < 1 || static_cast<long long>(ds.channel_names.size()) != channels)
        throw ParseError(manifest_path.string() + ": channel count, timesteps and channel_names disagree");
    if (ds.num_classes < 2)
        throw ParseError(manifest_path.string() + ": num_classes must be >= 2");

    const auto labels_path = dir / "labels.csv";
    std::ifstream labels(labels_path);
    if (!labels)
        throw ParseError("missing labels file: " + labels_path.string());
    std::string line;
    int line_no = 0;
    std::set<std::size_t> seen;
    while (std::getline(labels, line)) {
        ++line_no;
        const std::string where = labels_path.string() + ":" + std::to_string(line_no);
        if (line_no == 1) {
            if (trim(line) != "trial_id,label")
                throw ParseError(where + ": expected header 'trial_id,label'");
            continue;
        }
        if (trim(line).empty())
            continue;
        const auto fields = split(line, ',');
        if (fields.size() != 2)
            throw ParseError(where + ": expected trial_id,label");
        const auto id = parse_integer(fields[0], where);
        const auto label = parse_integer(fields[1], where);
        if (id < 0 || !seen.insert(static_cast<std::size_t>(id)).second)
            throw ParseError(where + ": invalid or duplicate trial id " + fields[0]);
        if (label < 0 || label >= ds.num_classes)
            throw ParseError(where + ": unknown label " + fields[1]);

        Trial trial;
        trial.id = static_cast<std::size_t>(id);
        trial.label = static_cast<int>(label);
        trial.signal.resize(channels, timesteps);

        const auto trial_path = dir / trial_file_name(trial.id);
        std::ifstream tin(trial_path);
        if (!tin)
            throw ParseError(where + ": missing trial file " + trial_path.string());
        std::string row;
        Index c = 0;
        int row_no = 0;
        while (std::getline(tin, row)) {
            ++row_no;
            if (trim(row).empty())
                continue;
            const std::string trial_where = trial_path.string() + ":" + std::to_string(row_no);
            if (c >= channels)
                throw ParseError(trial_where + ": more than " + std::to_string(channels) + " rows");
            const auto cells = split(row, ',');
            if (static_cast<long long>(cells.size()) != timesteps)
                throw ParseError(trial_where + ": expected " + std::to_string(timesteps) + " columns, found " +
                                 std::to_string(cells.size()));
            for (Index j = 0; j < timesteps; ++j)
                trial.signal(c, j) = parse_real(cells[static_cast<std::size_t>(j)], trial_where);
            ++c;
        }
        if (c != channels)
            throw ParseError(trial_path.string() + ": expected " + std::to_string(channels) + " rows, found " +
                             std::to_string(c));
        ds.trials.push_back(std::move(trial));
    }
    if (line_no == 0)
        throw ParseError(labels_path.string() + ": empty labels file");
    try {
        ds.validate();
    } catch (const Error& e) {
        throw ParseError(dir.string() + ": " + e.what());
    }
    return ds;
}

} // namespace fuzzyduo
