#include "fuzzyduo/commands.hpp"

#include "fuzzyduo/error.hpp"
#include "fuzzyduo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace fuzzyduo::cli {

namespace {

const std::vector<std::string>& synthetic_keys()
{
    static const std::vector<std::string> keys{
        "channels",      "timesteps",       "trials_per_class", "num_classes",       "amplitude",
        "noise_sigma",   "class0_channels", "class1_channels",  "burst_start",       "burst_end",
        "base_frequency_hz", "sampling_rate_hz", "seed"};
    return keys;
}

void reject_unknown(const KeyValueFile& kv, const std::vector<std::string>& known)
{
    const auto unknown = kv.unknown_keys(known);
    if (!unknown.empty())
        throw ParseError(kv.source() + ": unknown key '" + unknown.front() + "'");
}

std::vector<Index> parse_channel_set(const std::string& text, const std::string& context)
{
    std::vector<Index> out;
    for (const auto& part : split(text, ','))
        out.push_back(static_cast<Index>(parse_integer(part, context)));
    return out;
}

std::uint64_t parse_seed(const KeyValueFile& kv, std::uint64_t fallback)
{
    if (!kv.has("seed"))
        return fallback;
    const auto v = parse_integer(kv.get("seed"), kv.source() + ": seed");
    if (v < 0)
        throw ParseError(kv.source() + ": seed must be non-negative");
    return static_cast<std::uint64_t>(v);
}

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw InvalidInput("cannot write " + path.string());
    return out;
}

void ensure_dir(const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw InvalidInput("cannot create output directory " + dir.string());
}

std::string percent(double v) { return format_fixed(100.0 * v, 2) + "%"; }

template <typename Body>
int guarded(std::ostream& err, Body&& body)
{
    try {
        return body();
    } catch (const DegenerateVariance& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::runtime;
    } catch (const DivergenceError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::runtime;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::runtime;
    }
}

} // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
    // splitmix64 finalizer over (seed, stream)
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

SyntheticSpec synthetic_spec_from(const KeyValueFile& kv)
{
    reject_unknown(kv, synthetic_keys());
    SyntheticSpec s;
    const std::string& src = kv.source();
    s.channels = static_cast<Index>(kv.get_integer("channels", s.channels));
    s.timesteps = static_cast<Index>(kv.get_integer("timesteps", s.timesteps));
    s.trials_per_class = static_cast<int>(kv.get_integer("trials_per_class", s.trials_per_class));
    s.num_classes = static_cast<int>(kv.get_integer("num_classes", s.num_classes));
    s.amplitude = kv.get_real("amplitude", s.amplitude);
    s.noise_sigma = kv.get_real("noise_sigma", s.noise_sigma);
    if (kv.has("class0_channels"))
        s.class0_channels = parse_channel_set(kv.get("class0_channels"), src + ": class0_channels");
    if (kv.has("class1_channels"))
        s.class1_channels = parse_channel_set(kv.get("class1_channels"), src + ": class1_channels");
    s.burst_start = static_cast<Index>(kv.get_integer("burst_start", s.burst_start));
    s.burst_end = static_cast<Index>(kv.get_integer("burst_end", s.burst_end));
    s.base_frequency_hz = kv.get_real("base_frequency_hz", s.base_frequency_hz);
    s.sampling_rate_hz = kv.get_real("sampling_rate_hz", s.sampling_rate_hz);
    s.seed = parse_seed(kv, s.seed);
    return s;
}

const std::vector<std::string>& RunConfig::known_keys()
{
    static const std::vector<std::string> keys{
        "epochs",     "batch_size",  "learning_rate", "optimizer",      "adam_beta1",     "adam_beta2",
        "adam_eps",   "shuffle",     "seed",          "rules_spatial",  "rules_temporal", "mf_family",
        "tie_widths", "test_fraction", "standardize"};
    return keys;
}

RunConfig RunConfig::from(const KeyValueFile& kv)
{
    reject_unknown(kv, known_keys());
    RunConfig c;
    c.train.epochs = static_cast<int>(kv.get_integer("epochs", c.train.epochs));
    c.train.batch_size = static_cast<int>(kv.get_integer("batch_size", c.train.batch_size));
    c.train.learning_rate = kv.get_real("learning_rate", c.train.learning_rate);
    c.train.optimizer = parse_optimizer(kv.get_string("optimizer", std::string(to_string(c.train.optimizer))));
    c.train.adam_beta1 = kv.get_real("adam_beta1", c.train.adam_beta1);
    c.train.adam_beta2 = kv.get_real("adam_beta2", c.train.adam_beta2);
    c.train.adam_eps = kv.get_real("adam_eps", c.train.adam_eps);
    c.train.shuffle = kv.get_bool("shuffle", c.train.shuffle);
    c.spatial_rules = static_cast<Index>(kv.get_integer("rules_spatial", c.spatial_rules));
    c.temporal_rules = static_cast<Index>(kv.get_integer("rules_temporal", c.temporal_rules));
    c.family = parse_mf_family(kv.get_string("mf_family", std::string(to_string(c.family))));
    c.tie_widths = kv.get_bool("tie_widths", c.tie_widths);
    c.test_fraction = kv.get_real("test_fraction", c.test_fraction);
    c.standardize = kv.get_bool("standardize", c.standardize);
    c.seed = parse_seed(kv, c.seed);
    c.train.validate();
    if (c.spatial_rules < 1 || c.temporal_rules < 1)
        throw InvalidParameter("rules_spatial and rules_temporal must be >= 1");
    if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0))
        throw InvalidParameter("test_fraction must lie in (0, 1)");
    return c;
}

KeyValueFile ConfigSource::load() const
{
    KeyValueFile kv = config ? KeyValueFile::load(*config) : KeyValueFile::parse("", "<defaults>");
    kv.apply_overrides(overrides);
    if (seed)
        kv.set("seed", std::to_string(*seed));
    return kv;
}

Dataset prepare_for_model(const Dataset& raw, const ModelFile& model)
{
    if (raw.channels() != model.params.channels())
        throw DimensionError("data has " + std::to_string(raw.channels()) + " channels, model expects " +
                             std::to_string(model.params.channels()));
    if (!model.standardization || raw.empty())
        return raw;
    return standardize(raw, model.standardization).first;
}

TrainOutcome run_training(const Dataset& data, const RunConfig& config)
{
    if (data.empty())
        throw InvalidInput("dataset is empty");
    data.validate();

    TrainOutcome outcome;
    auto [train, test] = stratified_split(data, config.test_fraction, derive_seed(config.seed, 1));
    outcome.train_raw = train;
    outcome.test_raw = test;
    if (config.standardize) {
        auto [train_std, stats] = standardize(train);
        train = std::move(train_std);
        if (!test.empty())
            test = standardize(test, stats).first;
        outcome.model.standardization = std::move(stats);
    }

    ModelShape shape;
    shape.channels = data.channels();
    shape.timesteps = data.timesteps();
    shape.classes = data.num_classes;
    shape.spatial_rules = config.spatial_rules;
    shape.temporal_rules = config.temporal_rules;
    shape.family = config.family;
    shape.tie_widths = config.tie_widths;

    TrainConfig tc = config.train;
    tc.seed = derive_seed(config.seed, 3);
    FitResult fitted = fit(train, tc, init_params(shape, derive_seed(config.seed, 2)));
    outcome.model.params = std::move(fitted.params);
    outcome.history = std::move(fitted.history);
    outcome.train_eval = evaluate(train, outcome.model.params);
    if (!test.empty())
        outcome.test_eval = evaluate(test, outcome.model.params);
    return outcome;
}

int cmd_gen_data(const GenDataArgs& args, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const SyntheticSpec spec = synthetic_spec_from(args.source.load());
        const Dataset ds = generate_synthetic(spec);
        save_csv_dataset(ds, args.out);
        out << "generated " << ds.size() << " trials, " << ds.channels() << " channels, " << ds.timesteps()
            << " steps, " << ds.num_classes << " classes\n";
        return exit_code::ok;
    });
}

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const RunConfig config = RunConfig::from(args.source.load());
        const Dataset data = load_csv_dataset(args.data);
        ensure_dir(args.out);

        const TrainOutcome r = run_training(data, config);
        save_model(args.out / "model.bin", r.model);
        write_history_csv(args.out / "history.csv", r.history);
        save_csv_dataset(r.train_raw, args.out / "train_data");
        if (!r.test_raw.empty())
            save_csv_dataset(r.test_raw, args.out / "test_data");

        auto summary = open_output(args.out / "summary.txt");
        summary << "format_version=1\n"
                << "epochs=" << config.train.epochs << '\n'
                << "mf_family=" << to_string(config.family) << '\n'
                << "seed=" << config.seed << '\n'
                << "train_trials=" << r.train_raw.size() << '\n'
                << "test_trials=" << r.test_raw.size() << '\n'
                << "train_accuracy=" << format_real(r.train_eval.accuracy) << '\n'
                << "train_mean_loss=" << format_real(r.train_eval.mean_loss) << '\n';
        if (r.test_eval)
            summary << "test_accuracy=" << format_real(r.test_eval->accuracy) << '\n'
                    << "test_mean_loss=" << format_real(r.test_eval->mean_loss) << '\n';

        out << "trained " << config.train.epochs << " epochs: train_accuracy=" << format_fixed(r.train_eval.accuracy, 6);
        if (r.test_eval)
            out << " test_accuracy=" << format_fixed(r.test_eval->accuracy, 6);
        out << '\n';
        return exit_code::ok;
    });
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const ModelFile model = load_model(args.model);
        const Dataset data = prepare_for_model(load_csv_dataset(args.data), model);
        const Evaluation e = evaluate(data, model.params);
        out << "accuracy=" << format_fixed(e.accuracy, 6) << " mean_loss=" << format_fixed(e.mean_loss, 6) << '\n';
        return exit_code::ok;
    });
}

int cmd_explain(const ExplainArgs& args, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        if (args.k < 1)
            throw InvalidInput("k must be >= 1");
        const ModelFile model = load_model(args.model);
        const Dataset data = prepare_for_model(load_csv_dataset(args.data), model);
        const Trial& trial = data.find(args.trial_id);
        for (const auto* f : {&model.params.spatial, &model.params.temporal})
            if (args.k > static_cast<std::size_t>(f->dim()))
                err << "warning: k=" << args.k << " exceeds the " << f->dim() << " features of a filter; clipped to "
                    << f->dim() << '\n';

        const ExplanationReport report = explain_trial(trial, model.params, args.k);
        ensure_dir(args.out);
        const std::string stem = "explain_trial_" + std::to_string(args.trial_id);
        {
            auto jsonl = open_output(args.out / (stem + ".jsonl"));
            write_report_jsonl(jsonl, report);
        }
        const std::string table = render_report(report);
        {
            auto txt = open_output(args.out / (stem + ".txt"));
            txt << table;
        }
        out << table;
        return exit_code::ok;
    });
}

int cmd_curves(const CurvesArgs& args, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const ModelFile model = load_model(args.model);
        const FuzzyFilterParams& filter = filter_of(model.params, args.filter);
        if (args.feature < 1 || args.feature > filter.dim())
            throw InvalidInput("feature must lie in [1, " + std::to_string(filter.dim()) + "]");
        ensure_dir(args.out);

        const CurveSamples curves =
            sample_mf_curves(filter.bank, args.feature - 1, args.x_min, args.x_max, args.points);
        {
            auto csv = open_output(args.out / "curves.csv");
            write_curves_csv(csv, curves);
        }
        out << "wrote " << curves.grid.size() << " curve points for " << filter.num_rules() << " rules\n";

        if (args.data) {
            if (args.rule < 1 || args.rule > filter.num_rules())
                throw InvalidInput("rule must lie in [1, " + std::to_string(filter.num_rules()) + "]");
            const Dataset data = prepare_for_model(load_csv_dataset(*args.data), model);
            const QueryHistogram h =
                query_histogram(data, model.params, args.filter, args.rule - 1, args.feature - 1, args.bins);
            auto hist_csv = open_output(args.out / "histogram.csv");
            write_histogram_csv(hist_csv, h);
            auto overlay = open_output(args.out / "histogram_curves.csv");
            write_curves_csv(overlay, h.curves);
            std::size_t total = 0;
            for (const auto c : h.counts)
                total += c;
            out << "wrote histogram of " << total << " projected slices in " << h.counts.size() << " bins\n";
        }
        return exit_code::ok;
    });
}

int cmd_compare(const CompareArgs& args, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        if (args.n_seeds < 2)
            throw InvalidInput("compare needs at least 2 seeds");
        const RunConfig base = RunConfig::from(args.source.load());
        const Dataset data = load_csv_dataset(args.data);
        ensure_dir(args.out);

        std::vector<double> acc_a;
        std::vector<double> acc_b;
        std::vector<std::uint64_t> seeds;
        for (int i = 0; i < args.n_seeds; ++i) {
            RunConfig cfg = base;
            cfg.seed = base.seed + static_cast<std::uint64_t>(i);
            seeds.push_back(cfg.seed);
            for (auto [family, sink] : {std::pair{args.family_a, &acc_a}, std::pair{args.family_b, &acc_b}}) {
                cfg.family = family;
                const TrainOutcome r = run_training(data, cfg);
                if (!r.test_eval)
                    throw InvalidInput("test split is empty; raise test_fraction");
                sink->push_back(r.test_eval->accuracy);
            }
        }

        {
            auto csv = open_output(args.out / "compare_seeds.csv");
            csv << "seed,accuracy_a,accuracy_b\n";
            for (std::size_t i = 0; i < seeds.size(); ++i)
                csv << seeds[i] << ',' << format_real(acc_a[i]) << ',' << format_real(acc_b[i]) << '\n';
        }

        const double mean_a = mean_of(acc_a);
        const double mean_b = mean_of(acc_b);
        const double sd_a = sample_sd(acc_a);
        const double sd_b = sample_sd(acc_b);
        out << to_string(args.family_a) << ": " << percent(mean_a) << " ± " << percent(sd_a) << " (n=" << args.n_seeds
            << ")\n";
        out << to_string(args.family_b) << ": " << percent(mean_b) << " ± " << percent(sd_b) << " (n=" << args.n_seeds
            << ")\n";

        const PairedTTest t = paired_t_test(acc_a, acc_b);
        const double d = cohens_d_paired(acc_a, acc_b);
        const double p_bh = fdr_bh(std::vector<double>{t.p_two_sided}).front();

        auto summary = open_output(args.out / "compare_summary.txt");
        summary << "format_version=1\n"
                << "family_a=" << to_string(args.family_a) << '\n'
                << "family_b=" << to_string(args.family_b) << '\n'
                << "n_seeds=" << args.n_seeds << '\n'
                << "mean_a=" << format_real(mean_a) << '\n'
                << "sd_a=" << format_real(sd_a) << '\n'
                << "mean_b=" << format_real(mean_b) << '\n'
                << "sd_b=" << format_real(sd_b) << '\n'
                << "t=" << format_real(t.t) << '\n'
                << "df=" << t.df << '\n'
                << "p_two_sided=" << format_real(t.p_two_sided) << '\n'
                << "p_fdr_bh=" << format_real(p_bh) << '\n'
                << "cohens_d=" << format_real(d) << '\n';

        out << "t(" << t.df << ") = " << format_fixed(t.t, 6) << ", p = " << format_real(t.p_two_sided)
            << ", p_fdr_bh = " << format_real(p_bh) << ", Cohen's d = " << format_fixed(d, 6) << '\n';
        return exit_code::ok;
    });
}

} // namespace fuzzyduo::cli
