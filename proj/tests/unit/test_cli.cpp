#include "fuzzyduo/commands.hpp"
#include "fuzzyduo/error.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

using namespace fuzzyduo;
namespace fs = std::filesystem;
namespace cli = fuzzyduo::cli;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

cli::ConfigSource small_data_source()
{
    cli::ConfigSource s;
    s.overrides = {"channels=4", "timesteps=12", "trials_per_class=10", "class0_channels=0",
                   "class1_channels=2", "burst_start=3", "burst_end=9"};
    return s;
}

cli::ConfigSource small_train_source(int epochs = 3)
{
    cli::ConfigSource s;
    s.overrides = {"epochs=" + std::to_string(epochs), "batch_size=4", "rules_spatial=2", "rules_temporal=2"};
    return s;
}

fs::path make_data(const std::string& name)
{
    const fs::path dir = testsupport::scratch_dir(name);
    std::ostringstream out, err;
    REQUIRE(cli::cmd_gen_data({small_data_source(), dir / "data"}, out, err) == 0);
    return dir;
}

int run_binary(const std::string& args)
{
    const int status = std::system((std::string(FUZZYDUO_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("gen-data writes a loadable, reproducible dataset")
{
    const fs::path dir = testsupport::scratch_dir("cli_gen");
    std::ostringstream out, err;
    REQUIRE(cli::cmd_gen_data({small_data_source(), dir / "a"}, out, err) == 0);
    CHECK(out.str() == "generated 20 trials, 4 channels, 12 steps, 2 classes\n");
    const Dataset d = load_csv_dataset(dir / "a");
    CHECK(d.size() == 20);
    REQUIRE(cli::cmd_gen_data({small_data_source(), dir / "b"}, out, err) == 0);
    for (const char* f : {"trial_0.csv", "trial_19.csv", "labels.csv", "manifest.txt"})
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));

    cli::ConfigSource bad = small_data_source();
    bad.overrides.push_back("class1_channels=0,1");
    std::ostringstream berr;
    CHECK(cli::cmd_gen_data({bad, dir / "c"}, out, berr) == cli::exit_code::usage);
    CHECK(berr.str().find("overlap") != std::string::npos);

    cli::ConfigSource typo = small_data_source();
    typo.overrides.push_back("chanels=3");
    CHECK(cli::cmd_gen_data({typo, dir / "d"}, out, err) == cli::exit_code::usage);
}

TEST_CASE("train, eval and reproducibility")
{
    const fs::path dir = make_data("cli_train");
    std::ostringstream out, err;
    REQUIRE(cli::cmd_train({small_train_source(), dir / "data", dir / "run1"}, out, err) == 0);
    REQUIRE(cli::cmd_train({small_train_source(), dir / "data", dir / "run2"}, out, err) == 0);
    for (const char* f : {"model.bin", "history.csv", "summary.txt"}) {
        CHECK(fs::exists(dir / "run1" / f));
        CHECK(slurp(dir / "run1" / f) == slurp(dir / "run2" / f));
    }
    const KeyValueFile summary = KeyValueFile::load(dir / "run1" / "summary.txt");
    CHECK(summary.get("format_version") == "1");
    CHECK(summary.get("test_trials") == "4");

    // Eval on the training split reproduces the last history entry.
    std::ifstream hist(dir / "run1" / "history.csv");
    std::string line, last;
    while (std::getline(hist, line))
        last = line;
    const auto fields = split(last, ',');
    REQUIRE(fields.size() == 3);
    std::ostringstream eout;
    REQUIRE(cli::cmd_eval({dir / "run1" / "model.bin", dir / "run1" / "train_data"}, eout, err) == 0);
    CHECK(eout.str() == "accuracy=" + format_fixed(parse_real(fields[2], "acc"), 6) +
                            " mean_loss=" + format_fixed(parse_real(fields[1], "loss"), 6) + "\n");
}

TEST_CASE("zero epochs leaves the initialization in the model file")
{
    const fs::path dir = make_data("cli_zero");
    std::ostringstream out, err;
    REQUIRE(cli::cmd_train({small_train_source(0), dir / "data", dir / "run"}, out, err) == 0);
    const ModelFile m = load_model(dir / "run" / "model.bin");
    ModelShape s;
    s.channels = 4;
    s.timesteps = 12;
    s.spatial_rules = 2;
    s.temporal_rules = 2;
    const DuoModelParams init = init_params(s, cli::derive_seed(42, 2));
    CHECK(m.params.spatial.bank.centers == init.spatial.bank.centers);
    CHECK(m.params.temporal.query[1] == init.temporal.query[1]);
    CHECK(m.params.classifier_weights == init.classifier_weights);
}

TEST_CASE("train and eval errors")
{
    const fs::path dir = make_data("cli_errors");
    std::ostringstream out, err;
    cli::ConfigSource bad = small_train_source();
    bad.overrides.push_back("learning_rate=-1");
    CHECK(cli::cmd_train({bad, dir / "data", dir / "x"}, out, err) == cli::exit_code::usage);

    cli::ConfigSource diverge = small_train_source();
    diverge.overrides.insert(diverge.overrides.end(), {"optimizer=sgd", "learning_rate=1e300"});
    CHECK(cli::cmd_train({diverge, dir / "data", dir / "y"}, out, err) == cli::exit_code::runtime);

    REQUIRE(cli::cmd_train({small_train_source(1), dir / "data", dir / "run"}, out, err) == 0);
    cli::ConfigSource wide;
    wide.overrides = {"channels=5", "timesteps=12", "trials_per_class=2", "class0_channels=0",
                      "class1_channels=2", "burst_start=3", "burst_end=9"};
    REQUIRE(cli::cmd_gen_data({wide, dir / "wide"}, out, err) == 0);
    CHECK(cli::cmd_eval({dir / "run" / "model.bin", dir / "wide"}, out, err) == cli::exit_code::usage);

    Dataset empty = load_csv_dataset(dir / "data");
    empty.trials.clear();
    save_csv_dataset(empty, dir / "empty");
    CHECK(cli::cmd_eval({dir / "run" / "model.bin", dir / "empty"}, out, err) == cli::exit_code::usage);
    CHECK(cli::cmd_eval({dir / "missing.bin", dir / "data"}, out, err) == cli::exit_code::usage);
}

TEST_CASE("explain writes a report and clips k")
{
    const fs::path dir = make_data("cli_explain");
    std::ostringstream out, err;
    REQUIRE(cli::cmd_train({small_train_source(), dir / "data", dir / "run"}, out, err) == 0);

    std::ostringstream eout, eerr;
    REQUIRE(cli::cmd_explain({dir / "run" / "model.bin", dir / "data", 7, 3, dir / "ex"}, eout, eerr) == 0);
    CHECK(eout.str().find("Rule | Top1") != std::string::npos);
    CHECK(slurp(dir / "ex" / "explain_trial_7.txt") == eout.str());
    std::ifstream in(dir / "ex" / "explain_trial_7.jsonl");
    std::string line;
    double sums[2] = {0.0, 0.0};
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j["top_k"].size() == 3);
        sums[j["filter"] == "spatial" ? 0 : 1] += j["firing_strength"].get<double>();
    }
    CHECK(std::abs(sums[0] - 1.0) <= 1e-9);
    CHECK(std::abs(sums[1] - 1.0) <= 1e-9);

    std::ostringstream kout, kerr;
    REQUIRE(cli::cmd_explain({dir / "run" / "model.bin", dir / "data", 7, 6, dir / "ex6"}, kout, kerr) == 0);
    CHECK(kerr.str().find("warning") != std::string::npos);
    std::ifstream in6(dir / "ex6" / "explain_trial_7.jsonl");
    std::getline(in6, line);
    CHECK(nlohmann::json::parse(line)["top_k"].size() == 4);

    CHECK(cli::cmd_explain({dir / "run" / "model.bin", dir / "data", 999, 3, dir / "ex"}, out, err) ==
          cli::exit_code::usage);
}

TEST_CASE("curves and histogram export")
{
    const fs::path dir = make_data("cli_curves");
    std::ostringstream out, err;
    REQUIRE(cli::cmd_train({small_train_source(), dir / "data", dir / "run"}, out, err) == 0);
    cli::CurvesArgs a;
    a.model = dir / "run" / "model.bin";
    a.feature = 2;
    a.points = 11;
    a.data = dir / "data";
    a.bins = 6;
    a.out = dir / "curves";
    std::ostringstream cout_;
    REQUIRE(cli::cmd_curves(a, cout_, err) == 0);
    CHECK(cout_.str().find("of 240 projected slices") != std::string::npos);
    std::ifstream in(dir / "curves" / "curves.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "x,rule1,rule2");
    a.feature = 5;
    CHECK(cli::cmd_curves(a, out, err) == cli::exit_code::usage);
}

TEST_CASE("compare needs two seeds and distinct arms")
{
    const fs::path dir = make_data("cli_compare");
    std::ostringstream out, err;
    cli::CompareArgs c;
    c.source = small_train_source(2);
    c.data = dir / "data";
    c.out = dir / "cmp";
    c.n_seeds = 1;
    CHECK(cli::cmd_compare(c, out, err) == cli::exit_code::usage);

    c.n_seeds = 2;
    c.family_b = MfFamily::ModifiedLaplace;
    std::ostringstream derr;
    CHECK(cli::cmd_compare(c, out, derr) == cli::exit_code::runtime);
    CHECK(derr.str().find("variance") != std::string::npos);
}

TEST_CASE("binary exit codes")
{
    CHECK(run_binary("") == 2);
    CHECK(run_binary("--help") == 0);
    CHECK(run_binary("frobnicate") == 2);
    CHECK(run_binary("eval --model") == 2);
    CHECK(run_binary("gen-data --out /dev/null/x --set channels=0") == 2);
}

}
