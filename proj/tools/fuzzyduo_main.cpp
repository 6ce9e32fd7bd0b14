// Command-line front end: gen-data, train, eval, explain, curves, compare.

#include "fuzzyduo/commands.hpp"
#include "fuzzyduo/error.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace cli = fuzzyduo::cli;

namespace {

void add_config_flags(CLI::App* cmd, cli::ConfigSource& source)
{
    cmd->add_option("--config", source.config, "key=value config file");
    cmd->add_option("--set", source.overrides, "override one config key (key=value), repeatable");
    cmd->add_option("--seed", source.seed, "run seed (overrides the config)");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dual-filter fuzzy neural network: data generation, training, evaluation and explanation"};
    app.require_subcommand(1);

    cli::GenDataArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "generate the synthetic spatiotemporal dataset");
    add_config_flags(gen_cmd, gen.source);
    gen_cmd->add_option("--out", gen.out, "output dataset directory")->required();

    cli::TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "train a model on a held-out split");
    add_config_flags(train_cmd, train.source);
    train_cmd->add_option("--data", train.data, "dataset directory")->required();
    train_cmd->add_option("--out", train.out, "output directory")->required();

    cli::EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "accuracy and mean loss of a model on a dataset");
    eval_cmd->add_option("--model", eval.model, "model file")->required();
    eval_cmd->add_option("--data", eval.data, "dataset directory")->required();

    cli::ExplainArgs explain;
    auto* explain_cmd = app.add_subcommand("explain", "per-rule firing strengths and top-k features for one trial");
    explain_cmd->add_option("--model", explain.model, "model file")->required();
    explain_cmd->add_option("--data", explain.data, "dataset directory")->required();
    explain_cmd->add_option("--trial", explain.trial_id, "trial id")->required();
    explain_cmd->add_option("-k,--top-k", explain.k, "features per rule")->capture_default_str();
    explain_cmd->add_option("--out", explain.out, "output directory")->required();

    cli::CurvesArgs curves;
    std::string curves_filter = "spatial";
    auto* curves_cmd = app.add_subcommand("curves", "membership curves, optionally with a query-space histogram");
    curves_cmd->add_option("--model", curves.model, "model file")->required();
    curves_cmd->add_option("--filter", curves_filter, "spatial or temporal")->capture_default_str();
    curves_cmd->add_option("--feature", curves.feature, "feature (1-indexed)")->capture_default_str();
    curves_cmd->add_option("--x-min", curves.x_min, "grid start")->capture_default_str();
    curves_cmd->add_option("--x-max", curves.x_max, "grid end")->capture_default_str();
    curves_cmd->add_option("--points", curves.points, "grid points")->capture_default_str();
    curves_cmd->add_option("--data", curves.data, "dataset directory for the query histogram");
    curves_cmd->add_option("--rule", curves.rule, "rule whose query space is histogrammed (1-indexed)")
        ->capture_default_str();
    curves_cmd->add_option("--bins", curves.bins, "histogram bins")->capture_default_str();
    curves_cmd->add_option("--out", curves.out, "output directory")->required();

    cli::CompareArgs compare;
    std::string family_a = "modified-laplace";
    std::string family_b = "gaussian";
    auto* compare_cmd = app.add_subcommand("compare", "paired-seed comparison of two membership families");
    add_config_flags(compare_cmd, compare.source);
    compare_cmd->add_option("--data", compare.data, "dataset directory")->required();
    compare_cmd->add_option("--n-seeds", compare.n_seeds, "paired seeds")->capture_default_str();
    compare_cmd->add_option("--family-a", family_a, "first arm")->capture_default_str();
    compare_cmd->add_option("--family-b", family_b, "second arm")->capture_default_str();
    compare_cmd->add_option("--out", compare.out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cli::exit_code::ok : cli::exit_code::usage;
    }

    try {
        if (*gen_cmd)
            return cli::cmd_gen_data(gen, std::cout, std::cerr);
        if (*train_cmd)
            return cli::cmd_train(train, std::cout, std::cerr);
        if (*eval_cmd)
            return cli::cmd_eval(eval, std::cout, std::cerr);
        if (*explain_cmd)
            return cli::cmd_explain(explain, std::cout, std::cerr);
        if (*curves_cmd) {
            curves.filter = fuzzyduo::parse_filter_kind(curves_filter);
            return cli::cmd_curves(curves, std::cout, std::cerr);
        }
        if (*compare_cmd) {
            compare.family_a = fuzzyduo::parse_mf_family(family_a);
            compare.family_b = fuzzyduo::parse_mf_family(family_b);
            return cli::cmd_compare(compare, std::cout, std::cerr);
        }
    } catch (const fuzzyduo::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::exit_code::usage;
    }
    return cli::exit_code::usage;
}
