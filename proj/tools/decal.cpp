// Command-line driver: run, sweep and bootstrap experiments from a JSON config.

#include "decal/error.hpp"
#include "decal/io.hpp"
#include "decal/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

namespace {

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

decal::ExperimentConfig load(const Common& common)
{
    auto config = decal::load_config(common.config);
    if (common.seed) config.seed = *common.seed;
    if (!common.out.empty()) config.eval.out_dir = common.out;
    return config;
}

std::vector<double> parse_values(const std::string& list)
{
    std::vector<double> values;
    std::stringstream in(list);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) values.push_back(decal::io::parse_double(item, 0));
    if (values.empty()) throw decal::ConfigError("--values", "expected a comma-separated list of numbers");
    return values;
}

void add_common(CLI::App* cmd, Common& common)
{
    cmd->add_option("-c,--config", common.config, "Experiment config (JSON)")->required();
    cmd->add_option("--out", common.out, "Output directory (overrides eval.out_dir)");
    cmd->add_option("--seed", common.seed, "Master seed (overrides config)");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Train decision makers that correct decisions made under approximate posteriors"};
    app.require_subcommand(1);

    Common run_opts;
    auto* run = app.add_subcommand("run", "Run the full pipeline once");
    add_common(run, run_opts);

    Common sweep_opts;
    std::string param;
    std::string values;
    auto* sweep = app.add_subcommand("sweep", "Repeat the pipeline over values of one parameter");
    add_common(sweep, sweep_opts);
    sweep->add_option("--param", param, "lambda, B, S, alpha or gamma")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required();

    Common boot_opts;
    auto* boot = app.add_subcommand("bootstrap", "Build the bootstrap decision prior and write prior.csv");
    add_common(boot, boot_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const auto config = load(run_opts);
            const auto result = decal::run_experiment(config);
            decal::write_run_outputs(result, config, config.eval.out_dir);
            for (const auto& r : result.risk)
                std::cout << decal::to_string(r.split) << ' ' << r.method << " risk=" << r.risk << '\n';
        } else if (sweep->parsed()) {
            const auto config = load(sweep_opts);
            const auto p = decal::sweep_param_from_string(param);
            const auto rows = decal::run_sweep(config, p, parse_values(values), config.eval.out_dir);
            decal::io::write_atomic(config.eval.out_dir / "sweep.csv", decal::sweep_csv(p, rows));
            for (const auto& r : rows)
                if (!r.error.empty()) std::cerr << "sweep value " << r.param_value << " failed: " << r.error << '\n';
        } else if (boot->parsed()) {
            const auto config = load(boot_opts);
            const auto prior = decal::build_bootstrap_prior(config);
            decal::write_prior_csv(prior, config.eval.out_dir / "prior.csv");
            std::cout << "wrote " << (config.eval.out_dir / "prior.csv").string() << '\n';
        }
    } catch (const decal::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const decal::InputError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const decal::StageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
