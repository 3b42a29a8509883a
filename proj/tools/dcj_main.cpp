#include <iostream>

#include <CLI11.hpp>

#include "dcj/commands.hpp"
#include "dcj/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"reversible walker-in-network models: exact stationary laws, "
                 "validators, oracle checks and simulation"};
    app.set_version_flag("--version", std::string(dcj::kToolVersion));
    app.require_subcommand(1);

    dcj::cli::Options opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "model configuration (JSON)")
            ->required();
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--seed", opt.seed, "random seed (overrides config)");
        sub->add_option("--tol", opt.tol, "validation/DBE tolerance override");
        sub->add_option("--nmax", opt.nmax, "per-site task cap override");
        sub->add_option("--ymax", opt.ymax, "per-site walker cap override");
        return sub;
    };

    auto* validate = add_common(app.add_subcommand("validate", "check symmetry conditions"));
    auto* stationary =
        add_common(app.add_subcommand("stationary", "evaluate the stationary law"));
    auto* verify = add_common(
        app.add_subcommand("verify", "detailed balance and linear-solve cross-check"));
    auto* simulate = add_common(app.add_subcommand("simulate", "exact-clock simulation"));
    simulate->add_option("--events", opt.events, "event budget per replica");
    simulate->add_option("--time", opt.time_budget, "time budget per replica");
    simulate->add_option("--replicas", opt.replicas, "number of independent replicas");
    auto* report = add_common(app.add_subcommand("report", "one-shot machine-readable report"));

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) return dcj::cli::cmd_validate(opt, std::cout);
    if (stationary->parsed()) return dcj::cli::cmd_stationary(opt, std::cout);
    if (verify->parsed()) return dcj::cli::cmd_verify(opt, std::cout);
    if (simulate->parsed()) return dcj::cli::cmd_simulate(opt, std::cout);
    if (report->parsed()) return dcj::cli::cmd_report(opt, std::cout);
    return 2;
}
