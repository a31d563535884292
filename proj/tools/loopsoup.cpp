#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv)
{
    using namespace loopsoup::cli;
    Options opt;
    CLI::App app{"Loop soups, spanning trees and their interactions on weighted graphs"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    auto common = [&](CLI::App* sub) {
        sub->add_option("--graph", opt.graph, "Graph JSON file");
        sub->add_option("--seed", opt.seed, "Base seed")->capture_default_str();
        sub->add_option("--samples", opt.samples,
                        "Samples, or sweeps after burn-in; 0 means 1 for sample, 100000 for verify, 10000 for gibbs")
            ->capture_default_str();
        sub->add_option("--replicas", opt.replicas, "Independent replicas, one RNG stream each")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        sub->add_option("--out", opt.out, "Output file (stdout if empty)");
        sub->add_option("--format", opt.format, "Output format; jsonl for sample and gibbs, csv for verify by default")
            ->capture_default_str()
            ->check(CLI::IsMember({"csv", "jsonl"}));
    };
    auto interaction = [&](CLI::App* sub) {
        sub->add_option("--beta", opt.beta, "Off-tree crossing penalty in (0,1)")->capture_default_str();
        sub->add_option("--b", opt.b, "Occupation penalty off the root, > 0")->capture_default_str();
        sub->add_option("--burnin", opt.burnin, "Gibbs burn-in sweeps")->capture_default_str();
    };
    auto covering = [&](CLI::App* sub) {
        sub->add_option("--group", opt.group, "Group JSON file");
        sub->add_option("--connection", opt.connection, "Connection JSON file (needs --group)");
        sub->add_option("--gamma", opt.gamma, "Tree-edge law for random connections")
            ->capture_default_str()
            ->check(CLI::IsMember({"uniform", "delta"}));
    };

    auto* green = app.add_subcommand("green", "Print G, det(M - C) and lambda as CSV");
    green->add_option("--graph", opt.graph, "Graph JSON file")->required();
    green->add_option("--out", opt.out, "Output file (stdout if empty)");

    auto* sample = app.add_subcommand("sample", "Draw trees, soups or pairs");
    common(sample);
    sample->add_option("--kind", opt.kind, "tree, soup, pair or pair-extended")
        ->required()
        ->check(CLI::IsMember({"tree", "soup", "pair", "pair-extended"}));

    auto* verify = app.add_subcommand("verify", "Compare Monte Carlo estimates with closed forms");
    common(verify);
    interaction(verify);
    covering(verify);
    verify->add_option("--identity", opt.identity, "Identity suite")
        ->required()
        ->check(CLI::IsMember({"eq1", "eq3", "thm1", "bstar", "eq4", "projection", "zphi", "tree", "coupling"}));
    verify->add_option("--sampler", opt.sampler, "Soup source for eq1 and tree")
        ->capture_default_str()
        ->check(CLI::IsMember({"soup", "pair-extended"}));

    auto* gibbs = app.add_subcommand("gibbs", "Run an interaction Gibbs chain");
    common(gibbs);
    interaction(gibbs);
    covering(gibbs);
    gibbs->add_option("--kind", opt.kind, "beta, bstar or phi")
        ->required()
        ->check(CLI::IsMember({"beta", "bstar", "phi"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    std::string body;
    int code = kExitPass;
    try {
        CommandResult result;
        if (*green)
            result = cmd_green(opt);
        else if (*sample)
            result = cmd_sample(opt);
        else if (*verify)
            result = cmd_verify(opt);
        else
            result = cmd_gibbs(opt);
        body = std::move(result.output);
        code = result.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    if (opt.out.empty()) {
        std::fwrite(body.data(), 1, body.size(), stdout);
        std::fflush(stdout);
    } else {
        std::ofstream f(opt.out, std::ios::binary);
        if (!f) {
            std::cerr << "error: cannot write '" << opt.out << "'\n";
            return kExitUsage;
        }
        f << body;
    }
    return code;
}
