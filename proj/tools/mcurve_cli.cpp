#include <cstdio>
#include <functional>
#include <string>

#include <CLI11.hpp>

#include "mcurve/cli.hpp"

namespace {

struct Overrides {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> k;
    std::optional<int> budget;
    std::optional<int> threads;
};

void add_flags(CLI::App* sub, Overrides& o)
{
    sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--k", o.k, "curve dimension");
    sub->add_option("--budget", o.budget, "main sample budget of the subcommand");
    sub->add_option("--threads", o.threads, "worker threads (results do not depend on it)");
}

} // namespace

int main(int argc, char** argv)
{
    using namespace mcurve::cli;
    CLI::App app{"Numerical experiments on Fourier restriction to the moment curve"};
    app.require_subcommand(1);
    Overrides o;

    struct Entry {
        const char* name;
        const char* help;
        std::function<int(const RunConfig&)> run;
        int RunConfig::*budget;
    };
    const Entry entries[] = {
        {"frenet", "Frenet frames and orthonormality residuals on a t-grid", cmd_frenet, &RunConfig::frenet_points},
        {"partition-check", "calibrate C0 and check the partition of unity", cmd_partition_check,
         &RunConfig::partition_samples},
        {"eta-norms", "L2, total L1 and L^p' norms of the smoothed tube indicator over the ladder", cmd_eta_norms,
         &RunConfig::mc_budget},
        {"threshold-table", "critical exponents and vanishing certificates", cmd_threshold_table, nullptr},
        {"ack", "dyadic shell masses of the oscillatory integral", cmd_ack, &RunConfig::shell_budget},
    };
    std::vector<CLI::App*> subs;
    for (const Entry& e : entries) {
        subs.push_back(app.add_subcommand(e.name, e.help));
        add_flags(subs.back(), o);
    }
    CLI11_PARSE(app, argc, argv);

    try {
        for (std::size_t i = 0; i < subs.size(); ++i) {
            if (!subs[i]->parsed()) continue;
            RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
            if (!o.out.empty()) cfg.out = o.out;
            if (o.seed) cfg.seed = *o.seed;
            if (o.k) cfg.k = *o.k;
            if (o.threads) cfg.threads = *o.threads;
            if (o.budget && entries[i].budget) cfg.*entries[i].budget = *o.budget;
            return entries[i].run(cfg);
        }
    } catch (const mcurve::UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 1;
}
