#include <functional>
#include <map>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
    using namespace perihom::cli;
    CLI::App app{"Homogenization of nonlocal convolution operators with space-time periodic coefficients"};
    app.require_subcommand(1);

    Overrides o;
    std::uint64_t seed = 0;
    int threads = 0;
    double perturb = 0.0;
    std::string out, grid, box, eps;

    const std::map<std::string, std::string> commands{
        {"validate", "check kernel and medium conditions"},
        {"corrector", "solve the first cell problem and export chi"},
        {"effective", "compute the effective matrix"},
        {"kappa", "solve the second cell problem and export kappa"},
        {"converge", "compare eps-scale and homogenized evolutions"},
        {"residual", "measure the residual of the corrected ansatz"},
        {"mc", "estimate the effective matrix by jump-process simulation"},
        {"demo", "run the full d = 1 pipeline with acceptance checks"},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory");
        sub->add_option("--seed", seed, "Monte Carlo seed");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--grid", grid, "cell grid N,Nt");
        sub->add_option("--box", box, "box L,Nx");
        sub->add_option("--eps", eps, "comma-separated epsilon list");
        sub->add_option("--perturb-aeff", perturb, "scale a_eff by (1 - F) for a negative control");
        subs[name] = sub;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    const auto* chosen = app.get_subcommands().front();
    auto given = [&](const char* flag) { return chosen->count(flag) > 0; };
    if (given("--out")) o.out = out;
    if (given("--seed")) o.seed = seed;
    if (given("--threads")) o.threads = threads;
    if (given("--grid")) o.grid = grid;
    if (given("--box")) o.box = box;
    if (given("--eps")) o.eps = eps;
    if (given("--perturb-aeff")) o.perturb_aeff = perturb;

    const std::string name = chosen->get_name();
    return guarded(name, [&] {
        const perihom::RunConfig c = resolve_config(o);
        if (name == "validate") return cmd_validate(c);
        if (name == "corrector") return cmd_corrector(c);
        if (name == "effective") return cmd_effective(c);
        if (name == "kappa") return cmd_kappa(c);
        if (name == "converge") return cmd_converge(c);
        if (name == "residual") return cmd_residual(c);
        if (name == "mc") return cmd_mc(c);
        return cmd_demo(c);
    });
}
