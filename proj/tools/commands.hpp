#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "perihom/config.hpp"

namespace perihom::cli {

enum ExitCode : int { ok = 0, failure = 1, config_error = 2, solver_error = 3, acceptance_failure = 4 };

struct Overrides {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> grid;
    std::optional<std::string> box;
    std::optional<std::string> eps;
    std::optional<double> perturb_aeff;
};

/// Loads the config file and applies command-line overrides on top of it.
RunConfig resolve_config(const Overrides& o);

int cmd_validate(const RunConfig& c);
int cmd_corrector(const RunConfig& c);
int cmd_effective(const RunConfig& c);
int cmd_kappa(const RunConfig& c);
int cmd_converge(const RunConfig& c);
int cmd_residual(const RunConfig& c);
int cmd_mc(const RunConfig& c);
int cmd_demo(const RunConfig& c);

/// Runs `body` and maps library exceptions to exit codes.
int guarded(const std::string& command, const std::function<int()>& body);

}  // namespace perihom::cli
