#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "perihom/cell_solver.hpp"
#include "perihom/eps_experiment.hpp"
#include "perihom/field_io.hpp"
#include "perihom/mc_oracle.hpp"

namespace perihom {

struct RunConfig {
    Json source;
    int dimension = 1;
    Kernel kernel = Kernel::gaussian(1, 0.25);
    Medium medium = Medium::constant(1, 1.0, 1.0, 1.0);
    TorusGrid grid{1, 64, 64};
    CellOptions cell;
    SweepConfig sweep;
    WalkConfig walk;
    /// Sample points per axis for the C3/C5 audit in `validate`.
    int validation_density = 24;
    double perturb_aeff = 0.0;
    std::filesystem::path output = "out";
};

/// Builds a kernel from {"family": ..., "sigma" | "radius" | "length" | "radii"+"values"}.
Kernel parse_kernel(const Json& j, int dimension);
/// Builds a medium from {"form": "constant" | "time_only" | "separable_sum" | "tabulated", ...}.
Medium parse_medium(const Json& j, int dimension);

/// Throws ConfigError on unknown keys, wrong types or invalid values.
RunConfig parse_config(const Json& j);
RunConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a of the compact JSON dump, as 16 hex digits.
std::string config_hash(const Json& j);

}  // namespace perihom
