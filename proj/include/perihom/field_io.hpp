#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "perihom/cell_solver.hpp"
#include "perihom/effective.hpp"
#include "perihom/eps_experiment.hpp"
#include "perihom/mc_oracle.hpp"

namespace perihom {

using Json = nlohmann::ordered_json;

Json to_json(const Eigen::MatrixXd& m);
Json to_json(const Eigen::VectorXd& v);
Json to_json(const TorusGrid& grid);
Json to_json(const PeriodicSolveReport& report);
/// { "a_hat", "a_eff", "min_eig", "grid" }.
Json to_json(const EffectiveMatrix& e);
/// { "a_mc", "se", "accept_rate", "paths", ... }.
Json to_json(const MonteCarloResult& r);
Json to_json(const SweepResult& r);

/// Columns s,xi,value, one row per space-time node (d = 1 only).
void write_field_csv(const std::filesystem::path& path, const SpaceTimeField& field);
/// Text header `perihom-field v1 d N Nt` and a newline, then N^d * Nt
/// little-endian doubles in storage order.
void write_field_binary(const std::filesystem::path& path, const SpaceTimeField& field);
SpaceTimeField read_field_binary(const std::filesystem::path& path);
/// Box snapshots in the same layout with N = Nx and Nt = number of snapshots.
void write_trajectory_binary(const std::filesystem::path& path, const Trajectory& trajectory);

/// Header `epsilon,sup_error,final_error,residual,seconds`.
void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result);
/// Whitespace-separated epsilon, sup_error, final_error, residual for gnuplot.
void write_sweep_dat(const std::filesystem::path& path, const SweepResult& result);

void write_json(const std::filesystem::path& path, const Json& j);
/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace perihom
