#include "perihom/field_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "perihom/errors.hpp"

namespace perihom {

namespace {

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, mode);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    return out;
}

void write_doubles(std::ofstream& out, std::span<const double> values) {
    static_assert(std::endian::native == std::endian::little, "field binaries assume a little-endian host");
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Json to_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

Json to_json(const Eigen::VectorXd& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Json to_json(const TorusGrid& grid) { return {{"d", grid.dimension}, {"N", grid.N}, {"Nt", grid.Nt}}; }

Json to_json(const PeriodicSolveReport& r) {
    return {{"method", r.method},
            {"iterations", r.iterations},
            {"residual", r.residual},
            {"compatibility_defect", r.compatibility_defect},
            {"solution_mean", r.solution_mean},
            {"contraction", r.contraction}};
}

Json to_json(const EffectiveMatrix& e) {
    return {{"a_hat", to_json(e.a_hat)},
            {"a_eff", to_json(e.a_eff)},
            {"min_eig", e.min_eigenvalue},
            {"grid", {{"N", e.N}, {"Nt", e.Nt}, {"truncation_radius", e.truncation_radius}}}};
}

Json to_json(const MonteCarloResult& r) {
    return {{"a_mc", to_json(r.a_mc)},   {"se", to_json(r.se)},
            {"drift", to_json(r.drift)}, {"drift_se", to_json(r.drift_se)},
            {"accept_rate", r.accept_rate}, {"paths", r.paths},
            {"proposals", r.proposals}};
}

Json to_json(const SweepResult& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"epsilon", row.epsilon},
                        {"sup_error", row.sup_error},
                        {"final_error", row.final_error},
                        {"residual", std::isnan(row.residual) ? Json(nullptr) : Json(row.residual)}});
    return {{"a_eff", to_json(r.a_eff)}, {"rows", rows}};
}

void write_field_csv(const std::filesystem::path& path, const SpaceTimeField& field) {
    if (field.grid.dimension != 1) throw ConfigError("CSV field export is for d = 1; use the binary format");
    auto out = open_out(path);
    out << "s,xi,value\n";
    const int N = field.grid.N;
    for (int n = 0; n < field.grid.Nt; ++n)
        for (int i = 0; i < N; ++i)
            out << format_double(n * field.grid.ds()) << ',' << format_double(i * field.grid.h()) << ','
                << format_double(field.values[static_cast<std::size_t>(n) * N + i]) << '\n';
}

void write_field_binary(const std::filesystem::path& path, const SpaceTimeField& field) {
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out << "perihom-field v1 " << field.grid.dimension << ' ' << field.grid.N << ' ' << field.grid.Nt << '\n';
    write_doubles(out, field.values);
}

SpaceTimeField read_field_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    std::string magic, version;
    TorusGrid grid;
    if (!(hs >> magic >> version >> grid.dimension >> grid.N >> grid.Nt) || magic != "perihom-field" || version != "v1")
        throw ConfigError("not a perihom-field v1 file: " + path.string());
    SpaceTimeField f(grid);
    in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(f.values.size() * sizeof(double)))
        throw ConfigError("truncated field file: " + path.string());
    return f;
}

void write_trajectory_binary(const std::filesystem::path& path, const Trajectory& trajectory) {
    if (trajectory.fields.empty()) throw ConfigError("empty trajectory");
    const BoxDomain& dom = trajectory.fields.front().domain;
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out << "perihom-field v1 " << dom.dimension << ' ' << dom.Nx << ' ' << trajectory.fields.size() << '\n';
    for (const auto& f : trajectory.fields) write_doubles(out, f.values);
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result) {
    auto out = open_out(path);
    out << "epsilon,sup_error,final_error,residual,seconds\n";
    for (const auto& r : result.rows)
        out << format_double(r.epsilon) << ',' << format_double(r.sup_error) << ',' << format_double(r.final_error)
            << ',' << format_double(r.residual) << ',' << format_double(r.seconds) << '\n';
}

void write_sweep_dat(const std::filesystem::path& path, const SweepResult& result) {
    auto out = open_out(path);
    out << "# epsilon sup_error final_error residual\n";
    for (const auto& r : result.rows)
        out << format_double(r.epsilon) << ' ' << format_double(r.sup_error) << ' ' << format_double(r.final_error)
            << ' ' << format_double(r.residual) << '\n';
}

void write_json(const std::filesystem::path& path, const Json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

}  // namespace perihom
