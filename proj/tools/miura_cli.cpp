#include "miura/miura.h"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;
constexpr int kExitValidation = 3;

struct Overrides {
    std::string config_path;
    std::map<std::pair<std::string, std::string>, std::string> values;
    bool quiet = false;
};

struct ConfigDeleter {
    void operator()(miura_config* c) const { miura_config_destroy(c); }
};
using ConfigPtr = std::unique_ptr<miura_config, ConfigDeleter>;

int exit_for(miura_status s)
{
    if (s == MIURA_OK) return kExitOk;
    return s == MIURA_ERR_VALIDATION ? kExitValidation : kExitUsage;
}

int report_error(miura_status s)
{
    std::cerr << "error: " << miura_status_string(s) << ": " << miura_last_error() << "\n";
    return exit_for(s);
}

template <class Getter>
std::string fetch_string(Getter&& get)
{
    size_t needed = 0;
    if (get(nullptr, 0, &needed) != MIURA_OK) return {};
    std::string s(needed, '\0');
    if (get(s.data(), s.size(), &needed) != MIURA_OK) return {};
    s.resize(needed - 1);
    return s;
}

std::string config_get(const miura_config* cfg, const char* section, const char* key)
{
    return fetch_string([&](char* b, size_t c, size_t* n) { return miura_config_get(cfg, section, key, b, c, n); });
}

miura_status build_config(const Overrides& o, ConfigPtr& out)
{
    miura_config* raw = nullptr;
    miura_status s = o.config_path.empty() ? miura_config_create(&raw) : miura_config_load(o.config_path.c_str(), &raw);
    if (s != MIURA_OK) return s;
    out.reset(raw);
    for (const auto& [k, v] : o.values) {
        s = miura_config_set(raw, k.first.c_str(), k.second.c_str(), v.c_str());
        if (s != MIURA_OK) return s;
    }
    return miura_config_validate(raw);
}

bool write_text(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    f << text << "\n";
    return static_cast<bool>(f);
}

std::string out_path(const miura_config* cfg, const std::string& name)
{
    const std::string dir = config_get(cfg, "output", "dir");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    return (std::filesystem::path(dir) / name).string();
}

void add_common(CLI::App* cmd, Overrides& o)
{
    auto bind = [&o, cmd](const char* flag, const char* section, const char* key, const char* help) {
        cmd->add_option_function<std::string>(
               flag, [&o, section, key](const std::string& v) { o.values[{section, key}] = v; }, help)
            ->type_name("VALUE");
    };
    cmd->add_option("--config", o.config_path, "Config file ([case] [mesh] [solver] [output] [validate])")
        ->check(CLI::ExistingFile);
    bind("--case", "case", "name", "hyperboloid|annulus|axisymmetric|deformed-hyperboloid|custom");
    bind("--theta", "case", "theta", "Hyperboloid fold angle theta");
    bind("--a", "case", "a", "Annulus slope a");
    bind("--angle", "case", "angle", "Rotation angle of the deformed hyperboloid");
    bind("--axis", "case", "axis", "Rotation axis x|z");
    bind("--rho0", "case", "rho0", "Axisymmetric initial radius");
    bind("--nx", "mesh", "nx", "Cells in x");
    bind("--ny", "mesh", "ny", "Cells in y");
    bind("--refine", "mesh", "refine", "Number of nested meshes (convergence)");
    bind("--eta", "solver", "eta", "Penalty parameter");
    bind("--tol", "solver", "tol", "Relative residual tolerance");
    bind("--max-iter", "solver", "max_iter", "Newton iteration cap");
    bind("--norm", "solver", "norm", "Stopping norm h1|euclidean");
    bind("--linearization", "solver", "linearization", "newton|picard");
    bind("--line-search", "solver", "line_search", "Backtracking by halving (true|false)");
    bind("--bc-mode", "solver", "bc_mode", "strong|weak|default");
    bind("--out", "output", "dir", "Output directory");
    bind("--format", "output", "formats", "Comma-separated subset of vtk,obj,csv");
    bind("--samples", "validate", "samples", "Boundary samples for the hypothesis check");
    bind("--seed", "validate", "seed", "Seed of the random derivative checks");
    cmd->add_flag("--quiet,-q", o.quiet, "Only print errors");
}

int cmd_solve(const Overrides& o)
{
    ConfigPtr cfg;
    if (miura_status s = build_config(o, cfg); s != MIURA_OK) return report_error(s);
    miura_run* run = nullptr;
    if (miura_status s = miura_solve(cfg.get(), &run); s != MIURA_OK) return report_error(s);
    std::unique_ptr<miura_run, void (*)(miura_run*)> guard(run, miura_run_destroy);
    const std::string dir = config_get(cfg.get(), "output", "dir");
    if (miura_status s = miura_run_write(run, dir.c_str(), nullptr); s != MIURA_OK) return report_error(s);
    const bool ok = miura_run_converged(run) != 0;
    if (!o.quiet) {
        std::printf("case %s: %zu dofs, %d Newton iterations, %s\n", config_get(cfg.get(), "case", "name").c_str(),
                    miura_run_dofs(run), miura_run_iterations(run), ok ? "converged" : "NOT converged");
        std::printf("omega' fraction %.6f; summary in %s/summary.json\n", miura_run_omega_prime_fraction(run),
                    dir.c_str());
    }
    if (!ok) {
        std::cerr << "error: Newton did not converge within the iteration cap\n";
        return kExitNotConverged;
    }
    return kExitOk;
}

int cmd_convergence(const Overrides& o)
{
    ConfigPtr cfg;
    if (miura_status s = build_config(o, cfg); s != MIURA_OK) return report_error(s);
    miura_table* table = nullptr;
    if (miura_status s = miura_convergence(cfg.get(), &table); s != MIURA_OK) return report_error(s);
    std::unique_ptr<miura_table, void (*)(miura_table*)> guard(table, miura_table_destroy);
    const std::string csv = out_path(cfg.get(), "convergence.csv");
    if (miura_status s = miura_table_write_csv(table, csv.c_str()); s != MIURA_OK) return report_error(s);
    const std::string json =
        fetch_string([&](char* b, size_t c, size_t* n) { return miura_table_summary_json(table, b, c, n); });
    write_text(out_path(cfg.get(), "convergence.json"), json);
    if (!o.quiet) {
        std::printf("%10s %9s %5s %12s %7s %12s %7s\n", "h", "dofs", "iters", "H1 err", "rate", "L2 err", "rate");
        for (size_t i = 0; i < miura_table_rows(table); ++i) {
            miura_table_row r{};
            miura_table_row_get(table, i, &r);
            std::printf("%10.4g %9zu %5d %12.4e %7.3f %12.4e %7.3f\n", r.h, r.dofs, r.newton_iters, r.h1_err, r.h1_rate,
                        r.l2_err, r.l2_rate);
        }
        std::printf("table written to %s\n", csv.c_str());
    }
    if (!miura_table_converged(table)) {
        std::cerr << "error: Newton did not converge on every mesh\n";
        return kExitNotConverged;
    }
    return kExitOk;
}

int cmd_validate(const Overrides& o)
{
    ConfigPtr cfg;
    if (miura_status s = build_config(o, cfg); s != MIURA_OK) return report_error(s);
    miura_report* rep = nullptr;
    if (miura_status s = miura_validate(cfg.get(), &rep); s != MIURA_OK) return report_error(s);
    std::unique_ptr<miura_report, void (*)(miura_report*)> guard(rep, miura_report_destroy);
    for (size_t i = 0; i < miura_report_count(rep); ++i) {
        miura_check c{};
        miura_report_check(rep, i, &c);
        if (!o.quiet || !c.passed) {
            std::printf("%-4s %-14s value %.3e tolerance %.1e  %s\n", c.passed ? "PASS" : "FAIL", c.name, c.value,
                        c.tolerance, c.detail);
        }
    }
    const std::string json = fetch_string([&](char* b, size_t c, size_t* n) { return miura_report_json(rep, b, c, n); });
    write_text(out_path(cfg.get(), "validate.json"), json);
    return miura_report_passed(rep) ? kExitOk : kExitValidation;
}

int cmd_export(const Overrides& o, const std::string& what)
{
    if (what == "solution") return cmd_solve(o);
    ConfigPtr cfg;
    if (miura_status s = build_config(o, cfg); s != MIURA_OK) return report_error(s);
    const std::string path = out_path(cfg.get(), "mesh.vtk");
    if (miura_status s = miura_export_mesh(cfg.get(), path.c_str()); s != MIURA_OK) return report_error(s);
    write_text(out_path(cfg.get(), "export.json"), "{\"files\": [\"" + path + "\"]}");
    if (!o.quiet) std::printf("mesh written to %s\n", path.c_str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Miura-surface finite-element solver"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(miura_version()));

    Overrides solve_o, conv_o, val_o, exp_o;
    std::string what = "solution";
    auto* solve = app.add_subcommand("solve", "Solve one case and write diagnostics and exports");
    add_common(solve, solve_o);
    auto* conv = app.add_subcommand("convergence", "Error table over nested meshes (needs an exact solution)");
    add_common(conv, conv_o);
    auto* val = app.add_subcommand("validate", "Boundary-data, ODE and Jacobian checks");
    add_common(val, val_o);
    auto* exp = app.add_subcommand("export", "Write the mesh or a solved case");
    add_common(exp, exp_o);
    exp->add_option("--what", what, "mesh|solution")->check(CLI::IsMember({"mesh", "solution"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (*solve) return cmd_solve(solve_o);
    if (*conv) return cmd_convergence(conv_o);
    if (*val) return cmd_validate(val_o);
    return cmd_export(exp_o, what);
}
