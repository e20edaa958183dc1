#pragma once

#include "miura/cases.hpp"
#include "miura/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace miura {

enum class OutputFormat { vtk, obj, csv };

const char* to_string(OutputFormat f);

/// Everything a run needs. Text form: INI-like sections
///   [case] [mesh] [solver] [output] [validate]
/// with `key = value` lines and `#` comments.
struct RunConfig {
    // [case]
    std::string case_name = "hyperboloid";
    double theta = 1.5707963267948966;
    double a = 0.675;
    double angle = 0.5235987755982988;
    RotationAxis axis = RotationAxis::x;
    double rho0 = 0.1;
    // custom case only
    Rect rect{0.0, 1.0, 0.0, 1.0};
    PeriodicAxis periodic = PeriodicAxis::none;
    Vec3 gx = Vec3(1.0, 0.0, 0.0);
    Vec3 gy = Vec3(0.0, 1.1547005383792517, 0.0);

    // [mesh]; 0 selects the per-case default
    int nx = 0;
    int ny = 0;
    int refine = 3;

    // [solver]
    SolverConfig solver;
    std::optional<BcMode> bc_mode;

    // [output]
    std::string out_dir = ".";
    std::vector<OutputFormat> formats{OutputFormat::vtk, OutputFormat::obj, OutputFormat::csv};

    // [validate]
    int samples = 1000;
    int fd_states = 10;
    unsigned seed = 12345;

    /// Throws ConfigError on inconsistent values.
    void validate() const;

    /// Sets one key from its text form; throws ConfigError for unknown keys or bad values.
    void set(const std::string& section, const std::string& key, const std::string& value);
    std::string get(const std::string& section, const std::string& key) const;

    static RunConfig parse(const std::string& text);
    static RunConfig load(const std::string& path);
    std::string serialize() const;

    /// Resolved mesh size for the selected case.
    std::pair<int, int> mesh_size() const;

    friend bool operator==(const RunConfig&, const RunConfig&);
};

inline const std::vector<std::string>& case_names()
{
    static const std::vector<std::string> names{"hyperboloid", "annulus", "axisymmetric", "deformed-hyperboloid",
                                                "custom"};
    return names;
}

std::vector<OutputFormat> parse_formats(const std::string& list);

/// Builds the case described by the config at mesh size (nx, ny).
CaseSpec make_case(const RunConfig& cfg, int nx, int ny);

} // namespace miura
