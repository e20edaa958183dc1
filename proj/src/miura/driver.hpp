#pragma once

#include "miura/analysis.hpp"
#include "miura/config.hpp"
#include "miura/recovery.hpp"
#include "miura/solver.hpp"

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace miura {

/// Result of one full pipeline run: initial guess, Newton, recovery, diagnostics.
struct SolveOutcome {
    CaseSpec spec;
    std::shared_ptr<const Mesh> mesh;
    std::shared_ptr<const Discretization> disc;
    std::shared_ptr<const SurfaceRecovery> recovery;
    State state;
    NewtonReport report;
    SurfaceField surface;
    ConstraintFields constraints;
    HypothesisReport hypothesis;
    double curl_l2 = 0.0;
    double recovery_l2 = 0.0;
    double normal_equation_residual = 0.0;
    std::optional<ErrorNorms> gradient_error;
    std::optional<ErrorNorms> surface_error;
};

/// Throws ValidationError if the boundary data fails the hypothesis check.
SolveOutcome solve_case(const CaseSpec& spec, const SolverConfig& solver, int hypothesis_samples = 1000);

std::string summary_json(const SolveOutcome& out);

/// Writes solution.vtk, surface.obj and newton.csv (as selected) into `dir`.
std::vector<std::string> write_solution_outputs(const SolveOutcome& out, const std::string& dir,
                                                const std::vector<OutputFormat>& formats);

struct ConvergenceRun {
    ConvergenceTable table;
    std::vector<SolveOutcome> levels;
    bool all_converged = true;
};

/// Solves on meshes (nx 2^k, ny 2^k), k < refine. Needs an exact solution.
ConvergenceRun run_convergence(const RunConfig& cfg, bool keep_levels = false);

std::string convergence_json(const ConvergenceRun& run);

struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<Check> checks;

    bool passed() const;
    std::string json() const;
};

struct OdeConvergence {
    double rho_adaptive = 0.0;
    double rho_reference = 0.0;
    double difference = 0.0;
    double order = 0.0;
    std::size_t adaptive_steps = 0;
};

/// rho(y_end) from the adaptive integrator against a fixed-step run with twice
/// as many steps, plus the observed order over fixed runs with n, 2n, 4n steps.
OdeConvergence ode_self_convergence(double rho0, double y_end, int base_steps = 32);

/// max over `states` random states of ||J d - central FD|| / ||J d||.
double jacobian_fd_error(const Discretization& disc, const BoundaryData& bc, double eta, int states, unsigned seed,
                         double step = 1e-6);

ValidationReport run_validate(const RunConfig& cfg);

/// Mesh-only VTK of the configured case.
void export_mesh(const RunConfig& cfg, const std::string& path);

void ensure_directory(const std::string& dir);

} // namespace miura
