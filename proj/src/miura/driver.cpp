#include "miura/driver.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>

namespace miura {

namespace {

using nlohmann::json;

json newton_json(const NewtonReport& r)
{
    return json{{"iterations", r.iterations},
                {"converged", r.converged},
                {"final_residual", r.final_residual},
                {"residual_norms", r.residual_norms}};
}

json errors_json(const std::optional<ErrorNorms>& e)
{
    if (!e) return nullptr;
    return json{{"l2", e->l2}, {"h1", e->h1}};
}

std::string join(const std::string& dir, const std::string& name)
{
    return (std::filesystem::path(dir) / name).string();
}

} // namespace

void ensure_directory(const std::string& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory " + dir);
}

SolveOutcome solve_case(const CaseSpec& spec, const SolverConfig& solver, int hypothesis_samples)
{
    solver.validate();
    SolveOutcome out;
    out.spec = spec;
    out.hypothesis = validate_hypothesis(spec.bc, hypothesis_samples);
    if (out.hypothesis.max_violation() > spec.hypothesis_tolerance) {
        std::ostringstream msg;
        msg << "boundary data violates " << out.hypothesis.worst() << " by " << out.hypothesis.max_violation()
            << " (tolerance " << spec.hypothesis_tolerance << ")";
        throw ValidationError(msg.str());
    }
    out.mesh = spec.build_mesh();
    auto disc = std::make_shared<Discretization>(out.mesh);
    out.disc = disc;
    const State s0 = initial_guess(*disc, spec.bc, solver.eta);
    NewtonResult nr = newton_solve(*disc, spec.bc, solver, s0);
    out.state = std::move(nr.state);
    out.report = std::move(nr.report);

    const DofMap& w = disc->gradient_space();
    auto rec = std::make_shared<SurfaceRecovery>(out.mesh);
    out.recovery = rec;
    out.surface = rec->recover(w, out.state.g);
    out.normal_equation_residual = rec->normal_equation_residual(w, out.state.g, out.surface);
    out.constraints = constraint_fields(w, out.state.g);
    out.curl_l2 = curl_mismatch_l2(w, out.state.g);
    out.recovery_l2 = recovery_mismatch_l2(w, out.state.g, rec->space(), out.surface);
    if (spec.exact) {
        out.gradient_error = error_norms(w, out.state.g, *spec.exact);
        out.surface_error = miura::surface_error(rec->space(), out.surface, *spec.exact);
    }
    return out;
}

std::string summary_json(const SolveOutcome& out)
{
    const ConstraintFields& cf = out.constraints;
    json j;
    j["case"] = out.spec.name;
    j["mesh"] = {{"nx", out.spec.nx},
                 {"ny", out.spec.ny},
                 {"periodic", to_string(out.spec.periodic)},
                 {"vertices", out.mesh->num_vertices()},
                 {"triangles", out.mesh->num_triangles()},
                 {"h", out.mesh->h()}};
    j["dofs"] = out.disc->size();
    j["bc_mode"] = to_string(out.spec.bc.mode);
    j["newton"] = newton_json(out.report);
    j["hypothesis"] = {{"max_violation", out.hypothesis.max_violation()},
                       {"orthogonality", out.hypothesis.orthogonality},
                       {"norm_identity", out.hypothesis.norm_identity}};
    j["constraints"] = {{"omega_prime_fraction", cf.omega_prime_fraction()},
                        {"omega_prime_triangles", cf.omega_prime_triangles},
                        {"folded_triangles", cf.folded_triangles},
                        {"sup_u", cf.sup_u},
                        {"sup_v", cf.sup_v},
                        {"undefined_v", cf.undefined_v},
                        {"max_gx2", cf.max_gx2},
                        {"max_gy2", cf.max_gy2}};
    j["curl_mismatch_l2"] = out.curl_l2;
    j["recovery_mismatch_l2"] = out.recovery_l2;
    j["normal_equation_residual"] = out.normal_equation_residual;
    j["gradient_error"] = errors_json(out.gradient_error);
    j["surface_error"] = errors_json(out.surface_error);
    return j.dump(2);
}

std::vector<std::string> write_solution_outputs(const SolveOutcome& out, const std::string& dir,
                                                const std::vector<OutputFormat>& formats)
{
    ensure_directory(dir);
    std::vector<std::string> written;
    for (OutputFormat f : formats) {
        std::string path;
        switch (f) {
        case OutputFormat::vtk: {
            path = join(dir, "solution.vtk");
            const VertexFields vf = vertex_fields(out.disc->gradient_space(), out.state.g, out.constraints);
            write_file(path, [&](std::ostream& os) { write_vtk(os, *out.mesh, &vf); });
            break;
        }
        case OutputFormat::obj:
            path = join(dir, "surface.obj");
            write_file(path, [&](std::ostream& os) { write_obj(os, *out.mesh, out.recovery->space(), out.surface); });
            break;
        case OutputFormat::csv:
            path = join(dir, "newton.csv");
            write_file(path, [&](std::ostream& os) {
                os << "iteration,residual,relative\n";
                for (std::size_t k = 0; k < out.report.residual_norms.size(); ++k) {
                    os << k << "," << format_double(out.report.residual_norms[k]) << ","
                       << format_double(out.report.relative(k)) << "\n";
                }
            });
            break;
        }
        written.push_back(path);
    }
    const std::string summary = join(dir, "summary.json");
    write_file(summary, [&](std::ostream& os) { os << summary_json(out) << "\n"; });
    written.push_back(summary);
    return written;
}

ConvergenceRun run_convergence(const RunConfig& cfg, bool keep_levels)
{
    cfg.validate();
    const auto [nx, ny] = cfg.mesh_size();
    ConvergenceRun run;
    for (int k = 0; k < cfg.refine; ++k) {
        const CaseSpec cs = make_case(cfg, nx << k, ny << k);
        if (!cs.exact) throw ConfigError("case '" + cfg.case_name + "' has no exact solution");
        SolveOutcome out = solve_case(cs, cfg.solver, cfg.samples);
        ConvergenceRow row;
        row.h = out.mesh->h();
        row.dofs = out.disc->size();
        row.triangles = out.mesh->num_triangles();
        row.newton_iters = out.report.iterations;
        row.h1_err = out.gradient_error->h1;
        row.l2_err = out.gradient_error->l2;
        run.table.add(row);
        run.all_converged = run.all_converged && out.report.converged;
        if (keep_levels) run.levels.push_back(std::move(out));
    }
    return run;
}

std::string convergence_json(const ConvergenceRun& run)
{
    json rows = json::array();
    for (const auto& r : run.table.rows) {
        rows.push_back({{"h", r.h},
                        {"dofs", r.dofs},
                        {"triangles", r.triangles},
                        {"newton_iters", r.newton_iters},
                        {"h1_err", r.h1_err},
                        {"h1_rate", r.h1_rate ? json(*r.h1_rate) : json(nullptr)},
                        {"l2_err", r.l2_err},
                        {"l2_rate", r.l2_rate ? json(*r.l2_rate) : json(nullptr)}});
    }
    return json{{"rows", rows}, {"all_converged", run.all_converged}}.dump(2);
}

bool ValidationReport::passed() const
{
    for (const Check& c : checks) {
        if (!c.passed) return false;
    }
    return !checks.empty();
}

std::string ValidationReport::json() const
{
    nlohmann::json arr = nlohmann::json::array();
    for (const Check& c : checks) {
        arr.push_back({{"name", c.name},
                       {"value", c.value},
                       {"tolerance", c.tolerance},
                       {"passed", c.passed},
                       {"detail", c.detail}});
    }
    return nlohmann::json{{"checks", arr}, {"passed", passed()}}.dump(2);
}

OdeConvergence ode_self_convergence(double rho0, double y_end, int base_steps)
{
    OdeConvergence oc;
    const OdeSolution adaptive = integrate_rho(rho0, 0.0, y_end);
    oc.adaptive_steps = adaptive.steps();
    oc.rho_adaptive = adaptive(y_end).rho;
    const int ref_steps = static_cast<int>(2 * adaptive.steps());
    oc.rho_reference = integrate_rho_fixed(rho0, 0.0, y_end, ref_steps)(y_end).rho;
    oc.difference = std::abs(oc.rho_adaptive - oc.rho_reference);
    const double r1 = integrate_rho_fixed(rho0, 0.0, y_end, base_steps)(y_end).rho;
    const double r2 = integrate_rho_fixed(rho0, 0.0, y_end, 2 * base_steps)(y_end).rho;
    const double r4 = integrate_rho_fixed(rho0, 0.0, y_end, 4 * base_steps)(y_end).rho;
    oc.order = std::log2(std::abs(r1 - r2) / std::abs(r2 - r4));
    return oc;
}

double jacobian_fd_error(const Discretization& disc, const BoundaryData& bc, double eta, int states, unsigned seed,
                         double step)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double worst = 0.0;
    for (int s = 0; s < states; ++s) {
        Eigen::VectorXd x(disc.size()), d(disc.size());
        for (Index i = 0; i < disc.size(); ++i) x[i] = 1.5 * uni(rng);
        for (Index i = 0; i < disc.size(); ++i) d[i] = uni(rng);
        d /= d.norm();
        const SparseMatrix jac = assemble_jacobian(disc, bc, disc.unpack(x), eta);
        const Eigen::VectorXd jd = jac * d;
        const Eigen::VectorXd fp = assemble_residual(disc, bc, disc.unpack(x + step * d), eta);
        const Eigen::VectorXd fm = assemble_residual(disc, bc, disc.unpack(x - step * d), eta);
        const Eigen::VectorXd fd = (fp - fm) / (2.0 * step);
        worst = std::max(worst, (jd - fd).norm() / jd.norm());
    }
    return worst;
}

ValidationReport run_validate(const RunConfig& cfg)
{
    cfg.validate();
    ValidationReport rep;
    const auto [nx, ny] = cfg.mesh_size();
    const CaseSpec cs = make_case(cfg, nx, ny);

    const HypothesisReport h = validate_hypothesis(cs.bc, cfg.samples);
    Check hc{"hypothesis", h.max_violation(), cs.hypothesis_tolerance, h.max_violation() <= cs.hypothesis_tolerance,
             ""};
    if (!hc.passed) hc.detail = std::string("violated: ") + h.worst();
    else hc.detail = std::to_string(h.samples) + " boundary samples";
    rep.checks.push_back(hc);

    const double rho0 = cfg.case_name == "axisymmetric" ? cfg.rho0 : 0.1;
    const OdeConvergence oc = ode_self_convergence(rho0, 4.0);
    rep.checks.push_back({"ode_reference", oc.difference, 1e-8, oc.difference <= 1e-8,
                          std::to_string(oc.adaptive_steps) + " adaptive steps"});
    rep.checks.push_back({"ode_order", oc.order, 4.8, oc.order >= 4.8, "fixed steps 32/64/128"});

    // Coarse copy of the configured domain for the derivative check.
    CaseSpec coarse = cs;
    coarse.nx = cs.periodic == PeriodicAxis::x ? 4 : 2;
    coarse.ny = cs.periodic == PeriodicAxis::x ? 2 : 4;
    const Discretization disc(coarse.build_mesh());
    const double fd = jacobian_fd_error(disc, coarse.bc, cfg.solver.eta, cfg.fd_states, cfg.seed);
    rep.checks.push_back({"jacobian_fd", fd, 1e-6, fd <= 1e-6, std::to_string(cfg.fd_states) + " random states"});
    return rep;
}

void export_mesh(const RunConfig& cfg, const std::string& path)
{
    cfg.validate();
    const auto [nx, ny] = cfg.mesh_size();
    const CaseSpec cs = make_case(cfg, nx, ny);
    const auto mesh = cs.build_mesh();
    write_file(path, [&](std::ostream& os) { write_vtk(os, *mesh); });
}

} // namespace miura
