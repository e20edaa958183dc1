#include "miura/miura.h"

#include "miura/driver.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <string>

struct miura_config {
    miura::RunConfig cfg;
};

struct miura_run {
    miura::SolveOutcome outcome;
    std::vector<miura::OutputFormat> formats;
};

struct miura_table {
    miura::ConvergenceRun run;
};

struct miura_report {
    miura::ValidationReport report;
};

namespace {

thread_local std::string last_error;

miura_status fail(miura_status s, const std::string& msg)
{
    last_error = msg;
    return s;
}

template <class F>
miura_status guarded(F&& f)
{
    try {
        last_error.clear();
        return f();
    } catch (const miura::ConfigError& e) {
        return fail(MIURA_ERR_CONFIG, e.what());
    } catch (const miura::ValidationError& e) {
        return fail(MIURA_ERR_VALIDATION, e.what());
    } catch (const miura::NumericError& e) {
        return fail(MIURA_ERR_NUMERIC, e.what());
    } catch (const miura::IoError& e) {
        return fail(MIURA_ERR_IO, e.what());
    } catch (const miura::InvalidArgument& e) {
        return fail(MIURA_ERR_INVALID_ARGUMENT, e.what());
    } catch (const miura::Error& e) {
        return fail(MIURA_ERR_NUMERIC, e.what());
    } catch (const std::bad_alloc&) {
        return fail(MIURA_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(MIURA_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(MIURA_ERR_INTERNAL, "unknown error");
    }
}

miura_status copy_out(const std::string& s, char* buf, size_t cap, size_t* needed)
{
    const size_t n = s.size() + 1;
    if (needed) *needed = n;
    if (buf == nullptr && cap == 0) return needed ? MIURA_OK : fail(MIURA_ERR_INVALID_ARGUMENT, "null buffer");
    if (buf == nullptr) return fail(MIURA_ERR_INVALID_ARGUMENT, "null buffer");
    if (cap < n) return fail(MIURA_ERR_BUFFER_TOO_SMALL, "buffer too small: need " + std::to_string(n) + " bytes");
    std::memcpy(buf, s.c_str(), n);
    return MIURA_OK;
}

#define MIURA_CHECK_ARG(cond, msg) \
    do {                           \
        if (!(cond)) return fail(MIURA_ERR_INVALID_ARGUMENT, msg); \
    } while (0)

} // namespace

extern "C" {

const char* miura_version(void)
{
    return "1.0.0";
}

const char* miura_status_string(miura_status status)
{
    switch (status) {
    case MIURA_OK: return "ok";
    case MIURA_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MIURA_ERR_CONFIG: return "configuration error";
    case MIURA_ERR_NUMERIC: return "numerical failure";
    case MIURA_ERR_IO: return "i/o error";
    case MIURA_ERR_VALIDATION: return "validation failure";
    case MIURA_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case MIURA_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* miura_last_error(void)
{
    return last_error.c_str();
}

miura_status miura_config_create(miura_config** out)
{
    MIURA_CHECK_ARG(out, "out is null");
    return guarded([&] {
        *out = new miura_config{};
        return MIURA_OK;
    });
}

miura_status miura_config_parse(const char* text, miura_config** out)
{
    MIURA_CHECK_ARG(text && out, "null argument");
    return guarded([&] {
        *out = new miura_config{miura::RunConfig::parse(text)};
        return MIURA_OK;
    });
}

miura_status miura_config_load(const char* path, miura_config** out)
{
    MIURA_CHECK_ARG(path && out, "null argument");
    return guarded([&] {
        *out = new miura_config{miura::RunConfig::load(path)};
        return MIURA_OK;
    });
}

miura_status miura_config_clone(const miura_config* cfg, miura_config** out)
{
    MIURA_CHECK_ARG(cfg && out, "null argument");
    return guarded([&] {
        *out = new miura_config{cfg->cfg};
        return MIURA_OK;
    });
}

void miura_config_destroy(miura_config* cfg)
{
    delete cfg;
}

miura_status miura_config_set(miura_config* cfg, const char* section, const char* key, const char* value)
{
    MIURA_CHECK_ARG(cfg && section && key && value, "null argument");
    return guarded([&] {
        cfg->cfg.set(section, key, value);
        return MIURA_OK;
    });
}

miura_status miura_config_get(const miura_config* cfg, const char* section, const char* key, char* buf, size_t cap,
                              size_t* needed)
{
    MIURA_CHECK_ARG(cfg && section && key, "null argument");
    return guarded([&] { return copy_out(cfg->cfg.get(section, key), buf, cap, needed); });
}

miura_status miura_config_serialize(const miura_config* cfg, char* buf, size_t cap, size_t* needed)
{
    MIURA_CHECK_ARG(cfg, "null config");
    return guarded([&] { return copy_out(cfg->cfg.serialize(), buf, cap, needed); });
}

miura_status miura_config_validate(const miura_config* cfg)
{
    MIURA_CHECK_ARG(cfg, "null config");
    return guarded([&] {
        cfg->cfg.validate();
        return MIURA_OK;
    });
}

miura_status miura_solve(const miura_config* cfg, miura_run** out)
{
    MIURA_CHECK_ARG(cfg && out, "null argument");
    *out = nullptr;
    return guarded([&] {
        cfg->cfg.validate();
        const auto [nx, ny] = cfg->cfg.mesh_size();
        const miura::CaseSpec cs = miura::make_case(cfg->cfg, nx, ny);
        auto run = std::make_unique<miura_run>();
        run->outcome = miura::solve_case(cs, cfg->cfg.solver, cfg->cfg.samples);
        run->formats = cfg->cfg.formats;
        *out = run.release();
        return MIURA_OK;
    });
}

void miura_run_destroy(miura_run* run)
{
    delete run;
}

int miura_run_converged(const miura_run* run)
{
    return run && run->outcome.report.converged ? 1 : 0;
}

int miura_run_iterations(const miura_run* run)
{
    return run ? run->outcome.report.iterations : -1;
}

size_t miura_run_dofs(const miura_run* run)
{
    return run ? static_cast<size_t>(run->outcome.disc->size()) : 0;
}

double miura_run_omega_prime_fraction(const miura_run* run)
{
    return run ? run->outcome.constraints.omega_prime_fraction() : std::numeric_limits<double>::quiet_NaN();
}

miura_status miura_run_summary_json(const miura_run* run, char* buf, size_t cap, size_t* needed)
{
    MIURA_CHECK_ARG(run, "null run");
    return guarded([&] { return copy_out(miura::summary_json(run->outcome), buf, cap, needed); });
}

miura_status miura_run_write(const miura_run* run, const char* dir, const char* formats)
{
    MIURA_CHECK_ARG(run && dir, "null argument");
    return guarded([&] {
        const auto f = formats ? miura::parse_formats(formats) : run->formats;
        miura::write_solution_outputs(run->outcome, dir, f);
        return MIURA_OK;
    });
}

miura_status miura_convergence(const miura_config* cfg, miura_table** out)
{
    MIURA_CHECK_ARG(cfg && out, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto t = std::make_unique<miura_table>();
        t->run = miura::run_convergence(cfg->cfg);
        *out = t.release();
        return MIURA_OK;
    });
}

void miura_table_destroy(miura_table* table)
{
    delete table;
}

size_t miura_table_rows(const miura_table* table)
{
    return table ? table->run.table.rows.size() : 0;
}

miura_status miura_table_row_get(const miura_table* table, size_t index, miura_table_row* row)
{
    MIURA_CHECK_ARG(table && row, "null argument");
    MIURA_CHECK_ARG(index < table->run.table.rows.size(), "row index out of range");
    const auto& r = table->run.table.rows[index];
    const double nan = std::numeric_limits<double>::quiet_NaN();
    *row = miura_table_row{r.h,           static_cast<size_t>(r.dofs), r.newton_iters, r.h1_err,
                           r.h1_rate.value_or(nan), r.l2_err, r.l2_rate.value_or(nan)};
    last_error.clear();
    return MIURA_OK;
}

int miura_table_converged(const miura_table* table)
{
    return table && table->run.all_converged ? 1 : 0;
}

miura_status miura_table_write_csv(const miura_table* table, const char* path)
{
    MIURA_CHECK_ARG(table && path, "null argument");
    return guarded([&] {
        miura::write_file(path, [&](std::ostream& os) { miura::write_csv(os, table->run.table); });
        return MIURA_OK;
    });
}

miura_status miura_table_summary_json(const miura_table* table, char* buf, size_t cap, size_t* needed)
{
    MIURA_CHECK_ARG(table, "null table");
    return guarded([&] { return copy_out(miura::convergence_json(table->run), buf, cap, needed); });
}

miura_status miura_validate(const miura_config* cfg, miura_report** out)
{
    MIURA_CHECK_ARG(cfg && out, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto r = std::make_unique<miura_report>();
        r->report = miura::run_validate(cfg->cfg);
        *out = r.release();
        return MIURA_OK;
    });
}

void miura_report_destroy(miura_report* report)
{
    delete report;
}

int miura_report_passed(const miura_report* report)
{
    return report && report->report.passed() ? 1 : 0;
}

size_t miura_report_count(const miura_report* report)
{
    return report ? report->report.checks.size() : 0;
}

miura_status miura_report_check(const miura_report* report, size_t index, miura_check* check)
{
    MIURA_CHECK_ARG(report && check, "null argument");
    MIURA_CHECK_ARG(index < report->report.checks.size(), "check index out of range");
    const auto& c = report->report.checks[index];
    *check = miura_check{c.name.c_str(), c.value, c.tolerance, c.passed ? 1 : 0, c.detail.c_str()};
    last_error.clear();
    return MIURA_OK;
}

miura_status miura_report_json(const miura_report* report, char* buf, size_t cap, size_t* needed)
{
    MIURA_CHECK_ARG(report, "null report");
    return guarded([&] { return copy_out(report->report.json(), buf, cap, needed); });
}

miura_status miura_export_mesh(const miura_config* cfg, const char* path)
{
    MIURA_CHECK_ARG(cfg && path, "null argument");
    return guarded([&] {
        miura::export_mesh(cfg->cfg, path);
        return MIURA_OK;
    });
}

} // extern "C"
