#include "miura/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace miura {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected)
{
    throw ConfigError("invalid value '" + value + "' for " + key + " (expected " + expected + ")");
}

double parse_double(const std::string& key, const std::string& v)
{
    const std::string t = trim(v);
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(x)) bad_value(key, v, "a finite number");
    return x;
}

int parse_int(const std::string& key, const std::string& v)
{
    const std::string t = trim(v);
    errno = 0;
    char* end = nullptr;
    const long x = std::strtol(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || x < -1000000000L || x > 1000000000L) {
        bad_value(key, v, "an integer");
    }
    return static_cast<int>(x);
}

bool parse_bool(const std::string& key, const std::string& v)
{
    const std::string t = trim(v);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    bad_value(key, v, "true or false");
}

Vec3 parse_vec3(const std::string& key, const std::string& v)
{
    const auto parts = split(v, ',');
    if (parts.size() != 3) bad_value(key, v, "three comma-separated numbers");
    return Vec3(parse_double(key, parts[0]), parse_double(key, parts[1]), parse_double(key, parts[2]));
}

std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt(const Vec3& v)
{
    return fmt(v[0]) + "," + fmt(v[1]) + "," + fmt(v[2]);
}

struct Key {
    const char* section;
    const char* name;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::vector<Key>& keys()
{
    static const std::vector<Key> table{
        {"case", "name",
         [](RunConfig& c, const std::string& v) {
             const std::string t = trim(v);
             if (std::find(case_names().begin(), case_names().end(), t) == case_names().end()) {
                 bad_value("case.name", v, "hyperboloid|annulus|axisymmetric|deformed-hyperboloid|custom");
             }
             c.case_name = t;
         },
         [](const RunConfig& c) { return c.case_name; }},
        {"case", "theta", [](RunConfig& c, const std::string& v) { c.theta = parse_double("case.theta", v); },
         [](const RunConfig& c) { return fmt(c.theta); }},
        {"case", "a", [](RunConfig& c, const std::string& v) { c.a = parse_double("case.a", v); },
         [](const RunConfig& c) { return fmt(c.a); }},
        {"case", "angle", [](RunConfig& c, const std::string& v) { c.angle = parse_double("case.angle", v); },
         [](const RunConfig& c) { return fmt(c.angle); }},
        {"case", "axis",
         [](RunConfig& c, const std::string& v) {
             const std::string t = trim(v);
             if (t == "x") c.axis = RotationAxis::x;
             else if (t == "z") c.axis = RotationAxis::z;
             else bad_value("case.axis", v, "x or z");
         },
         [](const RunConfig& c) { return std::string(to_string(c.axis)); }},
        {"case", "rho0", [](RunConfig& c, const std::string& v) { c.rho0 = parse_double("case.rho0", v); },
         [](const RunConfig& c) { return fmt(c.rho0); }},
        {"case", "rect",
         [](RunConfig& c, const std::string& v) {
             const auto p = split(v, ',');
             if (p.size() != 4) bad_value("case.rect", v, "x_min,x_max,y_min,y_max");
             c.rect = Rect{parse_double("case.rect", p[0]), parse_double("case.rect", p[1]),
                           parse_double("case.rect", p[2]), parse_double("case.rect", p[3])};
         },
         [](const RunConfig& c) {
             return fmt(c.rect.x_min) + "," + fmt(c.rect.x_max) + "," + fmt(c.rect.y_min) + "," + fmt(c.rect.y_max);
         }},
        {"case", "periodic",
         [](RunConfig& c, const std::string& v) {
             const std::string t = trim(v);
             if (t == "none") c.periodic = PeriodicAxis::none;
             else if (t == "x") c.periodic = PeriodicAxis::x;
             else if (t == "y") c.periodic = PeriodicAxis::y;
             else bad_value("case.periodic", v, "none, x or y");
         },
         [](const RunConfig& c) { return std::string(to_string(c.periodic)); }},
        {"case", "gx", [](RunConfig& c, const std::string& v) { c.gx = parse_vec3("case.gx", v); },
         [](const RunConfig& c) { return fmt(c.gx); }},
        {"case", "gy", [](RunConfig& c, const std::string& v) { c.gy = parse_vec3("case.gy", v); },
         [](const RunConfig& c) { return fmt(c.gy); }},

        {"mesh", "nx", [](RunConfig& c, const std::string& v) { c.nx = parse_int("mesh.nx", v); },
         [](const RunConfig& c) { return std::to_string(c.nx); }},
        {"mesh", "ny", [](RunConfig& c, const std::string& v) { c.ny = parse_int("mesh.ny", v); },
         [](const RunConfig& c) { return std::to_string(c.ny); }},
        {"mesh", "refine", [](RunConfig& c, const std::string& v) { c.refine = parse_int("mesh.refine", v); },
         [](const RunConfig& c) { return std::to_string(c.refine); }},

        {"solver", "eta", [](RunConfig& c, const std::string& v) { c.solver.eta = parse_double("solver.eta", v); },
         [](const RunConfig& c) { return fmt(c.solver.eta); }},
        {"solver", "tol", [](RunConfig& c, const std::string& v) { c.solver.tol_rel = parse_double("solver.tol", v); },
         [](const RunConfig& c) { return fmt(c.solver.tol_rel); }},
        {"solver", "atol", [](RunConfig& c, const std::string& v) { c.solver.tol_abs = parse_double("solver.atol", v); },
         [](const RunConfig& c) { return fmt(c.solver.tol_abs); }},
        {"solver", "max_iter",
         [](RunConfig& c, const std::string& v) { c.solver.max_iter = parse_int("solver.max_iter", v); },
         [](const RunConfig& c) { return std::to_string(c.solver.max_iter); }},
        {"solver", "norm",
         [](RunConfig& c, const std::string& v) {
             const std::string t = trim(v);
             if (t == "h1") c.solver.residual_norm = ResidualNorm::h1_riesz;
             else if (t == "euclidean") c.solver.residual_norm = ResidualNorm::euclidean;
             else bad_value("solver.norm", v, "h1 or euclidean");
         },
         [](const RunConfig& c) { return std::string(to_string(c.solver.residual_norm)); }},
        {"solver", "linearization",
         [](RunConfig& c, const std::string& v) {
             const std::string t = trim(v);
             if (t == "newton") c.solver.linearization = Linearization::newton;
             else if (t == "picard") c.solver.linearization = Linearization::picard;
             else bad_value("solver.linearization", v, "newton or picard");
         },
         [](const RunConfig& c) { return std::string(to_string(c.solver.linearization)); }},
        {"solver", "line_search",
         [](RunConfig& c, const std::string& v) { c.solver.line_search = parse_bool("solver.line_search", v); },
         [](const RunConfig& c) { return std::string(c.solver.line_search ? "true" : "false"); }},
        {"solver", "bc_mode",
         [](RunConfig& c, const std::string& v) {
             const std::string t = trim(v);
             if (t == "strong") c.bc_mode = BcMode::strong;
             else if (t == "weak") c.bc_mode = BcMode::weak;
             else if (t == "default") c.bc_mode.reset();
             else bad_value("solver.bc_mode", v, "strong, weak or default");
         },
         [](const RunConfig& c) { return c.bc_mode ? std::string(to_string(*c.bc_mode)) : std::string("default"); }},

        {"output", "dir", [](RunConfig& c, const std::string& v) { c.out_dir = trim(v); },
         [](const RunConfig& c) { return c.out_dir; }},
        {"output", "formats", [](RunConfig& c, const std::string& v) { c.formats = parse_formats(v); },
         [](const RunConfig& c) {
             std::string s;
             for (std::size_t i = 0; i < c.formats.size(); ++i) s += (i ? "," : "") + std::string(to_string(c.formats[i]));
             return s;
         }},

        {"validate", "samples", [](RunConfig& c, const std::string& v) { c.samples = parse_int("validate.samples", v); },
         [](const RunConfig& c) { return std::to_string(c.samples); }},
        {"validate", "fd_states",
         [](RunConfig& c, const std::string& v) { c.fd_states = parse_int("validate.fd_states", v); },
         [](const RunConfig& c) { return std::to_string(c.fd_states); }},
        {"validate", "seed",
         [](RunConfig& c, const std::string& v) {
             const int s = parse_int("validate.seed", v);
             if (s < 0) bad_value("validate.seed", v, "a non-negative integer");
             c.seed = static_cast<unsigned>(s);
         },
         [](const RunConfig& c) { return std::to_string(c.seed); }},
    };
    return table;
}

const Key& find_key(const std::string& section, const std::string& key)
{
    for (const Key& k : keys()) {
        if (section == k.section && key == k.name) return k;
    }
    throw ConfigError("unknown config key [" + section + "] " + key);
}

} // namespace

const char* to_string(OutputFormat f)
{
    switch (f) {
    case OutputFormat::vtk: return "vtk";
    case OutputFormat::obj: return "obj";
    case OutputFormat::csv: return "csv";
    }
    return "?";
}

std::vector<OutputFormat> parse_formats(const std::string& list)
{
    std::vector<OutputFormat> out;
    for (const std::string& item : split(list, ',')) {
        OutputFormat f;
        if (item == "vtk") f = OutputFormat::vtk;
        else if (item == "obj") f = OutputFormat::obj;
        else if (item == "csv") f = OutputFormat::csv;
        else bad_value("output.formats", list, "a comma-separated subset of vtk,obj,csv");
        if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
    }
    return out;
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value)
{
    find_key(section, key).set(*this, value);
}

std::string RunConfig::get(const std::string& section, const std::string& key) const
{
    return find_key(section, key).get(*this);
}

RunConfig RunConfig::parse(const std::string& text)
{
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(lineno) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            const bool known = std::any_of(keys().begin(), keys().end(),
                                           [&](const Key& k) { return section == k.section; });
            if (!known) throw ConfigError(where + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        if (section.empty()) throw ConfigError(where + "key outside of a section");
        try {
            cfg.set(section, trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    return cfg;
}

RunConfig RunConfig::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string RunConfig::serialize() const
{
    std::string out, section;
    for (const Key& k : keys()) {
        if (section != k.section) {
            if (!section.empty()) out += "\n";
            section = k.section;
            out += "[" + section + "]\n";
        }
        out += std::string(k.name) + " = " + k.get(*this) + "\n";
    }
    return out;
}

bool operator==(const RunConfig& a, const RunConfig& b)
{
    return a.serialize() == b.serialize();
}

void RunConfig::validate() const
{
    try {
        solver.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    MIURA_REQUIRE(nx >= 0 && ny >= 0, ConfigError, "mesh.nx and mesh.ny must be >= 1 (0 selects the default)");
    MIURA_REQUIRE(refine >= 1 && refine <= 8, ConfigError, "mesh.refine must lie in [1, 8]");
    MIURA_REQUIRE(samples >= 1, ConfigError, "validate.samples must be >= 1");
    MIURA_REQUIRE(fd_states >= 1, ConfigError, "validate.fd_states must be >= 1");
    MIURA_REQUIRE(!out_dir.empty(), ConfigError, "output.dir must not be empty");
}

std::pair<int, int> RunConfig::mesh_size() const
{
    std::pair<int, int> d{8, 48};
    if (case_name == "axisymmetric") d = {32, 16};
    else if (case_name == "custom") d = {4, 4};
    return {nx > 0 ? nx : d.first, ny > 0 ? ny : d.second};
}

CaseSpec make_case(const RunConfig& cfg, int nx, int ny)
{
    CaseSpec cs;
    try {
        if (cfg.case_name == "hyperboloid") cs = hyperboloid_case(cfg.theta, nx, ny);
        else if (cfg.case_name == "annulus") cs = annulus_case(cfg.a, nx, ny);
        else if (cfg.case_name == "axisymmetric") cs = axisymmetric_case(nx, ny, cfg.rho0);
        else if (cfg.case_name == "deformed-hyperboloid")
            cs = deformed_hyperboloid_case(cfg.theta, cfg.angle, nx, ny, cfg.axis);
        else if (cfg.case_name == "custom") {
            MIURA_REQUIRE(cfg.rect.x_min < cfg.rect.x_max && cfg.rect.y_min < cfg.rect.y_max, InvalidArgument,
                          "custom: degenerate rect");
            Mat32 gd;
            gd << cfg.gx, cfg.gy;
            cs = custom_case(cfg.rect, cfg.periodic, gd, nx, ny);
        } else throw ConfigError("unknown case " + cfg.case_name);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (cfg.bc_mode) cs.bc.mode = *cfg.bc_mode;
    return cs;
}

} // namespace miura
