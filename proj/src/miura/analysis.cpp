#include "miura/analysis.hpp"

#include "miura/element.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

namespace miura {

namespace {

struct GradSample {
    Mat32 g = Mat32::Zero();
    Mat32 gx = Mat32::Zero(); ///< d/dx of G
    Mat32 gy = Mat32::Zero(); ///< d/dy of G
    Vec2 x = Vec2::Zero();
    double weight = 0.0;
};

void check_gradient_space(const DofMap& w, const Eigen::VectorXd& g)
{
    MIURA_REQUIRE(w.degree() == 2 && w.n_components() == kGradComponents, InvalidArgument,
                  "expected the quadratic gradient space");
    MIURA_REQUIRE(g.size() == w.size(), InvalidArgument, "gradient vector does not match its space");
}

template <class F>
void for_each_gradient_sample(const DofMap& w, const Eigen::VectorXd& g, F&& f)
{
    const auto& rule = triangle_rule_degree6();
    const Mesh& mesh = w.mesh();
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const AffineMap map(mesh.triangles()[t]);
        const auto nodes = w.cell_nodes(t);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto n = p2_values(rule.points[q]);
            const auto dref = p2_ref_gradients(rule.points[q]);
            GradSample s;
            s.x = map.to_physical(rule.points[q]);
            s.weight = rule.weights[q] * std::abs(map.det);
            for (int a = 0; a < 6; ++a) {
                const Vec2 dn = map.physical_gradient(dref[a]);
                for (int d = 0; d < 2; ++d) {
                    for (int c = 0; c < 3; ++c) {
                        const double coef = g[w.global(nodes[a], grad_slot(d, c))];
                        s.g(c, d) += n[a] * coef;
                        s.gx(c, d) += dn.x() * coef;
                        s.gy(c, d) += dn.y() * coef;
                    }
                }
            }
            f(t, s);
        }
    }
}

struct SurfaceSample {
    Vec3 phi = Vec3::Zero();
    Mat32 grad = Mat32::Zero();
    Vec2 x = Vec2::Zero();
    double weight = 0.0;
};

template <class F>
void for_each_surface_sample(const DofMap& v, const SurfaceField& surface, F&& f)
{
    MIURA_REQUIRE(v.degree() == 2 && v.n_components() == 1, InvalidArgument, "expected the scalar quadratic space");
    MIURA_REQUIRE(surface.phi.size() == 3 * v.num_nodes(), InvalidArgument, "surface vector does not match its space");
    const auto& rule = triangle_rule_degree6();
    const Mesh& mesh = v.mesh();
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const AffineMap map(mesh.triangles()[t]);
        const auto nodes = v.cell_nodes(t);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto n = p2_values(rule.points[q]);
            const auto dref = p2_ref_gradients(rule.points[q]);
            SurfaceSample s;
            s.x = map.to_physical(rule.points[q]);
            s.weight = rule.weights[q] * std::abs(map.det);
            for (int a = 0; a < 6; ++a) {
                const Vec2 dn = map.physical_gradient(dref[a]);
                const Vec3 coef = surface.phi.segment<3>(3 * nodes[a]);
                s.phi += n[a] * coef;
                s.grad.col(0) += dn.x() * coef;
                s.grad.col(1) += dn.y() * coef;
            }
            f(t, s);
        }
    }
}

class ConstraintBuilder {
public:
    ConstraintBuilder(Index triangles, int per_triangle)
    {
        cf_.triangles = triangles;
        cf_.points_per_triangle = per_triangle;
        const auto n = static_cast<std::size_t>(triangles) * static_cast<std::size_t>(per_triangle);
        cf_.u.reserve(n);
        cf_.v.reserve(n);
        cf_.v_defined.reserve(n);
        cf_.gx2.reserve(n);
        cf_.gy2.reserve(n);
        cf_.omega_prime.assign(static_cast<std::size_t>(triangles), 1);
        all_folded_.assign(static_cast<std::size_t>(triangles), 1);
    }

    void add(Index t, const Mat32& grad)
    {
        const Vec3 px = grad.col(0), py = grad.col(1);
        const double gx2 = px.squaredNorm(), gy2 = py.squaredNorm();
        const double arg = (1.0 - 0.25 * gx2) * gy2;
        const bool defined = arg >= kLogGuard;
        cf_.u.push_back(px.dot(py));
        cf_.v.push_back(defined ? std::log(arg) : 0.0);
        cf_.v_defined.push_back(defined ? 1 : 0);
        cf_.gx2.push_back(gx2);
        cf_.gy2.push_back(gy2);
        cf_.max_gx2 = std::max(cf_.max_gx2, gx2);
        cf_.max_gy2 = std::max(cf_.max_gy2, gy2);
        if (!(gy2 > 1.0)) cf_.omega_prime[static_cast<std::size_t>(t)] = 0;
        else all_folded_[static_cast<std::size_t>(t)] = 0;
    }

    ConstraintFields finish()
    {
        const auto per = static_cast<std::size_t>(cf_.points_per_triangle);
        for (Index t = 0; t < cf_.triangles; ++t) {
            const auto ts = static_cast<std::size_t>(t);
            if (all_folded_[ts]) ++cf_.folded_triangles;
            if (!cf_.omega_prime[ts]) continue;
            ++cf_.omega_prime_triangles;
            for (std::size_t k = ts * per; k < (ts + 1) * per; ++k) {
                cf_.sup_u = std::max(cf_.sup_u, std::abs(cf_.u[k]));
                if (cf_.v_defined[k]) cf_.sup_v = std::max(cf_.sup_v, std::abs(cf_.v[k]));
                else ++cf_.undefined_v;
            }
        }
        return std::move(cf_);
    }

private:
    ConstraintFields cf_;
    std::vector<char> all_folded_;
};

int rule_size()
{
    return static_cast<int>(triangle_rule_degree6().points.size());
}

} // namespace

std::string format_double(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12e", x);
    return buf;
}

ErrorNorms error_norms(const DofMap& w, const Eigen::VectorXd& g, const ExactSolution& exact)
{
    check_gradient_space(w, g);
    double l2 = 0.0, semi = 0.0;
    for_each_gradient_sample(w, g, [&](Index, const GradSample& s) {
        const ExactPoint e = exact(s.x);
        l2 += s.weight * (s.g - e.grad).squaredNorm();
        semi += s.weight * ((s.gx - e.grad_x).squaredNorm() + (s.gy - e.grad_y).squaredNorm());
    });
    return {std::sqrt(l2), std::sqrt(l2 + semi)};
}

double convergence_rate(double e1, double e2, double n1, double n2)
{
    MIURA_REQUIRE(e1 > 0.0 && e2 > 0.0 && n1 > 0.0 && n2 > 0.0, InvalidArgument,
                  "convergence_rate: inputs must be positive");
    MIURA_REQUIRE(n1 != n2, InvalidArgument, "convergence_rate: triangle counts must differ");
    return 2.0 * std::log(e1 / e2) / std::log(n2 / n1);
}

double curl_mismatch_l2(const DofMap& w, const Eigen::VectorXd& g)
{
    check_gradient_space(w, g);
    double acc = 0.0;
    for_each_gradient_sample(w, g, [&](Index, const GradSample& s) {
        acc += s.weight * (s.gy.col(0) - s.gx.col(1)).squaredNorm();
    });
    return std::sqrt(acc);
}

double recovery_mismatch_l2(const DofMap& w, const Eigen::VectorXd& g, const DofMap& v, const SurfaceField& surface)
{
    check_gradient_space(w, g);
    MIURA_REQUIRE(w.num_nodes() == v.num_nodes(), InvalidArgument, "spaces live on different meshes");
    std::vector<Mat32> grads;
    grads.reserve(static_cast<std::size_t>(w.mesh().num_triangles() * rule_size()));
    for_each_surface_sample(v, surface, [&](Index, const SurfaceSample& s) { grads.push_back(s.grad); });
    double acc = 0.0;
    std::size_t k = 0;
    for_each_gradient_sample(w, g, [&](Index, const GradSample& s) { acc += s.weight * (s.g - grads[k++]).squaredNorm(); });
    return std::sqrt(acc);
}

ErrorNorms surface_error(const DofMap& v, const SurfaceField& surface, const ExactSolution& exact)
{
    Vec3 mean = Vec3::Zero();
    double area = 0.0;
    for_each_surface_sample(v, surface, [&](Index, const SurfaceSample& s) {
        mean += s.weight * exact(s.x).phi;
        area += s.weight;
    });
    mean /= area;
    double l2 = 0.0, semi = 0.0;
    for_each_surface_sample(v, surface, [&](Index, const SurfaceSample& s) {
        const ExactPoint e = exact(s.x);
        l2 += s.weight * (s.phi - (e.phi - mean)).squaredNorm();
        semi += s.weight * (s.grad - e.grad).squaredNorm();
    });
    return {std::sqrt(l2), std::sqrt(l2 + semi)};
}

ConstraintFields constraint_fields(const DofMap& w, const Eigen::VectorXd& g)
{
    check_gradient_space(w, g);
    ConstraintBuilder b(w.mesh().num_triangles(), rule_size());
    for_each_gradient_sample(w, g, [&](Index t, const GradSample& s) { b.add(t, s.g); });
    return b.finish();
}

ConstraintFields constraint_fields(const DofMap& v, const SurfaceField& surface)
{
    ConstraintBuilder b(v.mesh().num_triangles(), rule_size());
    for_each_surface_sample(v, surface, [&](Index t, const SurfaceSample& s) { b.add(t, s.grad); });
    return b.finish();
}

ConstraintFields constraint_fields(const Mesh& mesh, const std::function<Mat32(const Vec2&)>& field)
{
    const auto& rule = triangle_rule_degree6();
    ConstraintBuilder b(mesh.num_triangles(), rule_size());
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const AffineMap map(mesh.triangles()[t]);
        for (const Vec2& p : rule.points) b.add(t, field(map.to_physical(p)));
    }
    return b.finish();
}

void ConvergenceTable::add(ConvergenceRow row)
{
    if (!rows.empty()) {
        const ConvergenceRow& prev = rows.back();
        row.h1_rate = convergence_rate(prev.h1_err, row.h1_err, prev.triangles, row.triangles);
        row.l2_rate = convergence_rate(prev.l2_err, row.l2_err, prev.triangles, row.triangles);
    }
    rows.push_back(row);
}

void write_csv(std::ostream& os, const ConvergenceTable& table)
{
    auto opt = [](const std::optional<double>& x) { return x ? format_double(*x) : std::string(); };
    os << kConvergenceHeader << "\n";
    for (const auto& r : table.rows) {
        os << format_double(r.h) << "," << r.dofs << "," << r.newton_iters << "," << format_double(r.h1_err) << ","
           << opt(r.h1_rate) << "," << format_double(r.l2_err) << "," << opt(r.l2_rate) << "\n";
    }
}

VertexFields vertex_fields(const DofMap& w, const Eigen::VectorXd& g, const ConstraintFields& cf)
{
    check_gradient_space(w, g);
    const Mesh& mesh = w.mesh();
    VertexFields vf;
    const auto nv = static_cast<std::size_t>(mesh.num_vertices());
    vf.u.resize(nv);
    vf.v.resize(nv);
    vf.gx2.resize(nv);
    vf.gy2.resize(nv);
    vf.omega_prime.resize(nv);
    for (Index a = 0; a < mesh.num_vertices(); ++a) {
        Mat32 gv;
        for (int d = 0; d < 2; ++d) {
            for (int c = 0; c < 3; ++c) gv(c, d) = g[w.global(a, grad_slot(d, c))];
        }
        const double gx2 = gv.col(0).squaredNorm(), gy2 = gv.col(1).squaredNorm();
        const auto k = static_cast<std::size_t>(a);
        vf.u[k] = gv.col(0).dot(gv.col(1));
        vf.v[k] = std::log(std::max((1.0 - 0.25 * gx2) * gy2, kLogGuard));
        vf.gx2[k] = gx2;
        vf.gy2[k] = gy2;
        vf.omega_prime[k] = gy2 > 1.0 ? 1.0 : 0.0;
    }
    vf.cell_omega_prime.assign(cf.omega_prime.begin(), cf.omega_prime.end());
    return vf;
}

void write_vtk(std::ostream& os, const Mesh& mesh, const VertexFields* fields)
{
    const Rect& r = mesh.rect();
    const int nx = mesh.nx(), ny = mesh.ny();
    const double dx = r.width() / nx, dy = r.height() / ny;
    const Index npts = static_cast<Index>((nx + 1) * (ny + 1));
    auto grid_index = [&](const Vec2& p) {
        const int i = static_cast<int>(std::lround((p.x() - r.x_min) / dx));
        const int j = static_cast<int>(std::lround((p.y() - r.y_min) / dy));
        return static_cast<Index>(j * (nx + 1) + i);
    };
    std::vector<Index> grid_to_vertex(static_cast<std::size_t>(npts), -1);
    for (const Triangle& tri : mesh.triangles()) {
        for (int k = 0; k < 3; ++k) grid_to_vertex[static_cast<std::size_t>(grid_index(tri.corners[k]))] = tri.vertices[k];
    }

    os << "# vtk DataFile Version 2.0\n";
    os << "miura parameter-domain mesh\n";
    os << "ASCII\n";
    os << "DATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << npts << " double\n";
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            const double x = i == nx ? r.x_max : r.x_min + i * dx;
            const double y = j == ny ? r.y_max : r.y_min + j * dy;
            os << format_double(x) << " " << format_double(y) << " " << format_double(0.0) << "\n";
        }
    }
    const Index nt = mesh.num_triangles();
    os << "CELLS " << nt << " " << 4 * nt << "\n";
    for (const Triangle& tri : mesh.triangles()) {
        os << 3;
        for (int k = 0; k < 3; ++k) os << " " << grid_index(tri.corners[k]);
        os << "\n";
    }
    os << "CELL_TYPES " << nt << "\n";
    for (Index t = 0; t < nt; ++t) os << "5\n";
    if (!fields) return;

    auto scalars = [&](const char* name, const std::vector<double>& data) {
        os << "SCALARS " << name << " double 1\n";
        os << "LOOKUP_TABLE default\n";
        for (Index p = 0; p < npts; ++p) os << format_double(data[static_cast<std::size_t>(grid_to_vertex[p])]) << "\n";
    };
    os << "POINT_DATA " << npts << "\n";
    scalars("u", fields->u);
    scalars("v", fields->v);
    scalars("gx2", fields->gx2);
    scalars("gy2", fields->gy2);
    scalars("omega_prime", fields->omega_prime);
    os << "CELL_DATA " << nt << "\n";
    os << "SCALARS omega_prime double 1\n";
    os << "LOOKUP_TABLE default\n";
    for (double x : fields->cell_omega_prime) os << format_double(x) << "\n";
}

void write_obj(std::ostream& os, const Mesh& mesh, const DofMap& v, const SurfaceField& surface)
{
    MIURA_REQUIRE(v.degree() == 2 && surface.phi.size() == 3 * v.num_nodes(), InvalidArgument,
                  "write_obj: surface does not match its space");
    os << "# miura surface\n";
    for (Index a = 0; a < mesh.num_vertices(); ++a) {
        os << "v " << format_double(surface.phi[3 * a]) << " " << format_double(surface.phi[3 * a + 1]) << " "
           << format_double(surface.phi[3 * a + 2]) << "\n";
    }
    for (const Triangle& tri : mesh.triangles()) {
        os << "f " << tri.vertices[0] + 1 << " " << tri.vertices[1] + 1 << " " << tri.vertices[2] + 1 << "\n";
    }
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& writer)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    writer(out);
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

} // namespace miura
