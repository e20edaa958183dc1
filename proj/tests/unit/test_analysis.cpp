#include "miura/analysis.hpp"
#include "miura/cases.hpp"
#include "miura/element.hpp"
#include "miura/recovery.hpp"
#include "miura/solver.hpp"

#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

using namespace miura;

namespace {

constexpr double kPi = std::numbers::pi;

std::string read_golden(const std::string& name)
{
    std::ifstream in(std::string(MIURA_GOLDEN_DIR) + "/" + name, std::ios::binary);
    EXPECT_TRUE(in.good()) << name;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Eigen::VectorXd interpolate(const DofMap& w, const std::function<Mat32(const Vec2&)>& f)
{
    Eigen::VectorXd g(w.size());
    for (Index n = 0; n < w.num_nodes(); ++n) {
        const Mat32 m = f(w.node_coords()[n]);
        for (int slot = 0; slot < kGradComponents; ++slot) g[w.global(n, slot)] = m(slot % 3, slot / 3);
    }
    return g;
}

// Componentwise quadratic gradient field with its derivatives.
ExactPoint quadratic_field(const Vec2& p)
{
    const double x = p.x(), y = p.y();
    ExactPoint e;
    for (int c = 0; c < 3; ++c) {
        const double k = c + 1.0;
        e.grad(c, 0) = k * x * x - y + 0.5 * x * y;
        e.grad(c, 1) = 1.0 - k * y * y + x;
        e.grad_x(c, 0) = 2 * k * x + 0.5 * y;
        e.grad_y(c, 0) = -1.0 + 0.5 * x;
        e.grad_x(c, 1) = 1.0;
        e.grad_y(c, 1) = -2 * k * y;
    }
    return e;
}

struct Solution {
    CaseSpec cs;
    std::shared_ptr<const Mesh> mesh;
    std::shared_ptr<const Discretization> disc;
    NewtonResult res;
};

Solution solve_hyperboloid(int nx, int ny)
{
    Solution s{hyperboloid_case(kPi / 2, nx, ny), nullptr, nullptr, {}};
    s.mesh = s.cs.build_mesh();
    s.disc = std::make_shared<const Discretization>(s.mesh);
    s.res = newton_solve(*s.disc, s.cs.bc, SolverConfig{}, initial_guess(*s.disc, s.cs.bc, 1.0));
    return s;
}

} // namespace

TEST(Rate, Examples)
{
    EXPECT_EQ(convergence_rate(0.3, 0.3, 100, 400), 0.0);
    EXPECT_NEAR(convergence_rate(1.0, 0.25, 100, 400), 2.0, 1e-14);
    EXPECT_NEAR(convergence_rate(1.064e-2, 2.658e-3, 1000, 4000), 2.0 * std::log2(1.064e-2 / 2.658e-3) / 2.0, 1e-14);
    EXPECT_NEAR(convergence_rate(1.064e-2, 2.658e-3, 1000, 4000), 2.0017, 1e-3);
    EXPECT_THROW(convergence_rate(0.0, 1.0, 1, 2), InvalidArgument);
    EXPECT_THROW(convergence_rate(1.0, -1.0, 1, 2), InvalidArgument);
    EXPECT_THROW(convergence_rate(1.0, 1.0, 0, 2), InvalidArgument);
    EXPECT_THROW(convergence_rate(1.0, 0.5, 3, 3), InvalidArgument);
}

TEST(Rate, UnchangedWhenPairsSwap)
{
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(0.01, 10.0);
    for (int k = 0; k < 100; ++k) {
        const double e1 = u(rng), e2 = u(rng), n1 = 10 * u(rng), n2 = 10 * u(rng) + 101;
        EXPECT_NEAR(convergence_rate(e1, e2, n1, n2), convergence_rate(e2, e1, n2, n1), 1e-12);
    }
}

TEST(ErrorNorms, InterpolatedQuadraticIsExact)
{
    const auto mesh = std::make_shared<const Mesh>(build_rect_mesh(Rect{-0.5, 1.0, 0.0, 2.0}, 3, 5));
    const DofMap w = build_space(mesh, 2, kGradComponents);
    const Eigen::VectorXd g = interpolate(w, [](const Vec2& p) { return quadratic_field(p).grad; });
    const ErrorNorms e = error_norms(w, g, quadratic_field);
    EXPECT_LE(e.l2, 1e-12);
    EXPECT_LE(e.h1, 1e-12);
}

TEST(ErrorNorms, ConstantOffsetHasKnownNorm)
{
    const Rect r{0, 2, 0, 3};
    const auto mesh = std::make_shared<const Mesh>(build_rect_mesh(r, 2, 3));
    const DofMap w = build_space(mesh, 2, kGradComponents);
    const Eigen::VectorXd g = interpolate(w, [](const Vec2& p) { return quadratic_field(p).grad; });
    Eigen::VectorXd shifted = g;
    for (Index n = 0; n < w.num_nodes(); ++n) shifted[w.global(n, grad_slot(1, 2))] += 0.5;
    const ErrorNorms e = error_norms(w, shifted, quadratic_field);
    EXPECT_NEAR(e.l2, 0.5 * std::sqrt(r.area()), 1e-12);
    EXPECT_NEAR(e.h1, e.l2, 1e-12);
}

// Reference values for the 50x25 hyperboloid mesh: H1 1.064e-2, L2 2.577e-4, three iterations.
TEST(ErrorNorms, HyperboloidReferenceMagnitudes)
{
    const Solution s = solve_hyperboloid(50, 25);
    ASSERT_TRUE(s.res.report.converged);
    EXPECT_EQ(s.res.report.iterations, 3);
    const ErrorNorms e = error_norms(s.disc->gradient_space(), s.res.state.g, *s.cs.exact);
    EXPECT_LE(e.h1, 3 * 1.064e-2);
    EXPECT_GE(e.h1, 1.064e-2 / 3);
    EXPECT_LE(e.l2, 3 * 2.577e-4);
    EXPECT_GE(e.l2, 2.577e-4 / 3);
}

TEST(Constraints, ExactHyperboloidField)
{
    const CaseSpec cs = hyperboloid_case(kPi / 2, 4, 24);
    const auto mesh = cs.build_mesh();
    const ConstraintFields cf = constraint_fields(*mesh, [&](const Vec2& p) { return (*cs.exact)(p).grad; });
    EXPECT_LE(cf.sup_u, 1e-12);
    EXPECT_LE(cf.sup_v, 1e-12);
    EXPECT_EQ(cf.undefined_v, 0);
    EXPECT_EQ(cf.omega_prime_triangles, mesh->num_triangles());
    EXPECT_EQ(cf.folded_triangles, 0);
    EXPECT_EQ(cf.omega_prime_fraction(), 1.0);
    EXPECT_EQ(cf.u.size(), static_cast<std::size_t>(mesh->num_triangles() * cf.points_per_triangle));
    EXPECT_LE(cf.max_gx2, 3.0 + 1e-12);
    EXPECT_LE(cf.max_gy2, 4.0);
}

TEST(Constraints, VanishingXDerivative)
{
    const auto mesh = std::make_shared<const Mesh>(build_rect_mesh(Rect{}, 2, 2));
    auto field = [](const Vec2& p) {
        Mat32 m = Mat32::Zero();
        m.col(1) = Vec3(1.0 + p.x(), 0.5 * p.y(), 0.2);
        return m;
    };
    const ConstraintFields cf = constraint_fields(*mesh, field);
    const Quadrature& q = triangle_rule_degree6();
    for (Index t = 0; t < mesh->num_triangles(); ++t) {
        const AffineMap map(mesh->triangles()[t]);
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            const std::size_t i = static_cast<std::size_t>(t) * q.points.size() + k;
            EXPECT_EQ(cf.u[i], 0.0);
            EXPECT_NEAR(cf.v[i], std::log(field(map.to_physical(q.points[k])).col(1).squaredNorm()), 1e-14);
        }
    }
}

TEST(Constraints, UndefinedLogarithmIsFlagged)
{
    const auto mesh = std::make_shared<const Mesh>(build_rect_mesh(Rect{}, 1, 1));
    const ConstraintFields cf = constraint_fields(*mesh, [](const Vec2&) {
        Mat32 m = Mat32::Zero();
        m(0, 0) = 2.0; // 1 - |Gx|^2 / 4 = 0
        m(1, 1) = 1.5;
        return m;
    });
    EXPECT_EQ(cf.undefined_v, 2 * cf.points_per_triangle);
    for (char d : cf.v_defined) EXPECT_EQ(d, 0);
    EXPECT_EQ(cf.sup_v, 0.0);
    for (char o : cf.omega_prime) EXPECT_TRUE(o == 0 || o == 1);
}

TEST(Constraints, InvariantUnderRigidRotation)
{
    const CaseSpec cs = annulus_case(0.675, 4, 12);
    const auto mesh = cs.build_mesh();
    auto field = [](const Vec2& p) {
        Mat32 m;
        m << 1.0 + p.x(), 0.1 * p.y(), 0.3, std::sin(p.y()), p.x() * p.y(), 0.9 - p.x();
        return m;
    };
    const Eigen::Matrix3d r = Eigen::AngleAxisd(0.7, Vec3(1, 2, -1).normalized()).toRotationMatrix();
    const ConstraintFields a = constraint_fields(*mesh, field);
    const ConstraintFields b = constraint_fields(*mesh, [&](const Vec2& p) { return Mat32(r * field(p)); });
    EXPECT_EQ(a.omega_prime, b.omega_prime);
    EXPECT_GT(a.omega_prime_triangles, 0);
    EXPECT_LT(a.omega_prime_triangles, a.triangles);
    for (std::size_t i = 0; i < a.u.size(); ++i) {
        EXPECT_NEAR(a.u[i], b.u[i], 1e-13);
        EXPECT_NEAR(a.gy2[i], b.gy2[i], 1e-13);
    }
    EXPECT_NEAR(a.sup_u, b.sup_u, 1e-13);
    EXPECT_NEAR(a.sup_v, b.sup_v, 1e-12);
}

TEST(Table, RatesFromSecondRowAndCsvGolden)
{
    ConvergenceTable t;
    t.add({0.5, 100, 8, 3, 1e-2, std::nullopt, 1e-3, std::nullopt});
    t.add({0.25, 400, 32, 4, 2.5e-3, std::nullopt, 1.25e-4, std::nullopt});
    EXPECT_FALSE(t.rows[0].h1_rate.has_value());
    EXPECT_FALSE(t.rows[0].l2_rate.has_value());
    ASSERT_TRUE(t.rows[1].h1_rate.has_value());
    EXPECT_NEAR(*t.rows[1].h1_rate, 2.0, 1e-14);
    EXPECT_NEAR(*t.rows[1].l2_rate, 3.0, 1e-14);
    std::ostringstream os;
    write_csv(os, t);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), kConvergenceHeader);
    EXPECT_EQ(os.str(), read_golden("convergence.csv"));
}

TEST(Export, MeshVtkGolden)
{
    std::ostringstream os;
    write_vtk(os, build_rect_mesh(Rect{}, 1, 1));
    EXPECT_EQ(os.str(), read_golden("mesh_1x1.vtk"));
}

TEST(Export, FieldVtkGolden)
{
    const auto mesh = std::make_shared<const Mesh>(build_rect_mesh(Rect{}, 1, 1));
    const DofMap w = build_space(mesh, 2, kGradComponents);
    Mat32 c = Mat32::Zero();
    c(0, 0) = 1.0;
    c(1, 1) = 2.0;
    const Eigen::VectorXd g = interpolate(w, [&](const Vec2&) { return c; });
    const ConstraintFields cf = constraint_fields(w, g);
    const VertexFields vf = vertex_fields(w, g, cf);
    std::ostringstream os;
    write_vtk(os, *mesh, &vf);
    EXPECT_EQ(os.str(), read_golden("fields_1x1.vtk"));
}

TEST(Export, SurfaceObjGolden)
{
    const auto mesh = std::make_shared<const Mesh>(build_rect_mesh(Rect{}, 1, 1));
    const DofMap v = build_space(mesh, 2, 1);
    SurfaceField s;
    s.phi.resize(3 * v.num_nodes());
    for (Index n = 0; n < v.num_nodes(); ++n) {
        const Vec2 p = v.node_coords()[n];
        s.phi.segment<3>(3 * n) = Vec3(p.x(), p.y(), p.x() * p.y() - 0.25);
    }
    std::ostringstream os;
    write_obj(os, *mesh, v, s);
    EXPECT_EQ(os.str(), read_golden("surface_1x1.obj"));
}

TEST(Export, PeriodicVtkUsesUngluedGrid)
{
    std::ostringstream os;
    write_vtk(os, build_rect_mesh(Rect{0, 2, 0, 1}, 2, 1, PeriodicAxis::x));
    const std::string s = os.str();
    EXPECT_NE(s.find("POINTS 6 double\n"), std::string::npos);
    EXPECT_NE(s.find("CELLS 4 16\n3 0 1 4\n3 0 4 3\n3 1 2 5\n3 1 5 4\n"), std::string::npos);
}

TEST(Export, HyperboloidObjCounts)
{
    const Solution s = solve_hyperboloid(2, 12);
    const SurfaceRecovery rec(s.mesh);
    const SurfaceField surf = rec.recover(s.disc->gradient_space(), s.res.state.g);
    std::ostringstream os;
    write_obj(os, *s.mesh, rec.space(), surf);
    std::istringstream in(os.str());
    std::string line;
    int v = 0, f = 0;
    while (std::getline(in, line)) {
        if (line.rfind("v ", 0) == 0) ++v;
        if (line.rfind("f ", 0) == 0) ++f;
    }
    EXPECT_EQ(v, s.mesh->num_vertices());
    EXPECT_EQ(f, s.mesh->num_triangles());
}

TEST(Export, WriteFailureNamesThePath)
{
    try {
        write_file("/nonexistent-dir/out.vtk", [](std::ostream& os) { os << "x"; });
        FAIL() << "expected IoError";
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/out.vtk"), std::string::npos);
    }
    EXPECT_EQ(format_double(0.1), "1.000000000000e-01");
}

TEST(Determinism, RepeatedSolvesAreBitIdentical)
{
    const Solution a = solve_hyperboloid(2, 12);
    const Solution b = solve_hyperboloid(2, 12);
    EXPECT_EQ(a.res.report.iterations, b.res.report.iterations);
    EXPECT_EQ(a.res.report.residual_norms, b.res.report.residual_norms);
    ASSERT_EQ(a.res.state.g.size(), b.res.state.g.size());
    EXPECT_EQ(std::memcmp(a.res.state.g.data(), b.res.state.g.data(), sizeof(double) * a.res.state.g.size()), 0);

    auto vtk = [](const Solution& s) {
        const ConstraintFields cf = constraint_fields(s.disc->gradient_space(), s.res.state.g);
        const VertexFields vf = vertex_fields(s.disc->gradient_space(), s.res.state.g, cf);
        std::ostringstream os;
        write_vtk(os, *s.mesh, &vf);
        return os.str();
    };
    EXPECT_EQ(vtk(a), vtk(b));
}
