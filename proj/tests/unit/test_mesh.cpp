#include "miura/cases.hpp"
#include "miura/mesh.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

using namespace miura;

namespace {

const Rect kUnit{0.0, 1.0, 0.0, 1.0};

int expected_euler(PeriodicAxis p)
{
    return p == PeriodicAxis::none ? 1 : 0;
}

} // namespace

TEST(Mesh, SingleCellCounts)
{
    const Mesh m = build_rect_mesh(kUnit, 1, 1);
    EXPECT_EQ(m.num_vertices(), 4);
    EXPECT_EQ(m.num_edges(), 5);
    EXPECT_EQ(m.num_triangles(), 2);
    EXPECT_EQ(m.euler_characteristic(), 1);
}

TEST(Mesh, GluedStripCounts)
{
    const Mesh m = build_rect_mesh(kUnit, 1, 2, PeriodicAxis::y);
    EXPECT_EQ(m.num_vertices(), 4);
    EXPECT_EQ(m.num_edges(), 8);
    EXPECT_EQ(m.num_triangles(), 4);
    EXPECT_EQ(m.euler_characteristic(), 0);
}

TEST(Mesh, HyperboloidDomainSize)
{
    const CaseSpec cs = hyperboloid_case(std::numbers::pi / 2, 2, 4);
    EXPECT_NEAR(cs.rect.width(), 0.7654, 1e-4);
    EXPECT_NEAR(cs.rect.height(), 4.4429, 1e-4);
}

TEST(Mesh, RejectsDegenerateInput)
{
    EXPECT_THROW(build_rect_mesh(Rect{0, 0, 0, 1}, 1, 1), InvalidArgument);
    EXPECT_THROW(build_rect_mesh(Rect{0, 1, 1, 0}, 1, 1), InvalidArgument);
    EXPECT_THROW(build_rect_mesh(kUnit, 0, 1), InvalidArgument);
    EXPECT_THROW(build_rect_mesh(kUnit, 1, 1, PeriodicAxis::y), InvalidArgument);
    EXPECT_THROW(build_rect_mesh(kUnit, 1, 1, PeriodicAxis::x), InvalidArgument);
    EXPECT_NO_THROW(build_rect_mesh(kUnit, 2, 1, PeriodicAxis::x));
}

TEST(Mesh, BoundaryEdgeQueries)
{
    const Mesh m = build_rect_mesh(kUnit, 1, 1);
    EXPECT_EQ(boundary_edges(m, SideSet::all()).size(), 4u);
    EXPECT_TRUE(boundary_edges(m, SideSet{}).empty());

    const Mesh p = build_rect_mesh(kUnit, 1, 2, PeriodicAxis::y);
    const auto all = boundary_edges(p, SideSet::all());
    EXPECT_EQ(all.size(), 4u);
    for (Index e : all) {
        const Side s = *p.edges()[e].side;
        EXPECT_TRUE(s == Side::left || s == Side::right);
    }
    EXPECT_TRUE(boundary_edges(p, SideSet{Side::bottom, Side::top}).empty());
}

TEST(Mesh, EulerCharacteristicSweep)
{
    for (PeriodicAxis p : {PeriodicAxis::none, PeriodicAxis::x, PeriodicAxis::y}) {
        for (int nx = 1; nx <= 64; ++nx) {
            for (int ny = 1; ny <= 64; ++ny) {
                if (p == PeriodicAxis::x && nx < 2) continue;
                if (p == PeriodicAxis::y && ny < 2) continue;
                const Mesh m = build_rect_mesh(Rect{-1.0, 2.0, 0.5, 1.5}, nx, ny, p);
                ASSERT_EQ(m.euler_characteristic(), expected_euler(p)) << nx << "x" << ny << " " << to_string(p);
                ASSERT_EQ(m.num_triangles(), 2 * nx * ny);
            }
        }
    }
}

class MeshTopology : public ::testing::TestWithParam<std::tuple<int, int, PeriodicAxis>> {};

TEST_P(MeshTopology, AreasOrientationAndEdgeSharing)
{
    const auto [nx, ny, p] = GetParam();
    const Rect r{-0.3, 0.9, 1.0, 3.5};
    const Mesh m = build_rect_mesh(r, nx, ny, p);

    double area = 0.0, hmax = 0.0;
    for (const Triangle& t : m.triangles()) {
        const Vec2 a = t.corners[1] - t.corners[0], b = t.corners[2] - t.corners[0];
        const double signed_area = 0.5 * (a.x() * b.y() - a.y() * b.x());
        EXPECT_GT(signed_area, 0.0);
        EXPECT_NEAR(signed_area, t.area, 1e-14);
        area += t.area;
        double diam = 0.0;
        for (int i = 0; i < 3; ++i) diam = std::max(diam, (t.corners[i] - t.corners[(i + 1) % 3]).norm());
        EXPECT_NEAR(diam, t.diameter, 1e-14);
        hmax = std::max(hmax, diam);
    }
    EXPECT_NEAR(area, r.area(), 1e-12 * r.area());
    EXPECT_DOUBLE_EQ(m.h(), hmax);

    std::vector<int> uses(static_cast<std::size_t>(m.num_edges()), 0);
    for (const Triangle& t : m.triangles()) {
        for (Index e : t.edges) ++uses[static_cast<std::size_t>(e)];
    }
    for (Index e = 0; e < m.num_edges(); ++e) {
        const Edge& edge = m.edges()[e];
        const int expected = edge.on_boundary() ? 1 : 2;
        EXPECT_EQ(uses[static_cast<std::size_t>(e)], expected) << "edge " << e;
        EXPECT_EQ(edge.triangles[1] >= 0, !edge.on_boundary());
        if (p == PeriodicAxis::y && edge.on_boundary()) {
            EXPECT_NE(*edge.side, Side::bottom);
            EXPECT_NE(*edge.side, Side::top);
        }
        if (p == PeriodicAxis::x && edge.on_boundary()) {
            EXPECT_NE(*edge.side, Side::left);
            EXPECT_NE(*edge.side, Side::right);
        }
    }

    // Every boundary edge lies on the side it is tagged with.
    for (Index e : boundary_edges(m, SideSet::all())) {
        const Edge& edge = m.edges()[e];
        const Vec2& c = edge.midpoint;
        switch (*edge.side) {
        case Side::left: EXPECT_NEAR(c.x(), r.x_min, 1e-12); break;
        case Side::right: EXPECT_NEAR(c.x(), r.x_max, 1e-12); break;
        case Side::bottom: EXPECT_NEAR(c.y(), r.y_min, 1e-12); break;
        case Side::top: EXPECT_NEAR(c.y(), r.y_max, 1e-12); break;
        }
    }

    // Boundary length of the unglued sides.
    double len = 0.0;
    for (Index e : boundary_edges(m, SideSet::all())) len += m.edges()[e].length;
    double expected_len = 0.0;
    if (p != PeriodicAxis::x) expected_len += 2 * r.height();
    if (p != PeriodicAxis::y) expected_len += 2 * r.width();
    EXPECT_NEAR(len, expected_len, 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Grid, MeshTopology,
                         ::testing::Values(std::make_tuple(1, 1, PeriodicAxis::none),
                                           std::make_tuple(3, 5, PeriodicAxis::none),
                                           std::make_tuple(1, 2, PeriodicAxis::y),
                                           std::make_tuple(4, 2, PeriodicAxis::y),
                                           std::make_tuple(3, 7, PeriodicAxis::y),
                                           std::make_tuple(2, 1, PeriodicAxis::x),
                                           std::make_tuple(6, 3, PeriodicAxis::x)));

TEST(Mesh, PeriodicCornersStayUnwrapped)
{
    const Mesh m = build_rect_mesh(kUnit, 2, 2, PeriodicAxis::y);
    bool touches_top = false;
    for (const Triangle& t : m.triangles()) {
        for (const Vec2& c : t.corners) touches_top = touches_top || std::abs(c.y() - 1.0) < 1e-15;
    }
    EXPECT_TRUE(touches_top);
    for (const Vec2& v : m.vertices()) EXPECT_LT(v.y(), 1.0 - 1e-12);
}

TEST(Mesh, DumpListsEntities)
{
    const Mesh m = build_rect_mesh(kUnit, 1, 1);
    std::ostringstream os;
    m.dump(os);
    const std::string s = os.str();
    EXPECT_NE(s.find("vertices 4"), std::string::npos);
    EXPECT_NE(s.find("triangles 2"), std::string::npos);
}
