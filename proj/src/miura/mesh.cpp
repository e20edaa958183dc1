#include "miura/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace miura {

const char* to_string(Side side)
{
    switch (side) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::bottom: return "bottom";
    case Side::top: return "top";
    }
    return "?";
}

const char* to_string(PeriodicAxis axis)
{
    switch (axis) {
    case PeriodicAxis::none: return "none";
    case PeriodicAxis::x: return "x";
    case PeriodicAxis::y: return "y";
    }
    return "?";
}

namespace {

double triangle_area(const std::array<Vec2, 3>& c)
{
    const Vec2 a = c[1] - c[0];
    const Vec2 b = c[2] - c[0];
    return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

double triangle_diameter(const std::array<Vec2, 3>& c)
{
    return std::max({(c[1] - c[0]).norm(), (c[2] - c[1]).norm(), (c[0] - c[2]).norm()});
}

} // namespace

Mesh build_rect_mesh(const Rect& rect, int nx, int ny, PeriodicAxis periodic)
{
    MIURA_REQUIRE(std::isfinite(rect.x_min) && std::isfinite(rect.x_max) && std::isfinite(rect.y_min) &&
                      std::isfinite(rect.y_max) && rect.x_min < rect.x_max && rect.y_min < rect.y_max,
                  InvalidArgument, "build_rect_mesh: degenerate rectangle");
    MIURA_REQUIRE(nx >= 1 && ny >= 1, InvalidArgument, "build_rect_mesh: nx and ny must be >= 1");
    MIURA_REQUIRE(!(periodic == PeriodicAxis::x && nx < 2), InvalidArgument,
                  "build_rect_mesh: periodic in x needs nx >= 2");
    MIURA_REQUIRE(!(periodic == PeriodicAxis::y && ny < 2), InvalidArgument,
                  "build_rect_mesh: periodic in y needs ny >= 2");

    const bool per_x = periodic == PeriodicAxis::x;
    const bool per_y = periodic == PeriodicAxis::y;
    const double dx = rect.width() / nx;
    const double dy = rect.height() / ny;

    // Vertex columns/rows after identification.
    const int vcols = per_x ? nx : nx + 1;
    const int vrows = per_y ? ny : ny + 1;

    Mesh m;
    m.rect_ = rect;
    m.periodic_ = periodic;
    m.nx_ = nx;
    m.ny_ = ny;

    auto xcoord = [&](int i) { return i == nx ? rect.x_max : rect.x_min + i * dx; };
    auto ycoord = [&](int j) { return j == ny ? rect.y_max : rect.y_min + j * dy; };
    auto vid = [&](int i, int j) -> Index { return (j % vrows) * vcols + (i % vcols); };

    m.vertices_.resize(static_cast<std::size_t>(vcols) * vrows);
    m.vertex_sides_.resize(m.vertices_.size());
    for (int j = 0; j < vrows; ++j) {
        for (int i = 0; i < vcols; ++i) {
            const Index v = vid(i, j);
            m.vertices_[v] = Vec2(xcoord(i), ycoord(j));
            SideSet s;
            if (!per_x && i == 0) s.insert(Side::left);
            if (!per_x && i == nx) s.insert(Side::right);
            if (!per_y && j == 0) s.insert(Side::bottom);
            if (!per_y && j == ny) s.insert(Side::top);
            m.vertex_sides_[v] = s;
        }
    }

    // Edges are numbered structurally (horizontal, vertical, diagonal) so that
    // two distinct edges sharing a vertex pair on a glued mesh stay distinct.
    const int hrows = vrows;
    const int vcolumns = vcols;
    const Index n_h = static_cast<Index>(nx) * hrows;
    const Index n_v = static_cast<Index>(vcolumns) * ny;
    const Index n_d = static_cast<Index>(nx) * ny;
    auto hid = [&](int i, int j) -> Index { return (j % hrows) * nx + i; };
    auto vert_id = [&](int i, int j) -> Index { return n_h + j * vcolumns + (i % vcolumns); };
    auto did = [&](int i, int j) -> Index { return n_h + n_v + j * nx + i; };

    m.edges_.resize(static_cast<std::size_t>(n_h + n_v + n_d));
    for (int j = 0; j < hrows; ++j) {
        for (int i = 0; i < nx; ++i) {
            Edge& e = m.edges_[hid(i, j)];
            e.vertices = {vid(i, j), vid(i + 1, j)};
            e.midpoint = Vec2(rect.x_min + (i + 0.5) * dx, ycoord(j));
            e.length = dx;
            if (!per_y && j == 0) e.side = Side::bottom;
            if (!per_y && j == ny) e.side = Side::top;
        }
    }
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < vcolumns; ++i) {
            Edge& e = m.edges_[vert_id(i, j)];
            e.vertices = {vid(i, j), vid(i, j + 1)};
            e.midpoint = Vec2(xcoord(i), rect.y_min + (j + 0.5) * dy);
            e.length = dy;
            if (!per_x && i == 0) e.side = Side::left;
            if (!per_x && i == nx) e.side = Side::right;
        }
    }
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            Edge& e = m.edges_[did(i, j)];
            e.vertices = {vid(i, j), vid(i + 1, j + 1)};
            e.midpoint = Vec2(rect.x_min + (i + 0.5) * dx, rect.y_min + (j + 0.5) * dy);
            e.length = std::hypot(dx, dy);
        }
    }

    m.triangles_.reserve(static_cast<std::size_t>(2) * nx * ny);
    auto add_triangle = [&](std::array<Index, 3> v, std::array<Index, 3> e, std::array<Vec2, 3> c) {
        Triangle t;
        t.vertices = v;
        t.edges = e;
        t.corners = c;
        t.area = triangle_area(c);
        t.diameter = triangle_diameter(c);
        const Index id = static_cast<Index>(m.triangles_.size());
        for (int k = 0; k < 3; ++k) {
            Edge& edge = m.edges_[e[k]];
            const int slot = edge.triangles[0] < 0 ? 0 : 1;
            edge.triangles[slot] = id;
            edge.local_index[slot] = k;
        }
        m.h_ = std::max(m.h_, t.diameter);
        m.triangles_.push_back(t);
    };

    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Vec2 p00(xcoord(i), ycoord(j));
            const Vec2 p10(xcoord(i + 1), ycoord(j));
            const Vec2 p01(xcoord(i), ycoord(j + 1));
            const Vec2 p11(xcoord(i + 1), ycoord(j + 1));
            const Index v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            add_triangle({v00, v10, v11}, {vert_id(i + 1, j), did(i, j), hid(i, j)}, {p00, p10, p11});
            add_triangle({v00, v11, v01}, {hid(i, j + 1), vert_id(i, j), did(i, j)}, {p00, p11, p01});
        }
    }
    return m;
}

std::vector<Index> boundary_edges(const Mesh& mesh, SideSet sides)
{
    std::vector<Index> out;
    const auto& edges = mesh.edges();
    for (Index e = 0; e < static_cast<Index>(edges.size()); ++e) {
        if (edges[e].side && sides.contains(*edges[e].side)) out.push_back(e);
    }
    return out;
}

void Mesh::dump(std::ostream& os) const
{
    os << "mesh nx " << nx_ << " ny " << ny_ << " periodic " << to_string(periodic_) << "\n";
    os << "vertices " << num_vertices() << "\n";
    for (Index v = 0; v < num_vertices(); ++v) os << v << " " << vertices_[v].x() << " " << vertices_[v].y() << "\n";
    os << "edges " << num_edges() << "\n";
    for (Index e = 0; e < num_edges(); ++e) {
        const Edge& ed = edges_[e];
        os << e << " " << ed.vertices[0] << " " << ed.vertices[1] << " "
           << (ed.side ? to_string(*ed.side) : "interior") << "\n";
    }
    os << "triangles " << num_triangles() << "\n";
    for (Index t = 0; t < num_triangles(); ++t) {
        const Triangle& tr = triangles_[t];
        os << t << " " << tr.vertices[0] << " " << tr.vertices[1] << " " << tr.vertices[2] << "\n";
    }
}

} // namespace miura
