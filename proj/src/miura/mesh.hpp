#pragma once

#include "miura/common.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace miura {

enum class Side : std::uint8_t { left = 0, right = 1, bottom = 2, top = 3 };

enum class PeriodicAxis : std::uint8_t { none, x, y };

const char* to_string(Side side);
const char* to_string(PeriodicAxis axis);

/// Small bit set over the four sides of a rectangle.
class SideSet {
public:
    constexpr SideSet() = default;
    constexpr SideSet(std::initializer_list<Side> sides)
    {
        for (Side s : sides) mask_ |= bit(s);
    }

    static constexpr SideSet all() { return SideSet(0x0F); }

    constexpr bool contains(Side s) const { return (mask_ & bit(s)) != 0; }
    constexpr bool empty() const { return mask_ == 0; }
    constexpr SideSet& insert(Side s)
    {
        mask_ |= bit(s);
        return *this;
    }
    constexpr bool intersects(SideSet other) const { return (mask_ & other.mask_) != 0; }
    constexpr std::uint8_t mask() const { return mask_; }

    friend constexpr bool operator==(SideSet, SideSet) = default;

private:
    constexpr explicit SideSet(std::uint8_t m) : mask_(m) {}
    static constexpr std::uint8_t bit(Side s) { return std::uint8_t(1u << static_cast<unsigned>(s)); }
    std::uint8_t mask_ = 0;
};

struct Rect {
    double x_min = 0.0;
    double x_max = 1.0;
    double y_min = 0.0;
    double y_max = 1.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
};

struct Triangle {
    std::array<Index, 3> vertices{};
    /// Edge k is the edge opposite vertex k.
    std::array<Index, 3> edges{};
    /// Corner coordinates before periodic identification, counter-clockwise.
    std::array<Vec2, 3> corners{};
    double area = 0.0;
    double diameter = 0.0;
};

struct Edge {
    std::array<Index, 2> vertices{};
    Vec2 midpoint = Vec2::Zero();
    double length = 0.0;
    std::optional<Side> side;
    /// Adjacent triangles and the local index of this edge inside each; -1 when absent.
    std::array<Index, 2> triangles{-1, -1};
    std::array<int, 2> local_index{-1, -1};

    bool on_boundary() const { return side.has_value(); }
};

/// Structured triangulation of a rectangle. Immutable once built.
class Mesh {
public:
    const Rect& rect() const { return rect_; }
    PeriodicAxis periodic() const { return periodic_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }

    Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
    Index num_edges() const { return static_cast<Index>(edges_.size()); }
    Index num_triangles() const { return static_cast<Index>(triangles_.size()); }
    int euler_characteristic() const { return num_vertices() - num_edges() + num_triangles(); }

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }

    /// Sides each vertex lies on (empty for interior vertices).
    const std::vector<SideSet>& vertex_sides() const { return vertex_sides_; }

    /// Max triangle diameter.
    double h() const { return h_; }

    void dump(std::ostream& os) const;

    friend Mesh build_rect_mesh(const Rect&, int, int, PeriodicAxis);

private:
    Rect rect_;
    PeriodicAxis periodic_ = PeriodicAxis::none;
    int nx_ = 0;
    int ny_ = 0;
    double h_ = 0.0;
    std::vector<Vec2> vertices_;
    std::vector<SideSet> vertex_sides_;
    std::vector<Edge> edges_;
    std::vector<Triangle> triangles_;
};

/// nx x ny grid cells, each split along the lower-left to upper-right diagonal.
Mesh build_rect_mesh(const Rect& rect, int nx, int ny, PeriodicAxis periodic = PeriodicAxis::none);

std::vector<Index> boundary_edges(const Mesh& mesh, SideSet sides);

} // namespace miura
