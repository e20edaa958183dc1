#pragma once

#include "miura/common.hpp"
#include "miura/mesh.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace miura {

/// Quadrature on the reference triangle (0,0), (1,0), (0,1); weights sum to 1/2.
struct Quadrature {
    std::vector<Vec2> points;
    std::vector<double> weights;
    int degree = 0;
};

/// Symmetric 12-point rule, exact for polynomials of degree <= 6.
const Quadrature& triangle_rule_degree6();

/// Gauss-Legendre rule on [0, 1]; weights sum to 1.
struct LineQuadrature {
    std::vector<double> points;
    std::vector<double> weights;
};

const LineQuadrature& gauss_line3();

/// Quadratic Lagrange basis on the reference triangle. Entries 0..2 are the
/// vertex functions, entry 3 + k is the midpoint function of the edge opposite vertex k.
std::array<double, 6> p2_values(const Vec2& ref);
std::array<Vec2, 6> p2_ref_gradients(const Vec2& ref);

/// Barycentric coordinates, i.e. the linear Lagrange basis.
std::array<double, 3> p1_values(const Vec2& ref);
std::array<Vec2, 3> p1_ref_gradients();

/// Affine map from the reference triangle onto a physical triangle.
struct AffineMap {
    Vec2 origin;
    Eigen::Matrix2d jacobian;
    Eigen::Matrix2d inverse_transpose;
    double det = 0.0;

    explicit AffineMap(const Triangle& tri);

    Vec2 to_physical(const Vec2& ref) const { return origin + jacobian * ref; }
    Vec2 to_reference(const Vec2& phys) const { return inverse_transpose.transpose() * (phys - origin); }
    Vec2 physical_gradient(const Vec2& ref_grad) const { return inverse_transpose * ref_grad; }
};

/// Reference coordinates of the point at parameter s in [0,1] along local edge k.
/// The edge runs from vertex (k+1)%3 to vertex (k+2)%3.
Vec2 reference_edge_point(int local_edge, double s);

} // namespace miura
