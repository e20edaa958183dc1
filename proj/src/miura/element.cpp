#include "miura/element.hpp"

#include <cmath>

namespace miura {

const Quadrature& triangle_rule_degree6()
{
    static const Quadrature rule = [] {
        Quadrature q;
        q.degree = 6;
        auto add3 = [&](double a, double w) {
            const double b = 1.0 - 2.0 * a;
            q.points.emplace_back(a, a);
            q.points.emplace_back(b, a);
            q.points.emplace_back(a, b);
            for (int i = 0; i < 3; ++i) q.weights.push_back(0.5 * w);
        };
        auto add6 = [&](double a, double b, double w) {
            const double c = 1.0 - a - b;
            q.points.emplace_back(a, b);
            q.points.emplace_back(b, a);
            q.points.emplace_back(b, c);
            q.points.emplace_back(c, b);
            q.points.emplace_back(a, c);
            q.points.emplace_back(c, a);
            for (int i = 0; i < 6; ++i) q.weights.push_back(0.5 * w);
        };
        add3(0.249286745170910421291638553107019, 0.116786275726379366030690538687592);
        add3(0.063089014491502228340331602870819, 0.050844906370206816920936809106869);
        add6(0.053145049844816947353249671631398, 0.310352451033784405416607733956552,
             0.082851075618373575193553456420442);
        return q;
    }();
    return rule;
}

const LineQuadrature& gauss_line3()
{
    static const LineQuadrature rule = [] {
        LineQuadrature q;
        const double d = 0.5 * std::sqrt(0.6);
        q.points = {0.5 - d, 0.5, 0.5 + d};
        q.weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
        return q;
    }();
    return rule;
}

std::array<double, 3> p1_values(const Vec2& ref)
{
    return {1.0 - ref.x() - ref.y(), ref.x(), ref.y()};
}

std::array<Vec2, 3> p1_ref_gradients()
{
    return {Vec2(-1.0, -1.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
}

std::array<double, 6> p2_values(const Vec2& ref)
{
    const auto l = p1_values(ref);
    return {l[0] * (2.0 * l[0] - 1.0), l[1] * (2.0 * l[1] - 1.0), l[2] * (2.0 * l[2] - 1.0),
            4.0 * l[1] * l[2],          4.0 * l[2] * l[0],          4.0 * l[0] * l[1]};
}

std::array<Vec2, 6> p2_ref_gradients(const Vec2& ref)
{
    const auto l = p1_values(ref);
    const auto g = p1_ref_gradients();
    return {(4.0 * l[0] - 1.0) * g[0],
            (4.0 * l[1] - 1.0) * g[1],
            (4.0 * l[2] - 1.0) * g[2],
            4.0 * (l[1] * g[2] + l[2] * g[1]),
            4.0 * (l[2] * g[0] + l[0] * g[2]),
            4.0 * (l[0] * g[1] + l[1] * g[0])};
}

AffineMap::AffineMap(const Triangle& tri) : origin(tri.corners[0])
{
    jacobian.col(0) = tri.corners[1] - tri.corners[0];
    jacobian.col(1) = tri.corners[2] - tri.corners[0];
    det = jacobian.determinant();
    inverse_transpose = jacobian.inverse().transpose();
}

Vec2 reference_edge_point(int local_edge, double s)
{
    static const std::array<Vec2, 3> ref_vertices = {Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
    const Vec2& a = ref_vertices[(local_edge + 1) % 3];
    const Vec2& b = ref_vertices[(local_edge + 2) % 3];
    return a + s * (b - a);
}

} // namespace miura
