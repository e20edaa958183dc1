#include "miura/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace miura {

DofMap::DofMap(std::shared_ptr<const Mesh> mesh, int degree, int n_components)
    : mesh_(std::move(mesh)), degree_(degree), n_components_(n_components)
{
    MIURA_REQUIRE(mesh_ != nullptr, InvalidArgument, "build_space: null mesh");
    MIURA_REQUIRE(degree == 1 || degree == 2, InvalidArgument,
                  "build_space: unsupported degree " + std::to_string(degree));
    MIURA_REQUIRE(n_components >= 1, InvalidArgument, "build_space: n_components must be >= 1");

    const Mesh& m = *mesh_;
    node_coords_ = m.vertices();
    node_sides_ = m.vertex_sides();
    if (degree == 2) {
        for (const Edge& e : m.edges()) {
            node_coords_.push_back(e.midpoint);
            SideSet s;
            if (e.side) s.insert(*e.side);
            node_sides_.push_back(s);
        }
    }

    const int per_cell = nodes_per_cell();
    cell_nodes_.reserve(static_cast<std::size_t>(m.num_triangles()) * per_cell);
    for (const Triangle& t : m.triangles()) {
        for (int k = 0; k < 3; ++k) cell_nodes_.push_back(t.vertices[k]);
        if (degree == 2) {
            for (int k = 0; k < 3; ++k) cell_nodes_.push_back(m.num_vertices() + t.edges[k]);
        }
    }
}

DofMap build_space(std::shared_ptr<const Mesh> mesh, int degree, int n_components)
{
    return DofMap(std::move(mesh), degree, n_components);
}

std::vector<Index> DofMap::boundary_nodes(SideSet sides) const
{
    std::vector<Index> out;
    for (Index n = 0; n < num_nodes(); ++n) {
        if (node_sides_[n].intersects(sides)) out.push_back(n);
    }
    return out;
}

const char* to_string(BcMode mode)
{
    return mode == BcMode::strong ? "strong" : "weak";
}

Mat32 evaluate_boundary(const BoundaryData& bc, const Vec2& p)
{
    MIURA_REQUIRE(static_cast<bool>(bc.eval), InvalidArgument, "boundary data has no evaluator");
    Mat32 value;
    try {
        value = bc.eval(p);
    } catch (const std::exception& ex) {
        throw Error("boundary data evaluation failed at (" + std::to_string(p.x()) + ", " +
                    std::to_string(p.y()) + "): " + ex.what());
    }
    if (!value.allFinite()) {
        throw Error("boundary data is not finite at (" + std::to_string(p.x()) + ", " + std::to_string(p.y()) +
                    ")");
    }
    return value;
}

DofAssignment interpolate_boundary(const DofMap& w, const BoundaryData& bc)
{
    MIURA_REQUIRE(w.n_components() == kGradComponents, InvalidArgument,
                  "interpolate_boundary: expected a 6-component space");
    DofAssignment out;
    for (Index node : w.boundary_nodes(bc.active)) {
        const Mat32 gd = evaluate_boundary(bc, w.node_coords()[node]);
        for (int d = 0; d < 2; ++d) {
            for (int c = 0; c < 3; ++c) {
                out.dofs.push_back(w.global(node, grad_slot(d, c)));
                out.values.push_back(gd(c, d));
            }
        }
    }
    return out;
}

std::vector<Vec2> boundary_samples(const Rect& rect, SideSet sides, int n_samples)
{
    struct Segment {
        Vec2 a, b;
    };
    std::vector<Segment> segs;
    const Vec2 ll(rect.x_min, rect.y_min), lr(rect.x_max, rect.y_min);
    const Vec2 ul(rect.x_min, rect.y_max), ur(rect.x_max, rect.y_max);
    if (sides.contains(Side::left)) segs.push_back({ll, ul});
    if (sides.contains(Side::right)) segs.push_back({lr, ur});
    if (sides.contains(Side::bottom)) segs.push_back({ll, lr});
    if (sides.contains(Side::top)) segs.push_back({ul, ur});

    std::vector<Vec2> out;
    if (segs.empty() || n_samples <= 0) return out;
    double total = 0.0;
    for (const auto& s : segs) total += (s.b - s.a).norm();
    out.reserve(static_cast<std::size_t>(n_samples));
    for (int k = 0; k < n_samples; ++k) {
        double t = (k + 0.5) / n_samples * total;
        for (const auto& s : segs) {
            const double len = (s.b - s.a).norm();
            if (t <= len || &s == &segs.back()) {
                out.push_back(s.a + std::min(t / len, 1.0) * (s.b - s.a));
                break;
            }
            t -= len;
        }
    }
    return out;
}

double HypothesisReport::max_violation() const
{
    return std::max({orthogonality, norm_identity, gx_positive, gx_upper, gy_upper});
}

const char* HypothesisReport::worst() const
{
    const std::pair<double, const char*> entries[] = {
        {orthogonality, "orthogonality G^x.G^y = 0"},
        {norm_identity, "norm identity |G^y|^2 = 4/(4-|G^x|^2)"},
        {gx_positive, "lower bound 0 < |G^x|^2"},
        {gx_upper, "upper bound |G^x|^2 <= 3"},
        {gy_upper, "upper bound |G^y|^2 <= 4"},
    };
    const auto* best = std::max_element(std::begin(entries), std::end(entries),
                                         [](const auto& a, const auto& b) { return a.first < b.first; });
    return best->first > 0.0 ? best->second : "";
}

HypothesisReport validate_hypothesis(const BoundaryData& bc, int n_samples)
{
    MIURA_REQUIRE(n_samples >= 1, InvalidArgument, "validate_hypothesis: n_samples must be >= 1");
    HypothesisReport rep;
    for (const Vec2& p : boundary_samples(bc.rect, bc.active, n_samples)) {
        const Mat32 g = evaluate_boundary(bc, p);
        const double gx2 = g.col(0).squaredNorm();
        const double gy2 = g.col(1).squaredNorm();
        rep.samples += 1;
        rep.orthogonality = std::max(rep.orthogonality, std::abs(g.col(0).dot(g.col(1))));
        rep.norm_identity = std::max(rep.norm_identity, std::abs(gy2 * (4.0 - gx2) / 4.0 - 1.0));
        rep.norm_identity_abs = std::max(rep.norm_identity_abs, std::abs(gy2 - 4.0 / (4.0 - gx2)));
        if (!(gx2 > 0.0)) rep.gx_positive = 1.0;
        rep.gx_upper = std::max(rep.gx_upper, gx2 - 3.0);
        rep.gy_upper = std::max(rep.gy_upper, gy2 - 4.0);
    }
    return rep;
}

} // namespace miura
