#pragma once

#include "miura/common.hpp"
#include "miura/mesh.hpp"

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace miura {

/// Continuous Lagrange space of degree 1 or 2 with `n_components` interleaved
/// components: global index = scalar_node * n_components + component.
/// Degree-2 scalar nodes are numbered vertices first, then edge midpoints.
class DofMap {
public:
    DofMap() = default;
    DofMap(std::shared_ptr<const Mesh> mesh, int degree, int n_components);

    const Mesh& mesh() const { return *mesh_; }
    const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
    int degree() const { return degree_; }
    int n_components() const { return n_components_; }
    int nodes_per_cell() const { return degree_ == 2 ? 6 : 3; }

    Index num_nodes() const { return static_cast<Index>(node_coords_.size()); }
    Index size() const { return num_nodes() * n_components_; }

    std::span<const Index> cell_nodes(Index tri) const
    {
        const auto n = static_cast<std::size_t>(nodes_per_cell());
        return {cell_nodes_.data() + static_cast<std::size_t>(tri) * n, n};
    }

    Index global(Index node, int component) const { return node * n_components_ + component; }

    const std::vector<Vec2>& node_coords() const { return node_coords_; }
    const std::vector<SideSet>& node_sides() const { return node_sides_; }

    /// Scalar nodes lying on any of the requested (non-periodic) sides, ascending.
    std::vector<Index> boundary_nodes(SideSet sides) const;

private:
    std::shared_ptr<const Mesh> mesh_;
    int degree_ = 0;
    int n_components_ = 0;
    std::vector<Index> cell_nodes_;
    std::vector<Vec2> node_coords_;
    std::vector<SideSet> node_sides_;
};

DofMap build_space(std::shared_ptr<const Mesh> mesh, int degree, int n_components);

// Component slots of the 3x2 gradient unknown inside one scalar node.
inline constexpr int kGradComponents = 6;
inline int grad_slot(int direction, int component) { return 3 * direction + component; }

/// Unknowns of the mixed system: G_h (P2, 6 comps), r_h (P1, 3 comps), and
/// the three multipliers enforcing a zero mean of r_h.
struct State {
    Eigen::VectorXd g;
    Eigen::VectorXd r;
    Vec3 mu = Vec3::Zero();
};

enum class BcMode { strong, weak };

const char* to_string(BcMode mode);

/// Gradient Dirichlet data G_D on the active sides of a rectangle.
struct BoundaryData {
    Rect rect;
    SideSet active;
    BcMode mode = BcMode::strong;
    std::function<Mat32(const Vec2&)> eval;
};

/// Sparse assignment of values to global dofs, sorted by dof.
struct DofAssignment {
    std::vector<Index> dofs;
    std::vector<double> values;
};

/// Lagrange interpolation of G_D at every vertex and edge-midpoint node on the
/// active sides. Throws if the evaluator fails or returns non-finite values.
DofAssignment interpolate_boundary(const DofMap& w, const BoundaryData& bc);

Mat32 evaluate_boundary(const BoundaryData& bc, const Vec2& p);

struct HypothesisReport {
    int samples = 0;
    double orthogonality = 0.0;     ///< max |G^x . G^y|
    double norm_identity = 0.0;     ///< max | |G^y|^2 (4 - |G^x|^2) / 4 - 1 |
    double norm_identity_abs = 0.0; ///< max | |G^y|^2 - 4 / (4 - |G^x|^2) |
    double gx_positive = 0.0;       ///< 1 if some sample has |G^x|^2 <= 0
    double gx_upper = 0.0;          ///< max(0, |G^x|^2 - 3)
    double gy_upper = 0.0;          ///< max(0, |G^y|^2 - 4)

    double max_violation() const;
    /// Name of the worst identity, or "" when every entry is zero.
    const char* worst() const;
};

HypothesisReport validate_hypothesis(const BoundaryData& bc, int n_samples);

/// Points distributed uniformly along the concatenated active sides.
std::vector<Vec2> boundary_samples(const Rect& rect, SideSet sides, int n_samples);

} // namespace miura
