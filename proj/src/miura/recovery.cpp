#include "miura/recovery.hpp"

#include "miura/element.hpp"

namespace miura {

SurfaceRecovery::SurfaceRecovery(std::shared_ptr<const Mesh> mesh) : space_(std::move(mesh), 2, 1)
{
    stiffness_ = assemble_scalar_stiffness(space_);
    const SparseMatrix mass = assemble_scalar_mass(space_);
    node_integrals_ = mass * Eigen::VectorXd::Ones(space_.num_nodes());

    const Index n = space_.num_nodes();
    std::vector<Eigen::Triplet<double, Index>> trip;
    trip.reserve(static_cast<std::size_t>(stiffness_.nonZeros() + 2 * n));
    for (Index j = 0; j < stiffness_.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(stiffness_, j); it; ++it) trip.emplace_back(it.row(), j, it.value());
    }
    for (Index a = 0; a < n; ++a) {
        trip.emplace_back(a, n, node_integrals_[a]);
        trip.emplace_back(n, a, node_integrals_[a]);
    }
    SparseMatrix bordered(n + 1, n + 1);
    bordered.setFromTriplets(trip.begin(), trip.end());
    lu_.factorize(bordered);
}

Eigen::MatrixXd SurfaceRecovery::load_vectors(const DofMap& w, const Eigen::VectorXd& g) const
{
    MIURA_REQUIRE(w.n_components() == kGradComponents && g.size() == w.size(), InvalidArgument,
                  "recover_surface: gradient vector does not match its space");
    MIURA_REQUIRE(w.num_nodes() == space_.num_nodes(), InvalidArgument,
                  "recover_surface: gradient space lives on a different mesh");
    const auto& rule = triangle_rule_degree6();
    const Mesh& mesh = space_.mesh();
    Eigen::MatrixXd load = Eigen::MatrixXd::Zero(space_.num_nodes(), 3);
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const AffineMap map(mesh.triangles()[t]);
        const double absdet = std::abs(map.det);
        const auto nodes = w.cell_nodes(t);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto n = p2_values(rule.points[q]);
            const auto dref = p2_ref_gradients(rule.points[q]);
            Mat32 gq = Mat32::Zero();
            for (int a = 0; a < 6; ++a) {
                for (int d = 0; d < 2; ++d) {
                    for (int c = 0; c < 3; ++c) gq(c, d) += n[a] * g[w.global(nodes[a], grad_slot(d, c))];
                }
            }
            const double wt = rule.weights[q] * absdet;
            for (int a = 0; a < 6; ++a) {
                const Vec2 dn = map.physical_gradient(dref[a]);
                load.row(nodes[a]) += wt * (gq * dn).transpose();
            }
        }
    }
    return load;
}

SurfaceField SurfaceRecovery::recover(const DofMap& w, const Eigen::VectorXd& g) const
{
    const Eigen::MatrixXd load = load_vectors(w, g);
    const Index n = space_.num_nodes();
    SurfaceField out;
    out.phi.resize(3 * n);
    for (int c = 0; c < 3; ++c) {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
        rhs.head(n) = load.col(c);
        const Eigen::VectorXd sol = lu_.solve(rhs);
        for (Index a = 0; a < n; ++a) out.phi[3 * a + c] = sol[a];
        out.mu[c] = sol[n];
    }
    return out;
}

double SurfaceRecovery::normal_equation_residual(const DofMap& w, const Eigen::VectorXd& g,
                                                 const SurfaceField& surface) const
{
    const Eigen::MatrixXd load = load_vectors(w, g);
    const Index n = space_.num_nodes();
    double worst = 0.0;
    for (int c = 0; c < 3; ++c) {
        Eigen::VectorXd phi(n);
        for (Index a = 0; a < n; ++a) phi[a] = surface.phi[3 * a + c];
        worst = std::max(worst, (stiffness_ * phi - load.col(c)).cwiseAbs().maxCoeff());
    }
    return worst;
}

Vec3 SurfaceRecovery::mean_integral(const SurfaceField& surface) const
{
    Vec3 m = Vec3::Zero();
    for (Index a = 0; a < space_.num_nodes(); ++a) {
        for (int c = 0; c < 3; ++c) m[c] += node_integrals_[a] * surface.phi[3 * a + c];
    }
    return m;
}

SurfaceField recover_surface(const DofMap& gradient_space, const Eigen::VectorXd& g)
{
    return SurfaceRecovery(gradient_space.mesh_ptr()).recover(gradient_space, g);
}

} // namespace miura
