#include "miura/forms.hpp"

#include "miura/element.hpp"

#include <algorithm>
#include <array>

namespace miura {

Coefficient coefficient_x(const Vec3& gx)
{
    const double n2 = gx.squaredNorm();
    if (n2 >= 3.0) return {4.0, Vec3::Zero()};
    const double d = 4.0 - n2;
    return {4.0 / d, (8.0 / (d * d)) * gx};
}

Coefficient coefficient_y(const Vec3& gy)
{
    const double n2 = gy.squaredNorm();
    if (n2 <= 1.0) return {4.0, Vec3::Zero()};
    if (n2 >= 4.0) return {1.0, Vec3::Zero()};
    return {4.0 / n2, (-8.0 / (n2 * n2)) * gy};
}

double gamma_diagnostic(double p, double q)
{
    return (p + q) / (p * p + q * q);
}

const char* to_string(Linearization lin)
{
    return lin == Linearization::newton ? "newton" : "picard";
}

namespace {

std::vector<std::vector<Index>> node_adjacency(const DofMap& rows, const DofMap& cols)
{
    std::vector<std::vector<Index>> adj(static_cast<std::size_t>(cols.num_nodes()));
    const Index nt = rows.mesh().num_triangles();
    for (Index t = 0; t < nt; ++t) {
        for (Index c : cols.cell_nodes(t)) {
            for (Index r : rows.cell_nodes(t)) adj[c].push_back(r);
        }
    }
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    return adj;
}

SparseMatrix build_pattern(const DofMap& w, const DofMap& r)
{
    const Index r_off = w.size();
    const Index mu_off = w.size() + r.size();
    const Index n = mu_off + 3;

    const auto ww = node_adjacency(w, w); // rows of W around each W node
    const auto rw = node_adjacency(r, w); // rows of R around each W node
    const auto wr = node_adjacency(w, r); // rows of W around each R node

    std::size_t nnz = 0;
    for (Index b = 0; b < w.num_nodes(); ++b) nnz += kGradComponents * (kGradComponents * ww[b].size() + rw[b].size());
    for (Index k = 0; k < r.num_nodes(); ++k) nnz += 3 * (2 * wr[k].size() + 1);
    nnz += static_cast<std::size_t>(r.size());

    SparseMatrix p(n, n);
    p.reserve(static_cast<Index>(nnz));
    for (Index b = 0; b < w.num_nodes(); ++b) {
        for (int s = 0; s < kGradComponents; ++s) {
            const Index col = w.global(b, s);
            p.startVec(col);
            for (Index a : ww[b]) {
                for (int s2 = 0; s2 < kGradComponents; ++s2) p.insertBack(w.global(a, s2), col) = 0.0;
            }
            for (Index k : rw[b]) p.insertBack(r_off + r.global(k, s % 3), col) = 0.0;
        }
    }
    for (Index k = 0; k < r.num_nodes(); ++k) {
        for (int c = 0; c < 3; ++c) {
            const Index col = r_off + r.global(k, c);
            p.startVec(col);
            for (Index a : wr[k]) {
                p.insertBack(w.global(a, grad_slot(0, c)), col) = 0.0;
                p.insertBack(w.global(a, grad_slot(1, c)), col) = 0.0;
            }
            p.insertBack(mu_off + c, col) = 0.0;
        }
    }
    for (int c = 0; c < 3; ++c) {
        const Index col = mu_off + c;
        p.startVec(col);
        for (Index k = 0; k < r.num_nodes(); ++k) p.insertBack(r_off + r.global(k, c), col) = 0.0;
    }
    p.finalize();
    p.makeCompressed();
    return p;
}

/// Basis values on the reference element at every point of the degree-6 rule.
struct Tabulation {
    std::vector<std::array<double, 6>> n2;
    std::vector<std::array<Vec2, 6>> dn2;
    std::vector<std::array<double, 3>> n1;
};

const Tabulation& tabulation()
{
    static const Tabulation tab = [] {
        Tabulation t;
        for (const Vec2& q : triangle_rule_degree6().points) {
            t.n2.push_back(p2_values(q));
            t.dn2.push_back(p2_ref_gradients(q));
            t.n1.push_back(p1_values(q));
        }
        return t;
    }();
    return tab;
}

constexpr int kLocalG = 6 * kGradComponents; // 36
constexpr int kLocalR = 9;

using LocalGG = Eigen::Matrix<double, kLocalG, kLocalG>;
using LocalGR = Eigen::Matrix<double, kLocalG, kLocalR>;
using Op3 = Eigen::Matrix<double, 3, kLocalG>;
using VecG = Eigen::Matrix<double, kLocalG, 1>;

struct ElementIndices {
    std::array<Index, kLocalG> g{};
    std::array<Index, kLocalR> r{};
};

ElementIndices element_indices(const Discretization& disc, Index t)
{
    ElementIndices idx;
    const auto wn = disc.gradient_space().cell_nodes(t);
    const auto rn = disc.multiplier_space().cell_nodes(t);
    for (int a = 0; a < 6; ++a) {
        for (int s = 0; s < kGradComponents; ++s) idx.g[a * kGradComponents + s] = disc.gradient_space().global(wn[a], s);
    }
    for (int k = 0; k < 3; ++k) {
        for (int c = 0; c < 3; ++c) idx.r[k * 3 + c] = disc.r_offset() + disc.multiplier_space().global(rn[k], c);
    }
    return idx;
}

/// Curl operator rows: curl(phi) for each local G basis function.
Op3 curl_operator(const std::array<Vec2, 6>& dn)
{
    Op3 s = Op3::Zero();
    for (int a = 0; a < 6; ++a) {
        for (int c = 0; c < 3; ++c) {
            s(c, a * kGradComponents + grad_slot(0, c)) = dn[a].y();
            s(c, a * kGradComponents + grad_slot(1, c)) = -dn[a].x();
        }
    }
    return s;
}

class Accumulator {
public:
    Accumulator(SparseMatrix* matrix, Eigen::VectorXd* vec, const std::vector<char>* fixed)
        : matrix_(matrix), vec_(vec), fixed_(fixed)
    {
    }

    bool fixed_row(Index row) const { return fixed_ != nullptr && (*fixed_)[row] != 0; }

    void add(Index row, Index col, double v)
    {
        if (matrix_ != nullptr && !fixed_row(row)) matrix_->coeffRef(row, col) += v;
    }
    void add(Index row, double v)
    {
        if (vec_ != nullptr && !fixed_row(row)) (*vec_)[row] += v;
    }
    bool has_matrix() const { return matrix_ != nullptr; }
    bool has_vector() const { return vec_ != nullptr; }

private:
    SparseMatrix* matrix_;
    Eigen::VectorXd* vec_;
    const std::vector<char>* fixed_;
};

template <typename Local>
void scatter_block(Accumulator& acc, const Local& local, const Index* rows, const Index* cols)
{
    for (Eigen::Index j = 0; j < local.cols(); ++j) {
        for (Eigen::Index i = 0; i < local.rows(); ++i) {
            if (local(i, j) != 0.0) acc.add(rows[i], cols[j], local(i, j));
        }
    }
}

/// Couplings shared by every system: b(G~, r), b(G, r~), and the mean rows.
void add_constraint_blocks(Accumulator& acc, const ElementIndices& idx, const Discretization& disc,
                           const LocalGR& gr, const std::array<double, 3>& psi_int)
{
    scatter_block(acc, gr, idx.g.data(), idx.r.data());
    const Eigen::Matrix<double, kLocalR, kLocalG> rg = gr.transpose();
    scatter_block(acc, rg, idx.r.data(), idx.g.data());
    for (int k = 0; k < 3; ++k) {
        for (int c = 0; c < 3; ++c) {
            const Index rr = idx.r[k * 3 + c];
            acc.add(rr, disc.mu_offset() + c, psi_int[k]);
            acc.add(disc.mu_offset() + c, rr, psi_int[k]);
        }
    }
}

/// Boundary penalty (eta / h_e) int_e (G_h - I_h G_D) : G~ on active weak sides.
/// rhs_only assembles just the I_h G_D part with a positive sign.
void add_weak_boundary(Accumulator& acc, const Discretization& disc, const BoundaryData& bc, const Eigen::VectorXd* x,
                       double eta, bool rhs_only)
{
    const Mesh& mesh = disc.mesh();
    const auto& rule = gauss_line3();
    for (Index e : boundary_edges(mesh, bc.active)) {
        const Edge& edge = mesh.edges()[e];
        const Index t = edge.triangles[0];
        const int le = edge.local_index[0];
        const Triangle& tri = mesh.triangles()[t];
        const Vec2 pa = tri.corners[(le + 1) % 3];
        const Vec2 pb = tri.corners[(le + 2) % 3];
        const Mat32 gd_a = evaluate_boundary(bc, pa);
        const Mat32 gd_b = evaluate_boundary(bc, pb);
        const Mat32 gd_m = evaluate_boundary(bc, 0.5 * (pa + pb));
        const double scale = eta / edge.length;
        const ElementIndices idx = element_indices(disc, t);

        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double s = rule.points[q];
            const double ds = rule.weights[q] * edge.length;
            const auto n = p2_values(reference_edge_point(le, s));
            const Mat32 gd = (1.0 - s) * (1.0 - 2.0 * s) * gd_a + s * (2.0 * s - 1.0) * gd_b + 4.0 * s * (1.0 - s) * gd_m;
            Mat32 gh = Mat32::Zero();
            if (x != nullptr) {
                for (int a = 0; a < 6; ++a) {
                    for (int d = 0; d < 2; ++d) {
                        for (int c = 0; c < 3; ++c) gh(c, d) += n[a] * (*x)[idx.g[a * kGradComponents + grad_slot(d, c)]];
                    }
                }
            }
            const Mat32 diff = rhs_only ? Mat32(gd) : Mat32(gh - gd);
            for (int a = 0; a < 6; ++a) {
                for (int d = 0; d < 2; ++d) {
                    for (int c = 0; c < 3; ++c) {
                        const Index row = idx.g[a * kGradComponents + grad_slot(d, c)];
                        if (acc.has_vector()) acc.add(row, scale * ds * diff(c, d) * n[a]);
                        if (acc.has_matrix()) {
                            for (int b = 0; b < 6; ++b) {
                                acc.add(row, idx.g[b * kGradComponents + grad_slot(d, c)], scale * ds * n[a] * n[b]);
                            }
                        }
                    }
                }
            }
        }
    }
}

std::vector<char> fixed_mask(Index n, const DofAssignment& dir)
{
    std::vector<char> mask(static_cast<std::size_t>(n), 0);
    for (Index d : dir.dofs) mask[d] = 1;
    return mask;
}

void assemble_nonlinear(const Discretization& disc, const BoundaryData& bc, const Eigen::VectorXd& x, double eta,
                        Linearization lin, Eigen::VectorXd* res, SparseMatrix* jac, std::vector<Index>* fixed_out)
{
    MIURA_REQUIRE(x.size() == disc.size(), InvalidArgument, "assemble: state size does not match the discretization");
    MIURA_REQUIRE(eta >= 0.0, InvalidArgument, "assemble: eta must be non-negative");

    const DofAssignment dir = dirichlet_values(disc, bc);
    const std::vector<char> mask = fixed_mask(disc.size(), dir);
    if (res != nullptr) res->setZero(disc.size());
    if (jac != nullptr) {
        *jac = disc.pattern();
        jac->coeffs().setZero();
    }
    Accumulator acc(jac, res, &mask);

    const auto& rule = triangle_rule_degree6();
    const auto& tab = tabulation();
    const Mesh& mesh = disc.mesh();
    const bool newton = lin == Linearization::newton;

    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const AffineMap map(mesh.triangles()[t]);
        const double absdet = std::abs(map.det);
        const ElementIndices idx = element_indices(disc, t);

        Eigen::Matrix<double, 6, kGradComponents> gl;
        for (int a = 0; a < 6; ++a) {
            for (int s = 0; s < kGradComponents; ++s) gl(a, s) = x[idx.g[a * kGradComponents + s]];
        }
        Eigen::Matrix<double, 3, 3> rl;
        for (int k = 0; k < 3; ++k) {
            for (int c = 0; c < 3; ++c) rl(k, c) = x[idx.r[k * 3 + c]];
        }
        const Vec3 mu = x.segment<3>(disc.mu_offset());

        LocalGG kgg = LocalGG::Zero();
        LocalGR kgr = LocalGR::Zero();
        VecG fg = VecG::Zero();
        Eigen::Matrix<double, kLocalR, 1> fr = Eigen::Matrix<double, kLocalR, 1>::Zero();
        std::array<double, 3> psi_int{0.0, 0.0, 0.0};
        Vec3 fmu = Vec3::Zero();

        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double wt = rule.weights[q] * absdet;
            const auto& n = tab.n2[q];
            const auto& psi = tab.n1[q];
            std::array<Vec2, 6> dn;
            for (int a = 0; a < 6; ++a) dn[a] = map.physical_gradient(tab.dn2[q][a]);

            Vec3 gx = Vec3::Zero(), gy = Vec3::Zero();
            Vec3 gx_x = Vec3::Zero(), gx_y = Vec3::Zero(), gy_x = Vec3::Zero(), gy_y = Vec3::Zero();
            for (int a = 0; a < 6; ++a) {
                const Vec3 ax = gl.row(a).segment<3>(0).transpose();
                const Vec3 ay = gl.row(a).segment<3>(3).transpose();
                gx += n[a] * ax;
                gy += n[a] * ay;
                gx_x += dn[a].x() * ax;
                gx_y += dn[a].y() * ax;
                gy_x += dn[a].x() * ay;
                gy_y += dn[a].y() * ay;
            }
            Vec3 rq = Vec3::Zero();
            for (int k = 0; k < 3; ++k) rq += psi[k] * rl.row(k).transpose();

            const Coefficient cp = coefficient_x(gx);
            const Coefficient cq = coefficient_y(gy);
            const Vec3 wv = cp.value * gx_x + cq.value * gy_y;
            const Vec3 curl = gx_y - gy_x;

            // Abar(G) applied to each basis function, and the curl of each.
            Op3 top = Op3::Zero();
            for (int a = 0; a < 6; ++a) {
                for (int c = 0; c < 3; ++c) {
                    top(c, a * kGradComponents + grad_slot(0, c)) = cp.value * dn[a].x();
                    top(c, a * kGradComponents + grad_slot(1, c)) = cq.value * dn[a].y();
                }
            }
            const Op3 sop = curl_operator(dn);

            for (int k = 0; k < 3; ++k) psi_int[k] += wt * psi[k];

            if (res != nullptr) {
                fg += wt * (top.transpose() * wv + sop.transpose() * (eta * curl + rq));
                for (int k = 0; k < 3; ++k) {
                    for (int c = 0; c < 3; ++c) fr[k * 3 + c] += wt * psi[k] * (curl[c] + mu[c]);
                }
                fmu += wt * rq;
            }
            if (jac != nullptr) {
                kgg.noalias() += wt * (top.transpose() * top + eta * sop.transpose() * sop);
                if (newton) {
                    // Derivative of the coefficients: v_j = N_b dp/dG^x_c' (or dq/dG^y_c').
                    VecG vx = VecG::Zero(), vy = VecG::Zero(), ux = VecG::Zero(), uy = VecG::Zero();
                    for (int a = 0; a < 6; ++a) {
                        for (int c = 0; c < 3; ++c) {
                            vx[a * kGradComponents + grad_slot(0, c)] = n[a] * cp.grad[c];
                            vy[a * kGradComponents + grad_slot(1, c)] = n[a] * cq.grad[c];
                            ux[a * kGradComponents + grad_slot(0, c)] = wv[c] * dn[a].x();
                            uy[a * kGradComponents + grad_slot(1, c)] = wv[c] * dn[a].y();
                        }
                    }
                    const VecG tgx = top.transpose() * gx_x;
                    const VecG tgy = top.transpose() * gy_y;
                    kgg.noalias() += wt * ((tgx + ux) * vx.transpose() + (tgy + uy) * vy.transpose());
                }
                for (int k = 0; k < 3; ++k) {
                    for (int c = 0; c < 3; ++c) kgr.col(k * 3 + c) += wt * psi[k] * sop.row(c).transpose();
                }
            }
        }

        if (res != nullptr) {
            for (int i = 0; i < kLocalG; ++i) acc.add(idx.g[i], fg[i]);
            for (int i = 0; i < kLocalR; ++i) acc.add(idx.r[i], fr[i]);
            for (int c = 0; c < 3; ++c) acc.add(disc.mu_offset() + c, fmu[c]);
        }
        if (jac != nullptr) {
            scatter_block(acc, kgg, idx.g.data(), idx.g.data());
            Accumulator mat_only(jac, nullptr, &mask);
            add_constraint_blocks(mat_only, idx, disc, kgr, psi_int);
        }
    }

    if (bc.mode == BcMode::weak) {
        Accumulator bacc(jac, res, &mask);
        add_weak_boundary(bacc, disc, bc, &x, eta, false);
    }

    for (std::size_t i = 0; i < dir.dofs.size(); ++i) {
        const Index d = dir.dofs[i];
        if (res != nullptr) (*res)[d] = x[d] - dir.values[i];
        if (jac != nullptr) jac->coeffRef(d, d) = 1.0;
    }
    if (fixed_out != nullptr) *fixed_out = dir.dofs;
}

} // namespace

Discretization::Discretization(std::shared_ptr<const Mesh> mesh)
    : mesh_(std::move(mesh)), w_(mesh_, 2, kGradComponents), r_(mesh_, 1, 3)
{
    pattern_ = build_pattern(w_, r_);
}

Eigen::VectorXd Discretization::pack(const State& s) const
{
    MIURA_REQUIRE(s.g.size() == w_.size() && s.r.size() == r_.size(), InvalidArgument,
                  "pack: state dimensions do not match the discretization");
    Eigen::VectorXd x(size());
    x.head(w_.size()) = s.g;
    x.segment(r_offset(), r_.size()) = s.r;
    x.tail<3>() = s.mu;
    return x;
}

State Discretization::unpack(const Eigen::VectorXd& x) const
{
    MIURA_REQUIRE(x.size() == size(), InvalidArgument, "unpack: vector size does not match the discretization");
    State s;
    s.g = x.head(w_.size());
    s.r = x.segment(r_offset(), r_.size());
    s.mu = x.tail<3>();
    return s;
}

State Discretization::zero_state() const
{
    State s;
    s.g = Eigen::VectorXd::Zero(w_.size());
    s.r = Eigen::VectorXd::Zero(r_.size());
    return s;
}

DofAssignment dirichlet_values(const Discretization& disc, const BoundaryData& bc)
{
    if (bc.mode == BcMode::weak) return {};
    return interpolate_boundary(disc.gradient_space(), bc);
}

Eigen::VectorXd assemble_residual(const Discretization& disc, const BoundaryData& bc, const State& state, double eta)
{
    Eigen::VectorXd res;
    assemble_nonlinear(disc, bc, disc.pack(state), eta, Linearization::newton, &res, nullptr, nullptr);
    return res;
}

SparseMatrix assemble_jacobian(const Discretization& disc, const BoundaryData& bc, const State& state, double eta,
                               Linearization lin)
{
    SparseMatrix jac;
    assemble_nonlinear(disc, bc, disc.pack(state), eta, lin, nullptr, &jac, nullptr);
    return jac;
}

AssembledSystem assemble_system(const Discretization& disc, const BoundaryData& bc, const State& state, double eta,
                                Linearization lin)
{
    AssembledSystem sys;
    assemble_nonlinear(disc, bc, disc.pack(state), eta, lin, &sys.residual, &sys.jacobian, &sys.dirichlet_dofs);
    return sys;
}

LinearSystem assemble_initial_guess_system(const Discretization& disc, const BoundaryData& bc, double eta)
{
    MIURA_REQUIRE(eta >= 0.0, InvalidArgument, "assemble: eta must be non-negative");
    const DofAssignment dir = dirichlet_values(disc, bc);
    const std::vector<char> mask = fixed_mask(disc.size(), dir);

    LinearSystem sys;
    sys.matrix = disc.pattern();
    sys.matrix.coeffs().setZero();
    sys.rhs = Eigen::VectorXd::Zero(disc.size());
    Accumulator acc(&sys.matrix, nullptr, &mask);

    const auto& rule = triangle_rule_degree6();
    const auto& tab = tabulation();
    const Mesh& mesh = disc.mesh();
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const AffineMap map(mesh.triangles()[t]);
        const double absdet = std::abs(map.det);
        const ElementIndices idx = element_indices(disc, t);
        LocalGG kgg = LocalGG::Zero();
        LocalGR kgr = LocalGR::Zero();
        std::array<double, 3> psi_int{0.0, 0.0, 0.0};
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double wt = rule.weights[q] * absdet;
            std::array<Vec2, 6> dn;
            for (int a = 0; a < 6; ++a) dn[a] = map.physical_gradient(tab.dn2[q][a]);
            for (int a = 0; a < 6; ++a) {
                for (int b = 0; b < 6; ++b) {
                    const double lap = wt * dn[a].dot(dn[b]);
                    for (int s = 0; s < kGradComponents; ++s) kgg(a * kGradComponents + s, b * kGradComponents + s) += lap;
                }
            }
            const Op3 sop = curl_operator(dn);
            kgg.noalias() += wt * eta * sop.transpose() * sop;
            for (int k = 0; k < 3; ++k) {
                psi_int[k] += wt * tab.n1[q][k];
                for (int c = 0; c < 3; ++c) kgr.col(k * 3 + c) += wt * tab.n1[q][k] * sop.row(c).transpose();
            }
        }
        scatter_block(acc, kgg, idx.g.data(), idx.g.data());
        add_constraint_blocks(acc, idx, disc, kgr, psi_int);
    }

    if (bc.mode == BcMode::weak) {
        Accumulator macc(&sys.matrix, nullptr, &mask);
        add_weak_boundary(macc, disc, bc, nullptr, eta, false);
        Accumulator racc(nullptr, &sys.rhs, &mask);
        add_weak_boundary(racc, disc, bc, nullptr, eta, true);
    }
    for (std::size_t i = 0; i < dir.dofs.size(); ++i) {
        sys.matrix.coeffRef(dir.dofs[i], dir.dofs[i]) = 1.0;
        sys.rhs[dir.dofs[i]] = dir.values[i];
    }
    sys.dirichlet_dofs = dir.dofs;
    return sys;
}

namespace {

template <typename Kernel>
SparseMatrix assemble_scalar(const DofMap& space, Kernel kernel)
{
    const auto& rule = triangle_rule_degree6();
    const auto& tab = tabulation();
    const Mesh& mesh = space.mesh();
    MIURA_REQUIRE(space.degree() == 2, InvalidArgument, "scalar assembly expects a degree-2 space");
    std::vector<Eigen::Triplet<double, Index>> trip;
    trip.reserve(static_cast<std::size_t>(mesh.num_triangles()) * 36);
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const AffineMap map(mesh.triangles()[t]);
        const double absdet = std::abs(map.det);
        const auto nodes = space.cell_nodes(t);
        Eigen::Matrix<double, 6, 6> local = Eigen::Matrix<double, 6, 6>::Zero();
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            std::array<Vec2, 6> dn;
            for (int a = 0; a < 6; ++a) dn[a] = map.physical_gradient(tab.dn2[q][a]);
            for (int a = 0; a < 6; ++a) {
                for (int b = 0; b < 6; ++b) local(a, b) += rule.weights[q] * absdet * kernel(tab.n2[q], dn, a, b);
            }
        }
        for (int a = 0; a < 6; ++a) {
            for (int b = 0; b < 6; ++b) trip.emplace_back(nodes[a], nodes[b], local(a, b));
        }
    }
    SparseMatrix m(space.num_nodes(), space.num_nodes());
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

} // namespace

SparseMatrix assemble_scalar_mass(const DofMap& space)
{
    return assemble_scalar(space, [](const auto& n, const auto&, int a, int b) { return n[a] * n[b]; });
}

SparseMatrix assemble_scalar_stiffness(const DofMap& space)
{
    return assemble_scalar(space, [](const auto&, const auto& dn, int a, int b) { return dn[a].dot(dn[b]); });
}

} // namespace miura
