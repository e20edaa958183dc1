#include "miura/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/UmfPackSupport>

#include <cmath>
#include <string>

namespace miura {

const char* to_string(ResidualNorm norm)
{
    return norm == ResidualNorm::h1_riesz ? "h1" : "euclidean";
}

void SolverConfig::validate() const
{
    MIURA_REQUIRE(tol_rel > 0.0, InvalidArgument, "solver: tol must be > 0");
    MIURA_REQUIRE(tol_abs >= 0.0, InvalidArgument, "solver: atol must be >= 0");
    MIURA_REQUIRE(max_iter >= 1, InvalidArgument, "solver: max_iter must be >= 1");
    MIURA_REQUIRE(eta > 0.0, InvalidArgument, "solver: eta must be > 0");
}

struct SparseLu::Impl {
    Eigen::UmfPackLU<SparseMatrix> lu;
    SparseMatrix a;

    Impl()
    {
        // The pattern is structurally symmetric; nested dissection keeps the fill low on periodic strips.
        lu.umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
        lu.umfpackControl()(UMFPACK_ORDERING) = UMFPACK_ORDERING_METIS;
    }
};

SparseLu::SparseLu() : impl_(std::make_unique<Impl>()) {}
SparseLu::~SparseLu() = default;
SparseLu::SparseLu(SparseLu&&) noexcept = default;
SparseLu& SparseLu::operator=(SparseLu&&) noexcept = default;

namespace {

void check_structure(const SparseMatrix& a)
{
    std::vector<char> row_hit(static_cast<std::size_t>(a.rows()), 0);
    for (Index j = 0; j < a.outerSize(); ++j) {
        bool col_hit = false;
        for (SparseMatrix::InnerIterator it(a, j); it; ++it) {
            if (it.value() != 0.0) {
                col_hit = true;
                row_hit[it.row()] = 1;
            }
        }
        if (!col_hit) throw NumericError("structurally singular matrix: empty column " + std::to_string(j));
    }
    for (Index i = 0; i < a.rows(); ++i) {
        if (!row_hit[i]) throw NumericError("structurally singular matrix: empty row " + std::to_string(i));
    }
}

} // namespace

void SparseLu::factorize(const SparseMatrix& a)
{
    MIURA_REQUIRE(a.rows() == a.cols(), InvalidArgument, "linear solve: matrix is not square");
    check_structure(a);
    impl_->a = a;
    impl_->a.makeCompressed();
    impl_->lu.compute(impl_->a);
    if (impl_->lu.info() != Eigen::Success) {
        // Locate the first zero pivot of U and map it back to an original column.
        std::string where;
        const auto& u = impl_->lu.matrixU();
        const auto& q = impl_->lu.permutationQ();
        for (Index k = 0; k < u.rows(); ++k) {
            if (u.coeff(k, k) == 0.0) {
                where = " (zero pivot at column " + std::to_string(q[k]) + ")";
                break;
            }
        }
        throw NumericError("sparse LU factorization failed: numerically singular matrix" + where);
    }
}

Eigen::VectorXd SparseLu::solve(const Eigen::VectorXd& b) const
{
    MIURA_REQUIRE(b.size() == impl_->a.rows(), InvalidArgument, "linear solve: dimension mismatch");
    const double bnorm = b.norm();
    if (bnorm == 0.0) return Eigen::VectorXd::Zero(b.size());
    Eigen::VectorXd x = impl_->lu.solve(b);
    for (int sweep = 0; sweep < 3; ++sweep) {
        const Eigen::VectorXd r = b - impl_->a * x;
        if (!r.allFinite() || !x.allFinite()) throw NumericError("sparse LU solve produced non-finite values");
        if (r.norm() <= 1e-12 * bnorm) break;
        x += impl_->lu.solve(r);
    }
    return x;
}

Eigen::VectorXd solve_linear_saddle(const SparseMatrix& a, const Eigen::VectorXd& rhs)
{
    SparseLu lu;
    lu.factorize(a);
    return lu.solve(rhs);
}

void eliminate_dirichlet_columns(SparseMatrix& a, Eigen::VectorXd& rhs, const std::vector<Index>& dofs)
{
    for (Index b : dofs) {
        const double xb = rhs[b];
        for (SparseMatrix::InnerIterator it(a, b); it; ++it) {
            if (it.row() == b) continue;
            rhs[it.row()] -= it.value() * xb;
            it.valueRef() = 0.0;
        }
    }
}

struct ResidualNormEvaluator::Impl {
    ResidualNorm kind;
    const DofMap* w = nullptr;
    std::vector<char> fixed;
    std::vector<Index> free_nodes;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
};

ResidualNormEvaluator::ResidualNormEvaluator(const Discretization& disc, const std::vector<Index>& dirichlet_dofs,
                                             ResidualNorm kind)
    : impl_(std::make_unique<Impl>())
{
    impl_->kind = kind;
    impl_->w = &disc.gradient_space();
    impl_->fixed.assign(static_cast<std::size_t>(disc.size()), 0);
    for (Index d : dirichlet_dofs) impl_->fixed[d] = 1;
    if (kind == ResidualNorm::euclidean) return;

    const DofMap& w = disc.gradient_space();
    std::vector<Index> pos(static_cast<std::size_t>(w.num_nodes()), -1);
    for (Index n = 0; n < w.num_nodes(); ++n) {
        if (!impl_->fixed[w.global(n, 0)]) {
            pos[n] = static_cast<Index>(impl_->free_nodes.size());
            impl_->free_nodes.push_back(n);
        }
    }
    const SparseMatrix full = SparseMatrix(assemble_scalar_mass(w) + assemble_scalar_stiffness(w));
    std::vector<Eigen::Triplet<double, Index>> trip;
    for (Index j = 0; j < full.outerSize(); ++j) {
        if (pos[j] < 0) continue;
        for (SparseMatrix::InnerIterator it(full, j); it; ++it) {
            if (pos[it.row()] >= 0) trip.emplace_back(pos[it.row()], pos[j], it.value());
        }
    }
    const auto n = static_cast<Index>(impl_->free_nodes.size());
    SparseMatrix m(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
    impl_->ldlt.compute(m);
    if (impl_->ldlt.info() != Eigen::Success) throw NumericError("H1 inner-product matrix factorization failed");
}

ResidualNormEvaluator::~ResidualNormEvaluator() = default;

double ResidualNormEvaluator::operator()(const Eigen::VectorXd& residual) const
{
    const Impl& im = *impl_;
    if (im.kind == ResidualNorm::euclidean) {
        double s = 0.0;
        for (Index i = 0; i < residual.size(); ++i) {
            if (!im.fixed[i]) s += residual[i] * residual[i];
        }
        return std::sqrt(s);
    }
    const auto n = static_cast<Index>(im.free_nodes.size());
    double s = 0.0;
    Eigen::VectorXd f(n);
    for (int comp = 0; comp < kGradComponents; ++comp) {
        for (Index k = 0; k < n; ++k) f[k] = residual[im.w->global(im.free_nodes[k], comp)];
        const Eigen::VectorXd z = im.ldlt.solve(f);
        s += z.dot(f);
    }
    return std::sqrt(std::max(s, 0.0));
}

double residual_norm_h1(const Discretization& disc, const std::vector<Index>& dirichlet_dofs,
                        const Eigen::VectorXd& residual)
{
    return ResidualNormEvaluator(disc, dirichlet_dofs, ResidualNorm::h1_riesz)(residual);
}

State initial_guess(const Discretization& disc, const BoundaryData& bc, double eta)
{
    LinearSystem sys = assemble_initial_guess_system(disc, bc, eta);
    eliminate_dirichlet_columns(sys.matrix, sys.rhs, sys.dirichlet_dofs);
    return disc.unpack(solve_linear_saddle(sys.matrix, sys.rhs));
}

NewtonResult newton_solve(const Discretization& disc, const BoundaryData& bc, const SolverConfig& config,
                          const State& state0)
{
    config.validate();
    Eigen::VectorXd x = disc.pack(state0);
    const DofAssignment dir = dirichlet_values(disc, bc);
    for (std::size_t i = 0; i < dir.dofs.size(); ++i) x[dir.dofs[i]] = dir.values[i];

    const ResidualNormEvaluator norm(disc, dir.dofs, config.residual_norm);
    NewtonReport report;

    auto residual_at = [&](const Eigen::VectorXd& v) { return assemble_residual(disc, bc, disc.unpack(v), config.eta); };

    Eigen::VectorXd f = residual_at(x);
    double fn = norm(f);
    MIURA_REQUIRE(std::isfinite(fn), NumericError, "newton: initial residual is not finite");
    report.residual_norms.push_back(fn);
    const double f0 = fn;
    auto done = [&](double v) { return v <= config.tol_abs || v <= config.tol_rel * f0; };

    report.converged = done(fn);
    while (!report.converged && report.iterations < config.max_iter) {
        SparseMatrix jac = assemble_jacobian(disc, bc, disc.unpack(x), config.eta, config.linearization);
        Eigen::VectorXd rhs = -f;
        eliminate_dirichlet_columns(jac, rhs, dir.dofs);
        const Eigen::VectorXd delta = solve_linear_saddle(jac, rhs);

        double step = 1.0;
        Eigen::VectorXd x_new = x + delta;
        Eigen::VectorXd f_new = residual_at(x_new);
        double fn_new = norm(f_new);
        if (config.line_search) {
            for (int halving = 0; halving < 8 && !(fn_new < fn); ++halving) {
                step *= 0.5;
                x_new = x + step * delta;
                f_new = residual_at(x_new);
                fn_new = norm(f_new);
            }
        }
        MIURA_REQUIRE(std::isfinite(fn_new), NumericError, "newton: residual became non-finite");
        x = std::move(x_new);
        f = std::move(f_new);
        fn = fn_new;
        report.iterations += 1;
        report.residual_norms.push_back(fn);
        report.converged = done(fn);
    }
    report.final_residual = fn;
    return {disc.unpack(x), report};
}

} // namespace miura
