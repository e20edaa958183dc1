#include "miura/cases.hpp"
#include "miura/forms.hpp"
#include "miura/solver.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

using namespace miura;

namespace {

constexpr double kPi = std::numbers::pi;

SparseMatrix sparse_from(const Eigen::MatrixXd& d)
{
    return d.sparseView();
}

struct Solved {
    std::shared_ptr<const Discretization> disc;
    NewtonResult result;
};

Solved solve(const CaseSpec& cs, SolverConfig cfg = {})
{
    auto disc = std::make_shared<const Discretization>(cs.build_mesh());
    const State s0 = initial_guess(*disc, cs.bc, cfg.eta);
    return {disc, newton_solve(*disc, cs.bc, cfg, s0)};
}

// int r_h per component, from the P1 nodal values (lumped-free exact P1 integral).
Vec3 integral_of_r(const Discretization& disc, const State& s)
{
    const DofMap& r = disc.multiplier_space();
    Vec3 total = Vec3::Zero();
    for (Index t = 0; t < disc.mesh().num_triangles(); ++t) {
        const double area = disc.mesh().triangles()[t].area;
        for (Index n : r.cell_nodes(t)) {
            for (int c = 0; c < 3; ++c) total[c] += area / 3.0 * s.r[r.global(n, c)];
        }
    }
    return total;
}

} // namespace

TEST(SolverConfig, Validation)
{
    SolverConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.tol_rel, 1e-8);
    EXPECT_EQ(c.max_iter, 25);
    EXPECT_EQ(c.residual_norm, ResidualNorm::h1_riesz);
    c.tol_rel = 0.0;
    EXPECT_THROW(c.validate(), Error);
    c = SolverConfig{};
    c.max_iter = 0;
    EXPECT_THROW(c.validate(), Error);
}

TEST(LinearSolve, IdentityAndSmallSaddle)
{
    const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(5, -2.0, 3.0);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(5, 5);
    EXPECT_LE((solve_linear_saddle(sparse_from(id), b) - b).norm(), 1e-15);

    Eigen::MatrixXd a(2, 2);
    a << 1, 1, 1, 0;
    const Eigen::VectorXd x = solve_linear_saddle(sparse_from(a), Eigen::Vector2d(1, 0));
    EXPECT_NEAR(x[0], 0.0, 1e-15);
    EXPECT_NEAR(x[1], 1.0, 1e-15);
}

TEST(LinearSolve, SingularMatrixIsReported)
{
    Eigen::MatrixXd a(3, 3);
    a << 1, 2, 0, 2, 4, 0, 0, 0, 1;
    EXPECT_THROW(solve_linear_saddle(sparse_from(a), Eigen::Vector3d(1, 1, 1)), NumericError);
    SparseMatrix z(3, 3);
    EXPECT_THROW(solve_linear_saddle(z, Eigen::Vector3d(1, 1, 1)), NumericError);
    EXPECT_THROW(solve_linear_saddle(sparse_from(Eigen::MatrixXd::Identity(3, 2)), Eigen::Vector3d(1, 1, 1)),
                 Error);
}

TEST(LinearSolve, InitialGuessSystemAgreesWithDenseOracle)
{
    for (BcMode mode : {BcMode::strong, BcMode::weak}) {
        CaseSpec cs = hyperboloid_case(kPi / 2, 2, 4);
        cs.bc.mode = mode;
        const Discretization disc(cs.build_mesh());
        LinearSystem sys = assemble_initial_guess_system(disc, cs.bc, 1.0);
        const Eigen::VectorXd x = solve_linear_saddle(sys.matrix, sys.rhs);
        const Eigen::MatrixXd dense(sys.matrix);
        const Eigen::VectorXd oracle = dense.fullPivLu().solve(sys.rhs);
        EXPECT_LE((x - oracle).norm() / oracle.norm(), 1e-10);
        EXPECT_LE((dense * x - sys.rhs).norm() / sys.rhs.norm(), 1e-10);

        // Column elimination keeps the solution.
        eliminate_dirichlet_columns(sys.matrix, sys.rhs, sys.dirichlet_dofs);
        EXPECT_LE((solve_linear_saddle(sys.matrix, sys.rhs) - oracle).norm() / oracle.norm(), 1e-10);
    }
}

TEST(LinearSolve, FactorizationIsReusable)
{
    Eigen::MatrixXd a(3, 3);
    a << 4, 1, 0, 1, 3, 1, 0, 1, 0;
    SparseLu lu;
    lu.factorize(sparse_from(a));
    for (int k = 0; k < 3; ++k) {
        const Eigen::VectorXd b = Eigen::VectorXd::Unit(3, k);
        EXPECT_LE((a * lu.solve(b) - b).norm(), 1e-14);
    }
}

TEST(ResidualNorm, H1RieszExamples)
{
    const CaseSpec cs = hyperboloid_case(kPi / 2, 2, 6);
    const Discretization disc(cs.build_mesh());
    const std::vector<Index> dir = dirichlet_values(disc, cs.bc).dofs;
    EXPECT_EQ(residual_norm_h1(disc, dir, Eigen::VectorXd::Zero(disc.size())), 0.0);

    const DofMap& w = disc.gradient_space();
    const SparseMatrix m = assemble_scalar_mass(build_space(disc.mesh_ptr(), 2, 1)) +
                           assemble_scalar_stiffness(build_space(disc.mesh_ptr(), 2, 1));
    const ResidualNormEvaluator h1(disc, dir, ResidualNorm::h1_riesz);
    for (Index node : {Index(1), Index(7), w.num_nodes() - 1}) {
        const bool fixed = std::find(dir.begin(), dir.end(), w.global(node, 0)) != dir.end();
        if (fixed) continue;
        for (int slot : {0, 4}) {
            Eigen::VectorXd f = Eigen::VectorXd::Zero(disc.size());
            for (SparseMatrix::InnerIterator it(m, node); it; ++it) f[w.global(it.row(), slot)] = it.value();
            EXPECT_NEAR(h1(f), std::sqrt(m.coeff(node, node)), 1e-12) << node;
        }
    }

    std::mt19937 rng(4);
    std::normal_distribution<double> nd;
    Eigen::VectorXd f(disc.size());
    for (Index i = 0; i < f.size(); ++i) f[i] = nd(rng);
    EXPECT_NEAR(h1(10.0 * f), 10.0 * h1(f), 1e-12 * h1(f));
    // Entries outside the free gradient dofs do not contribute.
    Eigen::VectorXd g = f;
    for (Index d : dir) g[d] = 1e6;
    g.tail(disc.size() - disc.r_offset()).setConstant(-3.0);
    EXPECT_NEAR(h1(g), h1(f), 1e-12 * h1(f));
}

TEST(InitialGuess, ConstantBoundaryDataGivesConstantField)
{
    Mat32 gd;
    gd << 0.8, 0.0, 0.0, 0.0, 0.0, 2.0 / std::sqrt(4.0 - 0.64);
    for (BcMode mode : {BcMode::strong, BcMode::weak}) {
        CaseSpec cs = custom_case(Rect{0, 1, 0, 1.5}, PeriodicAxis::none, gd, 3, 4);
        cs.bc.mode = mode;
        const Discretization disc(cs.build_mesh());
        const State s = initial_guess(disc, cs.bc, 1.0);
        const DofMap& w = disc.gradient_space();
        double worst = 0.0;
        for (Index n = 0; n < w.num_nodes(); ++n) {
            for (int slot = 0; slot < kGradComponents; ++slot) {
                worst = std::max(worst, std::abs(s.g[w.global(n, slot)] - gd(slot % 3, slot / 3)));
            }
        }
        EXPECT_LE(worst, 1e-11) << to_string(mode);
    }
}

TEST(InitialGuess, HyperboloidSatisfiesDiscreteConstraint)
{
    const CaseSpec cs = hyperboloid_case(kPi / 2, 4, 24);
    const Discretization disc(cs.build_mesh());
    const State s = initial_guess(disc, cs.bc, 1.0);
    // The linear system includes b(G, r~) = 0 rows; they stay satisfied by the nonlinear residual too.
    State probe = s;
    probe.mu = Vec3::Zero();
    const Eigen::VectorXd res = assemble_residual(disc, cs.bc, probe, 1.0);
    EXPECT_LE(res.segment(disc.r_offset(), disc.multiplier_space().size()).lpNorm<Eigen::Infinity>(), 1e-10);

    const AssembledSystem sys = assemble_system(disc, cs.bc, s, 1.0);
    const double f0 = residual_norm_h1(disc, sys.dirichlet_dofs, sys.residual);
    EXPECT_TRUE(std::isfinite(f0));
    EXPECT_GT(f0, 1e-6);
}

TEST(Newton, HyperboloidConvergesAndReportIsConsistent)
{
    const CaseSpec cs = hyperboloid_case(kPi / 2, 4, 24);
    SolverConfig cfg;
    const Solved s = solve(cs, cfg);
    const NewtonReport& rep = s.result.report;
    EXPECT_TRUE(rep.converged);
    EXPECT_LE(rep.iterations, 5);
    ASSERT_EQ(rep.residual_norms.size(), static_cast<std::size_t>(rep.iterations) + 1);
    for (double r : rep.residual_norms) EXPECT_TRUE(std::isfinite(r));
    const double last = rep.relative(rep.residual_norms.size() - 1);
    EXPECT_EQ(rep.converged, last <= cfg.tol_rel || rep.final_residual <= cfg.tol_abs);
    EXPECT_EQ(rep.final_residual, rep.residual_norms.back());

    // Dirichlet dofs carry the interpolated data exactly.
    const DofAssignment dir = dirichlet_values(*s.disc, cs.bc);
    for (std::size_t i = 0; i < dir.dofs.size(); ++i) EXPECT_EQ(s.result.state.g[dir.dofs[i]], dir.values[i]);
    EXPECT_LE(integral_of_r(*s.disc, s.result.state).norm(), 1e-10);

    // Independent check of the final residual in the stopping norm.
    const AssembledSystem sys = assemble_system(*s.disc, cs.bc, s.result.state, cfg.eta);
    EXPECT_NEAR(residual_norm_h1(*s.disc, sys.dirichlet_dofs, sys.residual), rep.final_residual,
                1e-6 * rep.residual_norms.front());
}

TEST(Newton, RestartFromConvergedStateStopsImmediately)
{
    const CaseSpec cs = hyperboloid_case(kPi / 2, 4, 24);
    const Solved s = solve(cs);
    const NewtonResult again = newton_solve(*s.disc, cs.bc, SolverConfig{}, s.result.state);
    EXPECT_TRUE(again.report.converged);
    EXPECT_LE(again.report.iterations, 1);
}

TEST(Newton, NonConvergenceIsReportedNotThrown)
{
    const CaseSpec cs = annulus_case(0.675, 4, 24);
    SolverConfig cfg;
    cfg.max_iter = 1;
    const Solved s = solve(cs, cfg);
    EXPECT_FALSE(s.result.report.converged);
    EXPECT_EQ(s.result.report.iterations, 1);
}

TEST(Newton, PicardAndNewtonReachTheSameState)
{
    const CaseSpec cs = hyperboloid_case(kPi / 2, 4, 24);
    SolverConfig newton;
    SolverConfig picard;
    picard.linearization = Linearization::picard;
    picard.max_iter = 200;
    const Solved a = solve(cs, newton);
    const Solved b = solve(cs, picard);
    ASSERT_TRUE(a.result.report.converged);
    ASSERT_TRUE(b.result.report.converged);
    const double diff = (a.result.state.g - b.result.state.g).lpNorm<Eigen::Infinity>();
    EXPECT_LE(diff / a.result.state.g.lpNorm<Eigen::Infinity>(), 10 * newton.tol_rel);
    EXPECT_GT(b.result.report.iterations, a.result.report.iterations);
}

TEST(Newton, LineSearchAndEuclideanNormStillConverge)
{
    const CaseSpec cs = hyperboloid_case(kPi / 2, 4, 24);
    SolverConfig cfg;
    cfg.line_search = true;
    cfg.residual_norm = ResidualNorm::euclidean;
    const Solved s = solve(cs, cfg);
    EXPECT_TRUE(s.result.report.converged);
    EXPECT_LE(s.result.report.iterations, 5);
}

class BenchmarkMonotone : public ::testing::TestWithParam<int> {};

TEST_P(BenchmarkMonotone, RelativeResidualStrictlyDecreases)
{
    CaseSpec cs;
    switch (GetParam()) {
    case 0: cs = hyperboloid_case(kPi / 2, 4, 24); break;
    case 1: cs = annulus_case(0.675, 4, 24); break;
    case 2: cs = axisymmetric_case(16, 8); break;
    default: cs = deformed_hyperboloid_case(kPi / 2, kPi / 6, 4, 24); break;
    }
    const Solved s = solve(cs);
    const NewtonReport& rep = s.result.report;
    EXPECT_TRUE(rep.converged) << cs.name;
    for (std::size_t k = 1; k < rep.residual_norms.size(); ++k) {
        EXPECT_LT(rep.residual_norms[k], rep.residual_norms[k - 1]) << cs.name << " step " << k;
    }
}

std::string benchmark_name(const ::testing::TestParamInfo<int>& info)
{
    static const char* names[] = {"hyperboloid", "annulus", "axisymmetric", "deformed"};
    return names[info.param];
}

INSTANTIATE_TEST_SUITE_P(Cases, BenchmarkMonotone, ::testing::Values(0, 1, 2, 3), benchmark_name);
