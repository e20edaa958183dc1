#pragma once

#include "miura/forms.hpp"

#include <memory>
#include <vector>

namespace miura {

enum class ResidualNorm { h1_riesz, euclidean };

const char* to_string(ResidualNorm norm);

struct SolverConfig {
    double eta = 1.0;
    double tol_rel = 1e-8;
    /// Absolute floor on the stopping norm so an already-converged state stops immediately.
    double tol_abs = 1e-13;
    int max_iter = 25;
    ResidualNorm residual_norm = ResidualNorm::h1_riesz;
    Linearization linearization = Linearization::newton;
    /// Backtracking by halving (at most 8 times) when the residual does not decrease.
    bool line_search = false;

    void validate() const;
};

struct NewtonReport {
    int iterations = 0;
    /// Stopping-norm value at the initial state and after every iteration.
    std::vector<double> residual_norms;
    bool converged = false;
    double final_residual = 0.0;

    double relative(std::size_t k) const { return residual_norms[k] / residual_norms.front(); }
};

/// Sparse LU of a square, possibly indefinite system (UMFPACK).
class SparseLu {
public:
    SparseLu();
    ~SparseLu();
    SparseLu(SparseLu&&) noexcept;
    SparseLu& operator=(SparseLu&&) noexcept;

    /// Throws NumericError naming the offending row/column on singularity.
    void factorize(const SparseMatrix& a);
    /// Solves with iterative refinement until ||A x - b|| / ||b|| <= 1e-12 (at most 3 sweeps).
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

Eigen::VectorXd solve_linear_saddle(const SparseMatrix& a, const Eigen::VectorXd& rhs);

/// Moves the known values of identity rows to the right-hand side and clears
/// those columns elsewhere: x_b = rhs_b for each listed dof b.
void eliminate_dirichlet_columns(SparseMatrix& a, Eigen::VectorXd& rhs, const std::vector<Index>& dofs);

/// Stopping norm of a residual vector over the free gradient dofs.
class ResidualNormEvaluator {
public:
    ResidualNormEvaluator(const Discretization& disc, const std::vector<Index>& dirichlet_dofs, ResidualNorm kind);
    ~ResidualNormEvaluator();

    double operator()(const Eigen::VectorXd& residual) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// sqrt(F^T M^{-1} F) with M the H^1 inner-product matrix of the gradient
/// space restricted to free dofs.
double residual_norm_h1(const Discretization& disc, const std::vector<Index>& dirichlet_dofs,
                        const Eigen::VectorXd& residual);

/// Vector-Laplacian mixed solve used to start Newton.
State initial_guess(const Discretization& disc, const BoundaryData& bc, double eta);

struct NewtonResult {
    State state;
    NewtonReport report;
};

NewtonResult newton_solve(const Discretization& disc, const BoundaryData& bc, const SolverConfig& config,
                          const State& state0);

} // namespace miura
