#pragma once

#include "miura/common.hpp"
#include "miura/spaces.hpp"

#include <Eigen/SparseCore>

#include <memory>
#include <vector>

namespace miura {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, Index>;

/// Clamped coefficient value and its derivative with respect to the 3-vector argument.
struct Coefficient {
    double value = 0.0;
    Vec3 grad = Vec3::Zero();
};

/// p(G^x) = 4 / (4 - |G^x|^2), clamped to 4 once |G^x|^2 >= 3.
Coefficient coefficient_x(const Vec3& gx);

/// q(G^y) = 4 / |G^y|^2, clamped to 4 for |G^y|^2 <= 1 and to 1 for |G^y|^2 >= 4.
Coefficient coefficient_y(const Vec3& gy);

/// (p + q) / (p^2 + q^2); lies in [1/16, 4] for clamped coefficients.
double gamma_diagnostic(double p, double q);

enum class Linearization { newton, picard };

const char* to_string(Linearization lin);

/// Layout of the mixed unknown vector [ g | r | mu ] over a mesh, together
/// with the sparsity pattern shared by every system assembled on it.
class Discretization {
public:
    explicit Discretization(std::shared_ptr<const Mesh> mesh);

    const Mesh& mesh() const { return *mesh_; }
    const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
    const DofMap& gradient_space() const { return w_; }
    const DofMap& multiplier_space() const { return r_; }

    Index r_offset() const { return w_.size(); }
    Index mu_offset() const { return w_.size() + r_.size(); }
    Index size() const { return mu_offset() + 3; }

    Eigen::VectorXd pack(const State& s) const;
    State unpack(const Eigen::VectorXd& x) const;
    State zero_state() const;

    /// Structural pattern with all values zero.
    const SparseMatrix& pattern() const { return pattern_; }

private:
    std::shared_ptr<const Mesh> mesh_;
    DofMap w_;
    DofMap r_;
    SparseMatrix pattern_;
};

/// Dirichlet dofs of the gradient block (empty in weak mode).
DofAssignment dirichlet_values(const Discretization& disc, const BoundaryData& bc);

struct AssembledSystem {
    Eigen::VectorXd residual;
    SparseMatrix jacobian;
    /// Rows replaced by identity rows for strong boundary conditions.
    std::vector<Index> dirichlet_dofs;
};

/// Residual of the penalized mixed system at `state`. In strong mode the
/// Dirichlet rows hold g_i - (I_h G_D)_i; in weak mode the edge penalty
/// (eta / h_e) int_e (G_h - I_h G_D) : G~ is added.
Eigen::VectorXd assemble_residual(const Discretization& disc, const BoundaryData& bc, const State& state,
                                  double eta);

/// Derivative of assemble_residual. Picard drops the coefficient-gradient terms.
SparseMatrix assemble_jacobian(const Discretization& disc, const BoundaryData& bc, const State& state, double eta,
                               Linearization lin = Linearization::newton);

AssembledSystem assemble_system(const Discretization& disc, const BoundaryData& bc, const State& state, double eta,
                                Linearization lin = Linearization::newton);

/// Linear system A x = rhs of the vector-Laplacian initial guess (Laplacian
/// block + penalty + Clairault multiplier), same boundary treatment.
struct LinearSystem {
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    std::vector<Index> dirichlet_dofs;
};

LinearSystem assemble_initial_guess_system(const Discretization& disc, const BoundaryData& bc, double eta);

/// Scalar P2 matrices on the gradient space nodes.
SparseMatrix assemble_scalar_mass(const DofMap& scalar_p2);
SparseMatrix assemble_scalar_stiffness(const DofMap& scalar_p2);

} // namespace miura
