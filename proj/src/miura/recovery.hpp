#pragma once

#include "miura/forms.hpp"
#include "miura/solver.hpp"

#include <memory>

namespace miura {

/// phi_h in the zero-mean quadratic space, layout node * 3 + component.
struct SurfaceField {
    Eigen::VectorXd phi;
    /// Multipliers of the zero-mean constraints; vanish for compatible data.
    Vec3 mu = Vec3::Zero();
};

/// Least-squares recovery of phi_h from a gradient field: find zero-mean
/// phi_h with int grad phi_h . grad v = int G_h . grad v for all v.
/// The bordered Poisson matrix is factorized once per mesh.
class SurfaceRecovery {
public:
    explicit SurfaceRecovery(std::shared_ptr<const Mesh> mesh);

    const DofMap& space() const { return space_; }

    SurfaceField recover(const DofMap& gradient_space, const Eigen::VectorXd& g) const;

    /// max_a |int grad phi_h . grad N_a - int G_h . grad N_a| over every basis function.
    double normal_equation_residual(const DofMap& gradient_space, const Eigen::VectorXd& g,
                                    const SurfaceField& surface) const;

    /// int_Omega phi_h per component.
    Vec3 mean_integral(const SurfaceField& surface) const;

private:
    Eigen::MatrixXd load_vectors(const DofMap& gradient_space, const Eigen::VectorXd& g) const;

    DofMap space_;
    SparseMatrix stiffness_;
    Eigen::VectorXd node_integrals_;
    SparseLu lu_;
};

SurfaceField recover_surface(const DofMap& gradient_space, const Eigen::VectorXd& g);

} // namespace miura
