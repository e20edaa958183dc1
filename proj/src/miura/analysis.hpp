#pragma once

#include "miura/cases.hpp"
#include "miura/recovery.hpp"
#include "miura/spaces.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace miura {

struct ErrorNorms {
    double l2 = 0.0;
    /// Full H^1 norm (L^2 part included).
    double h1 = 0.0;
};

/// ||G_h - G|| in L^2 and H^1 with the degree-6 rule.
ErrorNorms error_norms(const DofMap& gradient_space, const Eigen::VectorXd& g, const ExactSolution& exact);

/// 2 log(e1 / e2) / log(n2 / n1); n are triangle counts.
double convergence_rate(double e1, double e2, double n1, double n2);

/// ||G^x_{h,y} - G^y_{h,x}||_{L^2}.
double curl_mismatch_l2(const DofMap& gradient_space, const Eigen::VectorXd& g);

/// ||grad phi_h - G_h||_{L^2}.
double recovery_mismatch_l2(const DofMap& gradient_space, const Eigen::VectorXd& g, const DofMap& surface_space,
                            const SurfaceField& surface);

/// H^1 error of phi_h against the exact surface shifted to zero mean.
ErrorNorms surface_error(const DofMap& surface_space, const SurfaceField& surface, const ExactSolution& exact);

inline constexpr double kLogGuard = 1e-14;

struct ConstraintFields {
    /// Quadrature-point values, triangle-major.
    std::vector<double> u;
    std::vector<double> v;
    std::vector<char> v_defined;
    std::vector<double> gx2;
    std::vector<double> gy2;
    /// Per triangle: |phi_y|^2 > 1 at every quadrature point.
    std::vector<char> omega_prime;
    int points_per_triangle = 0;

    double sup_u = 0.0;          ///< over Omega'
    double sup_v = 0.0;          ///< over Omega', defined points only
    int undefined_v = 0;         ///< quadrature points in Omega' where v is undefined
    double max_gx2 = 0.0;
    double max_gy2 = 0.0;
    Index triangles = 0;
    Index omega_prime_triangles = 0;
    /// Triangles with |phi_y|^2 <= 1 at every quadrature point.
    Index folded_triangles = 0;

    double omega_prime_fraction() const
    {
        return triangles == 0 ? 0.0 : static_cast<double>(omega_prime_triangles) / triangles;
    }
};

/// u = phi_x . phi_y and v = log((1 - |phi_x|^2 / 4) |phi_y|^2) from a gradient field.
ConstraintFields constraint_fields(const DofMap& gradient_space, const Eigen::VectorXd& g);
/// Same, using grad phi_h of a recovered surface.
ConstraintFields constraint_fields(const DofMap& surface_space, const SurfaceField& surface);
/// Same, for a pointwise field evaluated at the quadrature points.
ConstraintFields constraint_fields(const Mesh& mesh, const std::function<Mat32(const Vec2&)>& field);

struct ConvergenceRow {
    double h = 0.0;
    Index dofs = 0;
    Index triangles = 0;
    int newton_iters = 0;
    double h1_err = 0.0;
    std::optional<double> h1_rate;
    double l2_err = 0.0;
    std::optional<double> l2_rate;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;

    /// Appends a row, filling in rates against the previous one.
    void add(ConvergenceRow row);
};

inline constexpr const char* kConvergenceHeader = "h,dofs,newton_iters,h1_err,h1_rate,l2_err,l2_rate";

void write_csv(std::ostream& os, const ConvergenceTable& table);

/// Nodal data attached to a VTK export.
struct VertexFields {
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> gx2;
    std::vector<double> gy2;
    std::vector<double> omega_prime;
    std::vector<double> cell_omega_prime;
};

VertexFields vertex_fields(const DofMap& gradient_space, const Eigen::VectorXd& g, const ConstraintFields& cf);

/// Legacy VTK ASCII unstructured grid on the unglued parameter grid.
void write_vtk(std::ostream& os, const Mesh& mesh, const VertexFields* fields = nullptr);
/// Wavefront OBJ of phi_h sampled at mesh vertices.
void write_obj(std::ostream& os, const Mesh& mesh, const DofMap& surface_space, const SurfaceField& surface);

/// Writes through a file, surfacing failures as IoError with the path.
void write_file(const std::string& path, const std::function<void(std::ostream&)>& writer);

std::string format_double(double x);

} // namespace miura
