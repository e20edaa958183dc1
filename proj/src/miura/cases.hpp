#pragma once

#include "miura/mesh.hpp"
#include "miura/spaces.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace miura {

/// Exact surface at a point: phi, its gradient G = (phi_x, phi_y), and the
/// partial derivatives of G (columns: d_x G = (phi_xx, phi_xy), d_y G = (phi_xy, phi_yy)).
struct ExactPoint {
    Vec3 phi = Vec3::Zero();
    Mat32 grad = Mat32::Zero();
    Mat32 grad_x = Mat32::Zero();
    Mat32 grad_y = Mat32::Zero();
};

using ExactSolution = std::function<ExactPoint(const Vec2&)>;

// ---------------------------------------------------------------------------
// rho'' = 4 rho / (4 - rho^2)^2, integrated together with
// z' = sqrt(4 / (4 - rho^2) - rho'^2).

struct OdeSample {
    double rho = 0.0;
    double rho_dot = 0.0;
    double z = 0.0;
};

/// Dense Dormand-Prince solution on [0, y_end].
class OdeSolution {
public:
    OdeSample operator()(double y) const;

    double y_end() const { return ys_.back(); }
    std::size_t steps() const { return ys_.size() - 1; }
    double tolerance() const { return tol_; }

    friend OdeSolution integrate_rho(double, double, double, double);
    friend OdeSolution integrate_rho_fixed(double, double, double, int);

private:
    using State3 = std::array<double, 3>;
    // Per step: start point and the five dense-output coefficient vectors.
    std::vector<double> ys_;
    std::vector<double> hs_;
    std::vector<std::array<State3, 5>> cont_;
    double tol_ = 0.0;
};

/// Adaptive order-5 integration with local tolerance `tol` (absolute and relative).
/// Throws Error (with the reached y) when rho approaches 2 or z' becomes imaginary.
OdeSolution integrate_rho(double rho0, double rho_dot0, double y_end, double tol = 1e-10);

/// Same scheme with `steps` equal steps; used for self-convergence checks.
OdeSolution integrate_rho_fixed(double rho0, double rho_dot0, double y_end, int steps);

double rho_second_derivative(double rho);

// ---------------------------------------------------------------------------

enum class RotationAxis { x, z };

const char* to_string(RotationAxis axis);

struct CaseSpec {
    std::string name;
    Rect rect;
    PeriodicAxis periodic = PeriodicAxis::none;
    int nx = 0;
    int ny = 0;
    BoundaryData bc;
    std::optional<ExactSolution> exact;
    /// Tolerance the boundary data is expected to meet in validate_hypothesis.
    double hypothesis_tolerance = 1e-12;
    std::shared_ptr<const OdeSolution> ode;

    std::shared_ptr<const Mesh> build_mesh() const;
};

struct HyperboloidParams {
    double theta = 0.0;
    double c0 = 0.0;
    double s0 = 0.0;
    double alpha = 0.0;
    double s0_star = 0.0;
};

HyperboloidParams hyperboloid_params(double theta);
ExactPoint hyperboloid_exact(const HyperboloidParams& p, const Vec2& x);

CaseSpec hyperboloid_case(double theta, int nx, int ny);
CaseSpec annulus_case(double a, int nx, int ny);
CaseSpec axisymmetric_case(int nx, int ny, double rho0 = 0.1);
CaseSpec deformed_hyperboloid_case(double theta, double angle, int nx, int ny, RotationAxis axis = RotationAxis::x);
/// Constant gradient data on every non-periodic side of a rectangle.
CaseSpec custom_case(const Rect& rect, PeriodicAxis periodic, const Mat32& gd, int nx, int ny);

Eigen::Matrix3d rotation(RotationAxis axis, double angle);

} // namespace miura
