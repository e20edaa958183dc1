#include "miura/cases.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace miura {

namespace {

using State3 = std::array<double, 3>;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
// Dense output coefficients.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

State3 rhs(double y, const State3& s)
{
    const double rho = s[0];
    const double d = 4.0 - rho * rho;
    if (!(rho < 2.0) || d <= 0.0) throw Error("rho reached 2 at y = " + std::to_string(y));
    const double radicand = 4.0 / d - s[1] * s[1];
    if (radicand < 0.0) throw Error("z' radicand negative at y = " + std::to_string(y));
    return {s[1], 4.0 * rho / (d * d), std::sqrt(radicand)};
}

State3 axpy(const State3& y, double h, std::initializer_list<std::pair<double, const State3*>> terms)
{
    State3 out = y;
    for (const auto& [coef, k] : terms) {
        for (int i = 0; i < 3; ++i) out[i] += h * coef * (*k)[i];
    }
    return out;
}

struct Step {
    State3 y1;
    State3 err;
    std::array<State3, 5> cont;
};

Step dopri_step(double x, const State3& y0, double h)
{
    const State3 k1 = rhs(x, y0);
    const State3 k2 = rhs(x + c2 * h, axpy(y0, h, {{a21, &k1}}));
    const State3 k3 = rhs(x + c3 * h, axpy(y0, h, {{a31, &k1}, {a32, &k2}}));
    const State3 k4 = rhs(x + c4 * h, axpy(y0, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State3 k5 = rhs(x + c5 * h, axpy(y0, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State3 k6 = rhs(x + h, axpy(y0, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    Step st;
    st.y1 = axpy(y0, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
    const State3 k7 = rhs(x + h, st.y1);
    for (int i = 0; i < 3; ++i) {
        st.err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double ydiff = st.y1[i] - y0[i];
        const double bspl = h * k1[i] - ydiff;
        st.cont[0][i] = y0[i];
        st.cont[1][i] = ydiff;
        st.cont[2][i] = bspl;
        st.cont[3][i] = ydiff - h * k7[i] - bspl;
        st.cont[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
    }
    return st;
}

void check_initial(double rho0, double rho_dot0, double y_end)
{
    MIURA_REQUIRE(rho0 > 0.0 && rho0 < 2.0, InvalidArgument, "integrate_rho: rho0 must lie in (0, 2)");
    MIURA_REQUIRE(std::isfinite(rho_dot0), InvalidArgument, "integrate_rho: rho_dot0 must be finite");
    MIURA_REQUIRE(y_end > 0.0, InvalidArgument, "integrate_rho: y_end must be > 0");
}

} // namespace

double rho_second_derivative(double rho)
{
    const double d = 4.0 - rho * rho;
    return 4.0 * rho / (d * d);
}

OdeSample OdeSolution::operator()(double y) const
{
    MIURA_REQUIRE(y >= ys_.front() - 1e-12 && y <= ys_.back() + 1e-12, InvalidArgument,
                  "OdeSolution: y outside the integration interval");
    auto it = std::upper_bound(ys_.begin(), ys_.end() - 1, y);
    std::size_t k = it == ys_.begin() ? 0 : static_cast<std::size_t>(it - ys_.begin()) - 1;
    k = std::min(k, cont_.size() - 1);
    const double theta = (y - ys_[k]) / hs_[k];
    const double theta1 = 1.0 - theta;
    const auto& rc = cont_[k];
    State3 v{};
    for (int i = 0; i < 3; ++i) {
        v[i] = rc[0][i] + theta * (rc[1][i] + theta1 * (rc[2][i] + theta * (rc[3][i] + theta1 * rc[4][i])));
    }
    return {v[0], v[1], v[2]};
}

OdeSolution integrate_rho(double rho0, double rho_dot0, double y_end, double tol)
{
    check_initial(rho0, rho_dot0, y_end);
    MIURA_REQUIRE(tol > 0.0, InvalidArgument, "integrate_rho: tol must be > 0");
    OdeSolution sol;
    sol.tol_ = tol;
    State3 y{rho0, rho_dot0, 0.0};
    double x = 0.0;
    double h = std::min(1e-2, y_end);
    sol.ys_.push_back(0.0);
    while (x < y_end) {
        h = std::min(h, y_end - x);
        MIURA_REQUIRE(h > 1e-14, Error, "integrate_rho: step size underflow at y = " + std::to_string(x));
        Step st;
        try {
            st = dopri_step(x, y, h);
        } catch (const Error&) {
            if (h < 1e-10) throw;
            h *= 0.5;
            continue;
        }
        double err = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double sc = tol + tol * std::max(std::abs(y[i]), std::abs(st.y1[i]));
            err += (st.err[i] / sc) * (st.err[i] / sc);
        }
        err = std::sqrt(err / 3.0);
        const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
        if (err <= 1.0) {
            sol.hs_.push_back(h);
            sol.cont_.push_back(st.cont);
            x += h;
            if (y_end - x < 1e-14 * y_end) x = y_end;
            sol.ys_.push_back(x);
            y = st.y1;
            if (!(y[0] < 2.0)) throw Error("rho reached 2 at y = " + std::to_string(x));
        }
        h *= fac;
    }
    return sol;
}

OdeSolution integrate_rho_fixed(double rho0, double rho_dot0, double y_end, int steps)
{
    check_initial(rho0, rho_dot0, y_end);
    MIURA_REQUIRE(steps >= 1, InvalidArgument, "integrate_rho_fixed: steps must be >= 1");
    OdeSolution sol;
    State3 y{rho0, rho_dot0, 0.0};
    const double h = y_end / steps;
    sol.ys_.push_back(0.0);
    for (int k = 0; k < steps; ++k) {
        const Step st = dopri_step(k * h, y, h);
        sol.hs_.push_back(h);
        sol.cont_.push_back(st.cont);
        sol.ys_.push_back(k + 1 == steps ? y_end : (k + 1) * h);
        y = st.y1;
    }
    return sol;
}

const char* to_string(RotationAxis axis)
{
    return axis == RotationAxis::x ? "x" : "z";
}

Eigen::Matrix3d rotation(RotationAxis axis, double angle)
{
    const Vec3 ax = axis == RotationAxis::x ? Vec3::UnitX() : Vec3::UnitZ();
    return Eigen::AngleAxisd(angle, ax).toRotationMatrix();
}

std::shared_ptr<const Mesh> CaseSpec::build_mesh() const
{
    return std::make_shared<const Mesh>(build_rect_mesh(rect, nx, ny, periodic));
}

HyperboloidParams hyperboloid_params(double theta)
{
    MIURA_REQUIRE(theta > 0.0 && theta < 2.0 * std::numbers::pi / 3.0, InvalidArgument,
                  "hyperboloid: theta must lie in (0, 2pi/3)");
    HyperboloidParams p;
    p.theta = theta;
    p.c0 = std::cos(0.5 * theta);
    p.s0 = std::sin(0.5 * theta);
    p.alpha = 1.0 / std::sqrt(1.0 - p.s0 * p.s0);
    p.s0_star = std::sin(0.5 * std::acos(0.5 / p.c0));
    return p;
}

ExactPoint hyperboloid_exact(const HyperboloidParams& p, const Vec2& pt)
{
    const double x = pt.x(), y = pt.y();
    const double k = 4.0 * p.c0 * p.c0;
    const double rho = std::sqrt(k * x * x + 1.0);
    const double drho = k * x / rho;
    const double ddrho = k / (rho * rho * rho);
    const double ca = std::cos(p.alpha * y), sa = std::sin(p.alpha * y);
    const double a = p.alpha;

    ExactPoint e;
    e.phi = Vec3(rho * ca, rho * sa, 2.0 * p.s0 * x);
    const Vec3 phi_x(drho * ca, drho * sa, 2.0 * p.s0);
    const Vec3 phi_y(-a * rho * sa, a * rho * ca, 0.0);
    const Vec3 phi_xx(ddrho * ca, ddrho * sa, 0.0);
    const Vec3 phi_xy(-a * drho * sa, a * drho * ca, 0.0);
    const Vec3 phi_yy(-a * a * rho * ca, -a * a * rho * sa, 0.0);
    e.grad << phi_x, phi_y;
    e.grad_x << phi_xx, phi_xy;
    e.grad_y << phi_xy, phi_yy;
    return e;
}

CaseSpec hyperboloid_case(double theta, int nx, int ny)
{
    const HyperboloidParams p = hyperboloid_params(theta);
    CaseSpec cs;
    cs.name = "hyperboloid";
    cs.rect = Rect{-p.s0_star, p.s0_star, 0.0, 2.0 * std::numbers::pi / p.alpha};
    cs.periodic = PeriodicAxis::y;
    cs.nx = nx;
    cs.ny = ny;
    cs.bc.rect = cs.rect;
    cs.bc.active = SideSet{Side::left, Side::right};
    cs.bc.mode = BcMode::strong;
    cs.bc.eval = [p](const Vec2& x) { return hyperboloid_exact(p, x).grad; };
    cs.exact = [p](const Vec2& x) { return hyperboloid_exact(p, x); };
    cs.hypothesis_tolerance = 1e-12;
    return cs;
}

CaseSpec deformed_hyperboloid_case(double theta, double angle, int nx, int ny, RotationAxis axis)
{
    CaseSpec cs = hyperboloid_case(theta, nx, ny);
    const HyperboloidParams p = hyperboloid_params(theta);
    const Eigen::Matrix3d rot = rotation(axis, angle);
    const double x_mid = 0.5 * (cs.rect.x_min + cs.rect.x_max);
    cs.name = "deformed-hyperboloid";
    cs.bc.eval = [p, rot, x_mid](const Vec2& x) -> Mat32 {
        const Mat32 g = hyperboloid_exact(p, x).grad;
        return x.x() > x_mid ? Mat32(rot * g) : g;
    };
    cs.exact.reset();
    return cs;
}

CaseSpec annulus_case(double a, int nx, int ny)
{
    MIURA_REQUIRE(std::isfinite(a), InvalidArgument, "annulus: a must be finite");
    const double edge = a * 0.75 + 1.0;
    MIURA_REQUIRE(edge * edge <= 3.0 && edge != 0.0, InvalidArgument,
                  "annulus: (3a/4 + 1)^2 must lie in (0, 3]");
    CaseSpec cs;
    cs.name = "annulus";
    cs.rect = Rect{0.0, 0.75, 0.0, 2.0 * std::numbers::pi};
    cs.periodic = PeriodicAxis::y;
    cs.nx = nx;
    cs.ny = ny;
    cs.bc.rect = cs.rect;
    cs.bc.active = SideSet{Side::left, Side::right};
    cs.bc.mode = BcMode::strong;
    cs.bc.eval = [a](const Vec2& x) -> Mat32 {
        const Vec3 er(std::cos(x.y()), std::sin(x.y()), 0.0);
        const Vec3 et(-std::sin(x.y()), std::cos(x.y()), 0.0);
        const double mx = a * x.x() + 1.0;
        const double my = 2.0 / std::sqrt(4.0 - mx * mx);
        Mat32 g;
        g << mx * er, my * et;
        return g;
    };
    cs.hypothesis_tolerance = 1e-12;
    return cs;
}

CaseSpec axisymmetric_case(int nx, int ny, double rho0)
{
    auto ode = std::make_shared<const OdeSolution>(integrate_rho(rho0, 0.0, 4.0));
    CaseSpec cs;
    cs.name = "axisymmetric";
    cs.rect = Rect{0.0, 2.0 * std::numbers::pi, 0.0, 4.0};
    cs.periodic = PeriodicAxis::x;
    cs.nx = nx;
    cs.ny = ny;
    cs.bc.rect = cs.rect;
    cs.bc.active = SideSet{Side::bottom, Side::top};
    cs.bc.mode = BcMode::weak;
    cs.bc.eval = [ode](const Vec2& x) -> Mat32 {
        const OdeSample s = (*ode)(std::clamp(x.y(), 0.0, ode->y_end()));
        const double radicand = 4.0 / (4.0 - s.rho * s.rho) - s.rho_dot * s.rho_dot;
        if (radicand < 0.0) throw Error("axisymmetric: negative z' radicand at y = " + std::to_string(x.y()));
        const double cx = std::cos(x.x()), sx = std::sin(x.x());
        Mat32 g;
        g << Vec3(-s.rho * sx, s.rho * cx, 0.0), Vec3(s.rho_dot * cx, s.rho_dot * sx, std::sqrt(radicand));
        return g;
    };
    cs.hypothesis_tolerance = 1e-8;
    cs.ode = std::move(ode);
    return cs;
}

CaseSpec custom_case(const Rect& rect, PeriodicAxis periodic, const Mat32& gd, int nx, int ny)
{
    CaseSpec cs;
    cs.name = "custom";
    cs.rect = rect;
    cs.periodic = periodic;
    cs.nx = nx;
    cs.ny = ny;
    cs.bc.rect = rect;
    if (periodic != PeriodicAxis::x) cs.bc.active.insert(Side::left).insert(Side::right);
    if (periodic != PeriodicAxis::y) cs.bc.active.insert(Side::bottom).insert(Side::top);
    cs.bc.mode = BcMode::strong;
    cs.bc.eval = [gd](const Vec2&) { return gd; };
    cs.hypothesis_tolerance = 1e-12;
    return cs;
}

} // namespace miura
