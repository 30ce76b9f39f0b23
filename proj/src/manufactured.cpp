#include "penaflow/manufactured.hpp"

#include <cmath>
#include <numbers>

namespace penaflow {

namespace {
double bump(const ManufacturedSolution& m, const Vec& x)
{
    const double q = 1.0 - (x[0] * x[0] + x[1] * x[1]) / (m.support_radius * m.support_radius);
    return q > 0.0 ? q * q * q * q : 0.0;
}
} // namespace

double ManufacturedSolution::density(double t, const Vec& x) const
{
    return 1.0 + rho_amplitude * bump(*this, x) * std::cos(std::numbers::pi * t);
}

Vec ManufacturedSolution::velocity(double t, const Vec& x) const
{
    const double psi = bump(*this, x);
    const double pt = std::numbers::pi * t;
    return {u_amplitude * psi * (1.0 + 0.5 * std::sin(pt)), u_amplitude * psi * 0.5 * x[0] / support_radius * std::cos(pt), 0.0};
}

Vec ManufacturedSolution::momentum(double t, const Vec& x) const { return density(t, x) * velocity(t, x); }

ManufacturedSolution::Sources ManufacturedSolution::sources(double t, const Vec& xv, const FluidParams& fp,
                                                            const RegularizationParams& rp) const
{
    if (xv[0] * xv[0] + xv[1] * xv[1] >= support_radius * support_radius) return {0.0, {}};
    const double x = xv[0], y = xv[1];
    const double A = rho_amplitude, B = u_amplitude, r0 = support_radius;
    const double a = fp.a, g = fp.gamma, mu = fp.mu, eta = fp.eta;
    const double delta = rp.delta, beta = rp.beta;
    double src_rho = 0.0, src_mx = 0.0, src_my = 0.0;
    const double x0 = pow(r0, -2);
    const double x1 = pow(x, 2);
    const double x2 = pow(y, 2);
    const double x3 = -x0*(x1 + x2) + 1;
    const double x4 = M_PI*t;
    const double x5 = sin(x4);
    const double x6 = M_PI*x5;
    const double x7 = A*x6;
    const double x8 = cos(x4);
    const double x9 = pow(x8, 2);
    const double x10 = A*pow(x3, 4);
    const double x11 = y/pow(r0, 3);
    const double x12 = 4*x;
    const double x13 = x11*x12;
    const double x14 = B*x13;
    const double x15 = x5 + 2;
    const double x16 = x10*x8;
    const double x17 = B*x0;
    const double x18 = 4*x17;
    const double x19 = x*x18;
    const double x20 = x16 + 1;
    const double x21 = x20*x8;
    const double x22 = x15*x20;
    const double x23 = pow(x3, 2);
    const double x24 = pow(x3, 6);
    const double x25 = (1.0/2.0)*B;
    const double x26 = x25*x7;
    const double x27 = 2*x8;
    const double x28 = x0*pow(x15, 2);
    const double x29 = A*x;
    const double x30 = pow(B, 2);
    const double x31 = pow(x3, 9)*x30;
    const double x32 = x29*x31;
    const double x33 = pow(x3, 5);
    const double x34 = x30*x33;
    const double x35 = x20*x34;
    const double x36 = x0*x1;
    const double x37 = 6*x15;
    const double x38 = x15*x3;
    const double x39 = x3*x8;
    const double x40 = 1.0/r0;
    const double x41 = x40*y;
    const double x42 = x39*x41;
    const double x43 = 6*x8;
    const double x44 = x1*x11;
    const double x45 = x43*x44;
    const double x46 = x38 + x42 - x45;
    const double x47 = x0*x2;
    const double x48 = 8/x20;
    const double x49 = x0*x29*x39*x48;
    const double x50 = a*g*pow(x20, g);
    const double x51 = beta*delta*pow(x20, beta);
    const double x52 = x15*x36;
    const double x53 = 2*A*x31;
    const double x54 = x43*x47;
    const double x55 = x15*x41;
    const double x56 = -x39;
    const double x57 = A*x42*x48;
    src_rho = -pow(x3, 3)*(x10*x14*x9 + x14*x21 + x15*x16*x19 + x19*x22 + x3*x7);
    src_mx = x23*(4*B*eta*x0*(-x36*x37 + x46) + 4*B*mu*x0*(-x37*x47 + x46) + (8.0/3.0)*B*mu*x0*(2*x38 - x42 + x45 - 12*x52) + (1.0/2.0)*M_PI*B*x20*x23*x8 - 2*x11*x15*x32*x9 - x12*x28*x35 - x13*x22*x30*x33*x8 - x15*x24*x26 - x27*x28*x32 - x49*x50 - x49*x51);
    src_my = x23*x40*((16.0/3.0)*B*mu*x*x0*(x39 - x54 + 3*x55) - eta*x*x18*(x37*x41 + x54 + x56) - 12*mu*x*x17*(x27*x36 + 2*x55 + x56) - x*x20*x23*x25*x6 - x*x24*x26*x8 + (1.0/4.0)*x15*x20*x24*x30*x8 - 4*x21*x34*x52 - 4*x35*x44*x9 - x44*x53*pow(x8, 3) - x50*x57 - x51*x57 - x52*x53*x9);
    (void)eta;
    return {src_rho, {src_mx, src_my, 0.0}};
}

} // namespace penaflow
