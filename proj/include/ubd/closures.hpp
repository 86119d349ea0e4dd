#pragma once

#include <cmath>
#include <string>

#include "ubd/error.hpp"
#include "ubd/specs.hpp"

namespace ubd {

// Primitive two-phase state at one location. Velocities are optional in the
// sense that pressure-only constructions leave them at zero.
struct Primitive {
    double p = 0.0;       // Pa
    double alpha_g = 0.0; // gas volume fraction
    double rho_l = 0.0;   // kg/m^3
    double rho_g = 0.0;   // kg/m^3
    double v_l = 0.0;     // m/s
    double v_g = 0.0;     // m/s

    double mixture_density() const {
        return (1.0 - alpha_g) * rho_l + alpha_g * rho_g;
    }
    double mixture_velocity() const {
        return (1.0 - alpha_g) * v_l + alpha_g * v_g;
    }
};

inline double liquid_density(double p, const FluidSpec& fluid) {
    if (!(p > 0.0)) throw Error(ErrorKind::Domain, "liquid_density: pressure must be > 0");
    return fluid.rho_liquid_vacuum + p / (fluid.c_liquid * fluid.c_liquid);
}

inline double gas_density(double p, const FluidSpec& fluid) {
    if (!(p > 0.0)) throw Error(ErrorKind::Domain, "gas_density: pressure must be > 0");
    return p / (fluid.c_gas * fluid.c_gas);
}

inline double slip_velocity(double v_l, const FluidSpec& fluid) {
    return fluid.slip_c0 * v_l + fluid.slip_v_inf;
}

// F = f * rho * v_m * |v_m| / D with rho = m + n. Sign follows v_m.
inline double friction_gradient(double rho_mix, double v_m, const WellSpec& well) {
    return well.friction_factor * rho_mix * v_m * std::abs(v_m) / well.hydraulic_diameter;
}

inline double friction_gradient(const Primitive& prim, const WellSpec& well) {
    return friction_gradient(prim.mixture_density(), prim.mixture_velocity(), well);
}

// G = rho * g * cos(phi)
inline double gravity_gradient(double rho_mix, const WellSpec& well) {
    return rho_mix * well.gravity * std::cos(well.inclination);
}

inline double gravity_gradient(const Primitive& prim, const WellSpec& well) {
    return gravity_gradient(prim.mixture_density(), well);
}

// Recover (p, alpha_G, rho_L, rho_G) from the mass variables m = alpha_L rho_L,
// n = alpha_G rho_G. Eliminating the fractions gives the quadratic
//   p^2/c_L^2 + p (rho_L0 - m - n c_G^2/c_L^2) - n c_G^2 rho_L0 = 0,
// whose larger root is the physical pressure (the other root is <= 0 for
// admissible states). alpha_G = n c_G^2 / p then lands in [0,1] automatically.
inline Primitive resolve_pressure(double m, double n, const FluidSpec& fluid) {
    if (m < 0.0 || n < 0.0 || (m == 0.0 && n == 0.0))
        throw Error(ErrorKind::State, "resolve_pressure: require m >= 0, n >= 0, (m,n) != (0,0)");

    const double cl2 = fluid.c_liquid * fluid.c_liquid;
    const double cg2 = fluid.c_gas * fluid.c_gas;
    const double rho0 = fluid.rho_liquid_vacuum;

    double p;
    if (n == 0.0) {
        p = cl2 * (m - rho0);
        if (!(p > 0.0))
            throw Error(ErrorKind::State, "resolve_pressure: no positive root (m below vacuum density, no gas)");
    } else {
        const double a = 1.0 / cl2;
        const double b = rho0 - m - n * cg2 / cl2;
        const double c = -n * cg2 * rho0;
        const double disc = b * b - 4.0 * a * c; // = b^2 + 4 n cG^2 rho0 / cL^2 > 0
        const double sq = std::sqrt(disc);
        // numerically stable positive root
        p = (b <= 0.0) ? (-b + sq) / (2.0 * a) : (2.0 * (-c)) / (b + sq);
        if (!(p > 0.0) || !std::isfinite(p))
            throw Error(ErrorKind::State, "resolve_pressure: no positive root");
    }

    Primitive prim;
    prim.p = p;
    prim.rho_l = rho0 + p / cl2;
    prim.rho_g = p / cg2;
    prim.alpha_g = n * cg2 / p;
    if (prim.alpha_g < 0.0 || prim.alpha_g > 1.0 + 1e-12)
        throw Error(ErrorKind::State, "resolve_pressure: alpha_G outside [0,1]");
    if (prim.alpha_g > 1.0) prim.alpha_g = 1.0;
    return prim;
}

// Invert the mixture momentum I = m v_L + n v_G under the slip law.
inline void velocities_from_momentum(double m, double n, double momentum,
                                     const FluidSpec& fluid, double& v_l, double& v_g) {
    const double denom = m + n * fluid.slip_c0;
    if (!(denom > 0.0))
        throw Error(ErrorKind::State, "velocities_from_momentum: degenerate denominator m + n C0");
    v_l = (momentum - n * fluid.slip_v_inf) / denom;
    v_g = slip_velocity(v_l, fluid);
}

// Mass variables from a primitive state (inverse of resolve_pressure).
inline void conservative_from_primitive(const Primitive& prim, double& m, double& n) {
    m = (1.0 - prim.alpha_g) * prim.rho_l;
    n = prim.alpha_g * prim.rho_g;
}

// Build a fully populated primitive from (p, alpha_G, v_L).
inline Primitive make_primitive(double p, double alpha_g, double v_l, const FluidSpec& fluid) {
    Primitive prim;
    prim.p = p;
    prim.alpha_g = alpha_g;
    prim.rho_l = liquid_density(p, fluid);
    prim.rho_g = gas_density(p, fluid);
    prim.v_l = v_l;
    prim.v_g = slip_velocity(v_l, fluid);
    return prim;
}

// Slip-consistent mixture velocity of the reduced model: v_L = (v_G - v_inf)/C0.
inline double mixture_velocity_from_gas(double alpha_g, double v_g, const FluidSpec& fluid) {
    const double v_l = (v_g - fluid.slip_v_inf) / fluid.slip_c0;
    return (1.0 - alpha_g) * v_l + alpha_g * v_g;
}

// Non-throwing variant of resolve_pressure for hot loops (integrator trial
// states routinely probe unphysical corners).
inline bool try_resolve_pressure(double m, double n, const FluidSpec& fluid, Primitive& prim) {
    if (m < 0.0 || n < 0.0 || (m == 0.0 && n == 0.0)) return false;
    const double cl2 = fluid.c_liquid * fluid.c_liquid;
    const double cg2 = fluid.c_gas * fluid.c_gas;
    const double rho0 = fluid.rho_liquid_vacuum;
    double p;
    if (n == 0.0) {
        p = cl2 * (m - rho0);
        if (!(p > 0.0)) return false;
    } else {
        const double a = 1.0 / cl2;
        const double b = rho0 - m - n * cg2 / cl2;
        const double c = -n * cg2 * rho0;
        const double disc = b * b - 4.0 * a * c;
        if (!(disc >= 0.0)) return false;
        const double sq = std::sqrt(disc);
        p = (b <= 0.0) ? (-b + sq) / (2.0 * a) : (2.0 * (-c)) / (b + sq);
        if (!(p > 0.0) || !std::isfinite(p)) return false;
    }
    prim.p = p;
    prim.rho_l = rho0 + p / cl2;
    prim.rho_g = p / cg2;
    prim.alpha_g = (n == 0.0) ? 0.0 : std::min(n * cg2 / p, 1.0);
    return true;
}

// Split superficial (volumetric flux) velocities into (alpha_G, v_G, v_L)
// under the slip law: alpha vG = q_g, (1-alpha) vL = q_l, vG = C0 vL + v_inf.
// Eliminating alpha gives  vG^2 - (q_g + v_inf + C0 q_l) vG + q_g v_inf = 0,
// whose larger root is the physical one (alpha in [0,1], vG >= v_inf when
// q_l > 0). Exact, so the boundary residuals hold to round-off.
struct FluxSplit {
    double alpha_g;
    double v_g;
    double v_l;
};

inline FluxSplit slip_flux_split(double q_gas, double q_liquid, const FluidSpec& fluid) {
    if (q_gas < 0.0 || q_liquid < 0.0)
        throw Error(ErrorKind::Boundary, "slip_flux_split: superficial velocities must be >= 0");
    const double b = q_gas + fluid.slip_v_inf + fluid.slip_c0 * q_liquid;
    const double disc = b * b - 4.0 * q_gas * fluid.slip_v_inf;
    const double v_g = 0.5 * (b + std::sqrt(std::max(disc, 0.0)));
    FluxSplit out;
    if (v_g <= 0.0) { // q_gas = q_liquid = v_inf = 0
        out.alpha_g = 0.0;
        out.v_g = fluid.slip_v_inf;
        out.v_l = 0.0;
        return out;
    }
    out.v_g = v_g;
    out.alpha_g = q_gas / v_g;
    out.v_l = (v_g - fluid.slip_v_inf) / fluid.slip_c0;
    if (!(out.alpha_g >= 0.0 && out.alpha_g <= 1.0) || !std::isfinite(out.v_g))
        throw Error(ErrorKind::Boundary, "slip_flux_split: no admissible split");
    return out;
}

} // namespace ubd
