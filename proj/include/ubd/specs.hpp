#pragma once

#include <cmath>
#include <string>

#include "ubd/error.hpp"
#include "ubd/units.hpp"

namespace ubd {

// Static well geometry. x runs along the annulus from the bottom (x = 0)
// to the topside choke (x = L).
struct WellSpec {
    double length = 2500.0;         // m
    double annulus_area = 0.012;    // m^2
    double hydraulic_diameter = 0.0635; // m
    double friction_factor = 0.03;  // -
    double inclination = 0.0;       // rad from vertical
    double gravity = 9.81;          // m/s^2

    void validate() const {
        if (!(length > 0.0)) throw Error(ErrorKind::Validation, "well.length must be > 0");
        if (!(annulus_area > 0.0)) throw Error(ErrorKind::Validation, "well.annulus_area must be > 0");
        if (!(hydraulic_diameter > 0.0)) throw Error(ErrorKind::Validation, "well.hydraulic_diameter must be > 0");
        if (!(friction_factor >= 0.0)) throw Error(ErrorKind::Validation, "well.friction_factor must be >= 0");
        if (!(inclination >= 0.0 && inclination < 1.5707963267948966))
            throw Error(ErrorKind::Validation, "well.inclination must be in [0, pi/2)");
        if (!(gravity > 0.0)) throw Error(ErrorKind::Validation, "well.gravity must be > 0");
    }
};

// Fluid closures: linear liquid compressibility, ideal-gas-like gas density,
// and the empirical slip law v_G = C0 v_L + v_inf.
struct FluidSpec {
    double rho_liquid_vacuum = 975.0; // kg/m^3, liquid density at p = 0
    double c_liquid = 1000.0;         // m/s, liquid speed of sound
    double c_gas = 315.0;             // m/s, gas speed of sound
    double slip_c0 = 1.1;             // -
    double slip_v_inf = 0.1;          // m/s

    void validate() const {
        if (!(rho_liquid_vacuum > 0.0)) throw Error(ErrorKind::Validation, "fluid.rho_liquid_vacuum must be > 0");
        if (!(c_liquid > 0.0)) throw Error(ErrorKind::Validation, "fluid.c_liquid must be > 0");
        if (!(c_gas > 0.0)) throw Error(ErrorKind::Validation, "fluid.c_gas must be > 0");
        if (!(slip_c0 >= 1.0)) throw Error(ErrorKind::Validation, "fluid.slip_c0 must be >= 1");
        if (!(slip_v_inf >= 0.0)) throw Error(ErrorKind::Validation, "fluid.slip_v_inf must be >= 0");
    }
};

// Linear inflow-performance reservoir: gas mass rate = k_G * max(0, p_res - p(0)).
struct ReservoirSpec {
    double pore_pressure = 266.0 * units::bar;  // Pa
    double production_index = 0.01 / units::bar; // kg/(s*Pa)

    void validate() const {
        if (!(pore_pressure > 0.0)) throw Error(ErrorKind::Validation, "reservoir.pore_pressure must be > 0");
        if (!(production_index >= 0.0)) throw Error(ErrorKind::Validation, "reservoir.production_index must be >= 0");
    }
};

// Sampling and reference design parameters for the feedback loop.
struct ControlSpec {
    double theta = 600.0;            // s, controller sampling period
    double zoh_period = 120.0;       // s, actuation hold
    double p_ref = 265.0 * units::bar; // Pa
    double p_prime = 10.0 * units::bar / units::hour; // Pa/s, reference ramp rate
    double horizon = 2400.0;         // s, measurement history length T
    double integral_gain = 0.1 / 3600.0; // 1/s, used only when integral action is on
    double integral_period = 3600.0; // s, downhole sampling period for the integral term

    void validate() const {
        if (!(theta > 0.0)) throw Error(ErrorKind::Validation, "control.theta must be > 0");
        if (!(zoh_period > 0.0)) throw Error(ErrorKind::Validation, "control.zoh_period must be > 0");
        const double ratio = theta / zoh_period;
        if (std::abs(ratio - std::round(ratio)) > 1e-9)
            throw Error(ErrorKind::Validation, "control.theta must be an integer multiple of control.zoh_period");
        if (!(p_prime > 0.0)) throw Error(ErrorKind::Validation, "control.p_prime must be > 0");
        if (!(horizon > 0.0)) throw Error(ErrorKind::Validation, "control.horizon must be > 0");
        if (!(integral_period > 0.0)) throw Error(ErrorKind::Validation, "control.integral_period must be > 0");
    }
};

// Well + fluid bundle passed to every kernel that needs the closures.
struct ModelSpecs {
    WellSpec well;
    FluidSpec fluid;

    void validate() const {
        well.validate();
        fluid.validate();
    }
};

} // namespace ubd
