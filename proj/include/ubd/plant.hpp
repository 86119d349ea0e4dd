#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "ubd/closures.hpp"
#include "ubd/grid.hpp"
#include "ubd/linalg.hpp"
#include "ubd/measurement.hpp"
#include "ubd/schedule.hpp"
#include "ubd/specs.hpp"
#include "ubd/tr_bdf2.hpp"

namespace ubd {

// Conservative plant state: per cell the liquid mass m = alpha_L rho_L, the
// gas mass n = alpha_G rho_G, and the mixture momentum I = m vL + n vG.
// The boundary-mass accumulators ride along as integrator quadrature
// variables so phase conservation can be audited at integrator accuracy.
struct PlantState {
    double t = 0.0;
    std::vector<double> m;        // kg/m^3
    std::vector<double> n;        // kg/m^3
    std::vector<double> momentum; // kg/(m^2 s)
    double liquid_in = 0.0;       // kg through x = 0
    double liquid_out = 0.0;      // kg through x = L
    double gas_in = 0.0;
    double gas_out = 0.0;

    std::size_t n_cells() const { return m.size(); }
};

struct PlantDerivative {
    std::vector<double> dm, dn, dmomentum;
};

// Semidiscrete drift-flux plant: first-order upwind mass fluxes, mass-flux
// consistent momentum advection, face pressure differences, and the physical
// boundary conditions (imposed topside pressure, pump liquid rate and
// drawdown-proportional gas influx at the bottom).
class PlantModel {
public:
    PlantModel(const Grid& grid, const ModelSpecs& specs, const ReservoirSpec& res,
               double liquid_injection)
        : grid_(grid), specs_(specs), res_(res), w_l_inj_(liquid_injection) {
        const std::size_t N = grid_.n_cells;
        prim_.resize(N);
        vl_.resize(N);
        vg_.resize(N);
        fm_.resize(N + 1);
        fn_.resize(N + 1);
        fi_.resize(N + 1);
        pface_.resize(N + 1);
    }

    void set_topside(std::function<double(double)> p_top) { p_top_ = std::move(p_top); }
    void set_liquid_injection(double w) { w_l_inj_ = w; }

    std::size_t n_blocks() const { return grid_.n_cells; }
    std::size_t block_size() const { return 3; }
    std::size_t size() const { return 3 * grid_.n_cells + 4; }
    double typical(std::size_t k) const { return k == 1 ? 1.0 : 1000.0; }
    const std::string& last_error() const { return last_error_; }

    const Grid& grid() const { return grid_; }
    const ModelSpecs& specs() const { return specs_; }
    const ReservoirSpec& reservoir() const { return res_; }
    double liquid_injection() const { return w_l_inj_; }

    // --- flat-vector packing -------------------------------------------------

    std::vector<double> pack(const PlantState& s) const {
        const std::size_t N = grid_.n_cells;
        std::vector<double> y(size());
        for (std::size_t i = 0; i < N; ++i) {
            y[3 * i] = s.m[i];
            y[3 * i + 1] = s.n[i];
            y[3 * i + 2] = s.momentum[i];
        }
        y[3 * N] = s.liquid_in;
        y[3 * N + 1] = s.liquid_out;
        y[3 * N + 2] = s.gas_in;
        y[3 * N + 3] = s.gas_out;
        return y;
    }

    PlantState unpack(double t, const std::vector<double>& y) const {
        const std::size_t N = grid_.n_cells;
        PlantState s;
        s.t = t;
        s.m.resize(N);
        s.n.resize(N);
        s.momentum.resize(N);
        for (std::size_t i = 0; i < N; ++i) {
            s.m[i] = std::max(y[3 * i], 0.0);
            s.n[i] = std::max(y[3 * i + 1], 0.0);
            s.momentum[i] = y[3 * i + 2];
        }
        s.liquid_in = y[3 * N];
        s.liquid_out = y[3 * N + 1];
        s.gas_in = y[3 * N + 2];
        s.gas_out = y[3 * N + 3];
        return s;
    }

    // --- integrator interface ------------------------------------------------

    bool rhs(double t, const double* y, double* f) {
        const std::size_t N = grid_.n_cells;
        const double dx = grid_.dx();
        const FluidSpec& fluid = specs_.fluid;
        const WellSpec& well = specs_.well;

        // primitives per cell; tolerate round-off negatives
        for (std::size_t i = 0; i < N; ++i) {
            double m = y[3 * i], n = y[3 * i + 1];
            if (m < 0.0) {
                if (m < -kNegTol) return fail(t, i, "m < 0");
                m = 0.0;
            }
            if (n < 0.0) {
                if (n < -kNegTol) return fail(t, i, "n < 0");
                n = 0.0;
            }
            if (!try_resolve_pressure(m, n, fluid, prim_[i])) return fail(t, i, "pressure solve failed");
            if (!(prim_[i].p > kPressureFloor && prim_[i].p < kPressureCeil))
                return fail(t, i, "pressure out of range");
            const double denom = m + n * fluid.slip_c0;
            if (!(denom > 0.0)) return fail(t, i, "degenerate momentum inversion");
            vl_[i] = (y[3 * i + 2] - n * fluid.slip_v_inf) / denom;
            vg_[i] = slip_velocity(vl_[i], fluid);
        }

        // bottomhole pressure extrapolated to the x = 0 face
        const double p_bh = bottom_pressure_from_prims();
        if (!(p_bh > kPressureFloor)) return fail(t, 0, "bottomhole pressure out of range");

        // bottom boundary: prescribed mass fluxes, slip-consistent velocities
        const double gas_rate = res_.production_index * std::max(0.0, res_.pore_pressure - p_bh);
        const double phi_m0 = w_l_inj_ / well.annulus_area;
        const double phi_n0 = gas_rate / well.annulus_area;
        const double rho_l0 = liquid_density(p_bh, fluid);
        const double rho_g0 = gas_density(p_bh, fluid);
        FluxSplit bc;
        try {
            bc = slip_flux_split(phi_n0 / rho_g0, phi_m0 / rho_l0, fluid);
        } catch (const Error&) {
            return fail(t, 0, "bottom boundary split failed");
        }
        fm_[0] = phi_m0;
        fn_[0] = phi_n0;
        fi_[0] = phi_m0 * bc.v_l + phi_n0 * bc.v_g;
        pface_[0] = p_bh;

        // interior faces: donor-cell upwinding by the face velocity
        for (std::size_t j = 1; j < N; ++j) {
            const double vlf = 0.5 * (vl_[j - 1] + vl_[j]);
            const std::size_t dl = (vlf >= 0.0) ? j - 1 : j;
            fm_[j] = y[3 * dl] * vl_[dl];
            const double vgf = 0.5 * (vg_[j - 1] + vg_[j]);
            const std::size_t dg = (vgf >= 0.0) ? j - 1 : j;
            fn_[j] = y[3 * dg + 1] * vg_[dg];
            fi_[j] = fm_[j] * vl_[dl] + fn_[j] * vg_[dg];
            pface_[j] = 0.5 * (prim_[j - 1].p + prim_[j].p);
        }

        // top face: imposed pressure, first-order outflow extrapolation
        fm_[N] = y[3 * (N - 1)] * vl_[N - 1];
        fn_[N] = y[3 * (N - 1) + 1] * vg_[N - 1];
        fi_[N] = fm_[N] * vl_[N - 1] + fn_[N] * vg_[N - 1];
        const double ptop = p_top_ ? p_top_(t) : prim_[N - 1].p;
        if (!(ptop > kPressureFloor)) return fail(t, N - 1, "topside pressure out of range");
        pface_[N] = ptop;

        for (std::size_t i = 0; i < N; ++i) {
            const double rho = std::max(y[3 * i], 0.0) + std::max(y[3 * i + 1], 0.0);
            const double vm = prim_[i].alpha_g * vg_[i] + (1.0 - prim_[i].alpha_g) * vl_[i];
            const double Fg = friction_gradient(rho, vm, well);
            const double Gg = gravity_gradient(rho, well);
            f[3 * i] = -(fm_[i + 1] - fm_[i]) / dx;
            f[3 * i + 1] = -(fn_[i + 1] - fn_[i]) / dx;
            f[3 * i + 2] = -(fi_[i + 1] - fi_[i]) / dx - (pface_[i + 1] - pface_[i]) / dx - Fg - Gg;
        }
        const double A = well.annulus_area;
        f[3 * N] = A * fm_[0];
        f[3 * N + 1] = A * fm_[N];
        f[3 * N + 2] = A * fn_[0];
        f[3 * N + 3] = A * fn_[N];
        return true;
    }

    bool state_ok(const double* y) const {
        const std::size_t N = grid_.n_cells;
        Primitive prim;
        for (std::size_t i = 0; i < N; ++i) {
            const double m = y[3 * i], n = y[3 * i + 1];
            if (m < -kNegTol || n < -kNegTol) return false;
            if (!try_resolve_pressure(std::max(m, 0.0), std::max(n, 0.0), specs_.fluid, prim)) return false;
            if (!(prim.p > kPressureFloor && prim.p < kPressureCeil)) return false;
        }
        return true;
    }

    // --- derived quantities ---------------------------------------------------

    // face-extrapolated bottomhole pressure of a state
    double bottom_pressure(const PlantState& s) const {
        const Primitive p0 = resolve_pressure(s.m[0], s.n[0], specs_.fluid);
        const Primitive p1 = resolve_pressure(s.m[1], s.n[1], specs_.fluid);
        return 1.5 * p0.p - 0.5 * p1.p;
    }

    Primitive cell_primitive(const PlantState& s, std::size_t i) const {
        Primitive prim = resolve_pressure(s.m[i], s.n[i], specs_.fluid);
        velocities_from_momentum(s.m[i], s.n[i], s.momentum[i], specs_.fluid, prim.v_l, prim.v_g);
        return prim;
    }

    // topside record by linear extrapolation of the last two cell centers
    MeasurementRecord measure(const PlantState& s) const {
        const std::size_t N = grid_.n_cells;
        const Primitive a = cell_primitive(s, N - 2);
        const Primitive b = cell_primitive(s, N - 1);
        MeasurementRecord rec;
        rec.t = s.t;
        rec.alpha_top = std::clamp(1.5 * b.alpha_g - 0.5 * a.alpha_g, 0.0, 1.0);
        rec.p_top = 1.5 * b.p - 0.5 * a.p;
        rec.v_g_top = 1.5 * b.v_g - 0.5 * a.v_g;
        return rec;
    }

    double bottom_alpha(const PlantState& s) const {
        const Primitive p0 = resolve_pressure(s.m[0], s.n[0], specs_.fluid);
        const Primitive p1 = resolve_pressure(s.m[1], s.n[1], specs_.fluid);
        return std::clamp(1.5 * p0.alpha_g - 0.5 * p1.alpha_g, 0.0, 1.0);
    }

private:
    double bottom_pressure_from_prims() const {
        return 1.5 * prim_[0].p - 0.5 * prim_[1].p;
    }

    bool fail(double t, std::size_t cell, const char* what) {
        last_error_ = std::string(what) + " in cell " + std::to_string(cell) + " at t=" + std::to_string(t);
        return false;
    }

    static constexpr double kNegTol = 1e-7;
    static constexpr double kPressureFloor = 1.0e4; // Pa
    static constexpr double kPressureCeil = 1.0e9;  // Pa

    Grid grid_;
    ModelSpecs specs_;
    ReservoirSpec res_;
    double w_l_inj_;
    std::function<double(double)> p_top_;
    std::string last_error_;
    std::vector<Primitive> prim_;
    std::vector<double> vl_, vg_, fm_, fn_, fi_, pface_;
};

// Spec-level RHS entry point (used by the fixed-point and conservation tests).
inline PlantDerivative plant_rhs(const PlantState& state, double p_top, double liquid_injection,
                                 const ReservoirSpec& res, const ModelSpecs& specs, const Grid& grid) {
    PlantModel model(grid, specs, res, liquid_injection);
    model.set_topside([p_top](double) { return p_top; });
    std::vector<double> y = model.pack(state);
    std::vector<double> f(y.size());
    if (!model.rhs(state.t, y.data(), f.data()))
        throw Error(ErrorKind::State, "plant_rhs: " + model.last_error());
    PlantDerivative d;
    const std::size_t N = grid.n_cells;
    d.dm.resize(N);
    d.dn.resize(N);
    d.dmomentum.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        d.dm[i] = f[3 * i];
        d.dn[i] = f[3 * i + 1];
        d.dmomentum[i] = f[3 * i + 2];
    }
    return d;
}

// No-gas momentum steady state: n = 0, I = W/A in every cell, and the cell
// pressures solve the discrete momentum balance with p(L) = p_top. Newton on
// the tridiagonal pressure system, seeded with the downward-marched ODE.
// The reservoir does not enter (a sealed one is used for the residuals).
inline PlantState steady_state_no_gas(double p_top, double liquid_injection,
                                      const ModelSpecs& specs, const Grid& grid) {
    if (!(p_top >= units::bar))
        throw Error(ErrorKind::Domain, "steady_state_no_gas: p_top must be >= 1 bar");
    const std::size_t N = grid.n_cells;
    const double dx = grid.dx();
    const FluidSpec& fluid = specs.fluid;
    const WellSpec& well = specs.well;
    const double phi = liquid_injection / well.annulus_area;

    auto grad = [&](double p) {
        const double rho = liquid_density(p, fluid);
        const double v = phi / rho;
        return gravity_gradient(rho, well) + friction_gradient(rho, v, well);
    };

    // initial guess: march down from the top face to each cell center
    std::vector<double> p(N);
    double pc = p_top + 0.5 * dx * grad(p_top);
    p[N - 1] = p_top + 0.5 * dx * grad(pc);
    for (std::size_t i = N - 1; i-- > 0;) {
        const double mid = p[i + 1] + 0.5 * dx * grad(p[i + 1]);
        p[i] = p[i + 1] + dx * grad(mid);
    }

    PlantModel model(grid, specs, ReservoirSpec{1.0, 0.0}, liquid_injection);
    model.set_topside([p_top](double) { return p_top; });

    auto residual = [&](const std::vector<double>& pv, std::vector<double>& r) {
        const std::size_t n_ = pv.size();
        PlantState s;
        s.t = 0.0;
        s.m.resize(n_);
        s.n.assign(n_, 0.0);
        s.momentum.assign(n_, phi);
        for (std::size_t i = 0; i < n_; ++i) {
            if (!(pv[i] > 0.0)) throw Error(ErrorKind::State, "steady_state_no_gas: negative pressure iterate");
            s.m[i] = liquid_density(pv[i], fluid);
        }
        std::vector<double> y = model.pack(s);
        std::vector<double> f(y.size());
        if (!model.rhs(0.0, y.data(), f.data()))
            throw Error(ErrorKind::State, "steady_state_no_gas: " + model.last_error());
        for (std::size_t i = 0; i < n_; ++i) r[i] = f[3 * i + 2];
    };

    std::vector<double> r(N), rp(N), ptry(N);
    BlockTridiag jac;
    jac.resize(N, 1);
    residual(p, r);
    double rnorm = 0.0;
    for (double v : r) rnorm = std::max(rnorm, std::abs(v));

    const double tol = 1e-7; // Pa/m
    for (int it = 0; it < 60 && rnorm > tol; ++it) {
        // tridiagonal FD Jacobian, three-coloring
        std::fill(jac.lower.begin(), jac.lower.end(), 0.0);
        std::fill(jac.diag.begin(), jac.diag.end(), 0.0);
        std::fill(jac.upper.begin(), jac.upper.end(), 0.0);
        for (std::size_t phase = 0; phase < 3; ++phase) {
            ptry = p;
            std::vector<double> dcol(N, 0.0);
            for (std::size_t c = phase; c < N; c += 3) {
                dcol[c] = 1e-4 * std::max(std::abs(p[c]), 1e5);
                ptry[c] += dcol[c];
            }
            residual(ptry, rp);
            for (std::size_t c = phase; c < N; c += 3) {
                const double inv = 1.0 / dcol[c];
                if (c > 0) jac.upper_block(c - 1)[0] = (rp[c - 1] - r[c - 1]) * inv;
                jac.diag_block(c)[0] = (rp[c] - r[c]) * inv;
                if (c + 1 < N) jac.lower_block(c + 1)[0] = (rp[c + 1] - r[c + 1]) * inv;
            }
        }
        if (!jac.factor()) throw Error(ErrorKind::State, "steady_state_no_gas: singular Jacobian");
        std::vector<double> step(r);
        jac.solve(step.data());
        // damped update with residual backtracking
        double lambda = 1.0;
        for (int bt = 0; bt < 8; ++bt) {
            for (std::size_t i = 0; i < N; ++i) ptry[i] = p[i] - lambda * step[i];
            bool ok = true;
            for (double v : ptry)
                if (!(v > 1e4)) { ok = false; break; }
            if (ok) {
                try {
                    residual(ptry, rp);
                } catch (const Error&) {
                    ok = false;
                }
            }
            if (ok) {
                double rn = 0.0;
                for (double v : rp) rn = std::max(rn, std::abs(v));
                if (rn < rnorm || lambda < 0.2) {
                    p = ptry;
                    r = rp;
                    rnorm = rn;
                    break;
                }
            }
            lambda *= 0.5;
            if (bt == 7) throw Error(ErrorKind::State, "steady_state_no_gas: line search failed");
        }
    }
    if (!(rnorm <= tol))
        throw Error(ErrorKind::State, "steady_state_no_gas: fixed point did not converge");

    PlantState s;
    s.t = 0.0;
    s.m.resize(N);
    s.n.assign(N, 0.0);
    s.momentum.assign(N, phi);
    for (std::size_t i = 0; i < N; ++i) s.m[i] = liquid_density(p[i], fluid);
    return s;
}

// Plant trajectory driver: owns the stiff integrator, restarts cleanly at
// schedule breakpoints, and hands out sampled states.
class PlantSimulator {
public:
    PlantSimulator(const Grid& grid, const ModelSpecs& specs, const ReservoirSpec& res,
                   double liquid_injection, TrBdf2Options opt = default_options())
        : model_(grid, specs, res, liquid_injection), integ_(model_, opt) {}

    static TrBdf2Options default_options() {
        TrBdf2Options opt;
        opt.rtol = 1e-6;
        opt.atol_core = 1e-7;
        opt.atol_quad = 1e-2;
        opt.h_init = 1e-3;
        opt.h_max = 30.0;
        return opt;
    }

    void set_state(const PlantState& s) {
        state_ = s;
        integ_.set_state(s.t, model_.pack(s));
    }

    void set_schedule(const Schedule& sched) {
        schedule_ = sched;
        model_.set_topside([this](double t) { return schedule_.value(t); });
        rhs_dirty_ = true;
    }

    // advance to t_end, splitting exactly at schedule breakpoints
    void advance_to(double t_end) {
        if (rhs_dirty_) {
            integ_.set_state(state_.t, model_.pack(state_)); // drops cached rhs across input jumps
            rhs_dirty_ = false;
        }
        if (t_end <= state_.t) {
            if (t_end < state_.t - 1e-9)
                throw Error(ErrorKind::Integration, "plant: cannot advance backwards");
            return; // zero-span request returns the state unchanged
        }
        std::vector<double> cuts = schedule_.breakpoints_between(state_.t, t_end);
        cuts.push_back(t_end);
        for (double tc : cuts) {
            integ_.advance_to(tc);
            integ_.invalidate_rhs(); // input may jump at the breakpoint
        }
        state_ = model_.unpack(integ_.time(), integ_.state());
    }

    const PlantState& state() const { return state_; }
    PlantModel& model() { return model_; }
    const PlantModel& model() const { return model_; }
    MeasurementRecord measure() const { return model_.measure(state_); }
    double bottom_pressure() const { return model_.bottom_pressure(state_); }
    std::size_t steps_taken() const { return integ_.steps_taken(); }

private:
    PlantModel model_;
    TrBdf2<PlantModel> integ_;
    Schedule schedule_ = Schedule::constant(10.0 * units::bar);
    PlantState state_;
    bool rhs_dirty_ = true;
};

// Spec-level trajectory call: advance from `state` under `schedule`, returning
// the state at each requested sample time (sample times must be ascending).
inline std::vector<PlantState> advance_plant(const PlantState& state, const Schedule& schedule,
                                             double t0, double t1, double liquid_injection,
                                             const ReservoirSpec& res, const ModelSpecs& specs,
                                             const Grid& grid,
                                             const std::vector<double>& sample_times,
                                             TrBdf2Options opt = PlantSimulator::default_options()) {
    if (t1 < t0) throw Error(ErrorKind::Integration, "advance_plant: t1 < t0");
    PlantSimulator sim(grid, specs, res, liquid_injection, opt);
    PlantState s0 = state;
    s0.t = t0;
    sim.set_state(s0);
    sim.set_schedule(schedule);
    std::vector<PlantState> out;
    for (double ts : sample_times) {
        if (ts < t0 - 1e-9 || ts > t1 + 1e-9)
            throw Error(ErrorKind::Integration, "advance_plant: sample time outside [t0, t1]");
        sim.advance_to(std::min(std::max(ts, t0), t1));
        out.push_back(sim.state());
    }
    if (out.empty() || out.back().t < t1 - 1e-9) {
        sim.advance_to(t1);
        out.push_back(sim.state());
    }
    return out;
}

} // namespace ubd
