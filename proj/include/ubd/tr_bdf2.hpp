#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ubd/error.hpp"
#include "ubd/linalg.hpp"

namespace ubd {

// Adaptive TR-BDF2 (the ode23tb family): one-step, L-stable, second order
// with a third-order embedded error estimate. Suited to the stiff
// semidiscretized momentum/mass system of the plant.
//
// The System type must provide:
//   std::size_t size() const;        total number of state variables
//   std::size_t n_blocks() const;    number of grid cells
//   std::size_t block_size() const;  variables per cell
//   bool rhs(double t, const double* y, double* f);
//       returns false (after setting last_error) when y is not evaluable
//   bool state_ok(const double* y) const;  cheap invariant screen
//   double typical(std::size_t k) const;   magnitude scale of block variable k
//   const std::string& last_error() const;
//
// Variables beyond n_blocks()*block_size() are quadrature outputs: their
// rhs may depend on the core state but nothing depends on them, so they are
// excluded from the Newton system and updated explicitly per stage.
struct TrBdf2Options {
    double rtol = 1e-6;
    double atol_core = 1e-6;
    double atol_quad = 1e-3;
    double h_init = 1e-2;
    double h_min = 1e-10;
    double h_max = 60.0;
    int max_newton = 8;
    std::size_t max_steps_per_advance = 50'000'000;
};

template <class System>
class TrBdf2 {
public:
    TrBdf2(System& sys, TrBdf2Options opt = {}) : sys_(sys), opt_(opt) {
        n_ = sys_.size();
        nb_ = sys_.block_size();
        nc_ = sys_.n_blocks();
        ncore_ = nb_ * nc_;
        y_.assign(n_, 0.0);
        f0_.assign(n_, 0.0);
        fg_.assign(n_, 0.0);
        f1_.assign(n_, 0.0);
        yg_.assign(n_, 0.0);
        y1_.assign(n_, 0.0);
        psi_.assign(n_, 0.0);
        delta_.assign(ncore_, 0.0);
        est_.assign(n_, 0.0);
        ytmp_.assign(n_, 0.0);
        ftmp_.assign(n_, 0.0);
        jac_.resize(nc_, nb_);
        newton_.resize(nc_, nb_);
    }

    void set_state(double t, const std::vector<double>& y) {
        if (y.size() != n_) throw Error(ErrorKind::Integration, "integrator: state size mismatch");
        t_ = t;
        y_ = y;
        h_ = opt_.h_init;
        have_f0_ = false;
        have_jac_ = false;
    }

    // Drop cached rhs/Jacobian after a discontinuous input change; keeps the
    // current step size.
    void invalidate_rhs() {
        have_f0_ = false;
        have_jac_ = false;
    }

    double time() const { return t_; }
    const std::vector<double>& state() const { return y_; }
    std::size_t steps_taken() const { return n_steps_; }

    // Advance to exactly t_end (steps are capped so the final step lands on it).
    void advance_to(double t_end) {
        if (t_end < t_ - 1e-9)
            throw Error(ErrorKind::Integration, "integrator: cannot advance backwards");
        std::size_t steps = 0;
        while (t_ < t_end - 1e-9 * std::max(1.0, std::abs(t_end))) {
            if (++steps > opt_.max_steps_per_advance)
                throw Error(ErrorKind::Integration, "integrator: step limit exceeded at t=" + std::to_string(t_));
            step_to(t_end);
        }
        t_ = t_end;
    }

private:
    static constexpr double kGamma = 0.5857864376269049; // 2 - sqrt(2)
    static constexpr double kD = 0.29289321881345254;    // gamma/2, diagonal coefficient
    static constexpr double kA31 = -0.20710678118654752; // BDF2 stage: -(1-g)^2/(g(2-g))
    static constexpr double kA32 = 1.2071067811865475;   // BDF2 stage: 1/(g(2-g))
    static constexpr double kE1 = 0.13807118615816945;   // (sqrt(2)-1)/3
    static constexpr double kE2 = -1.0 / 3.0;
    static constexpr double kE3 = 0.19526214587563498;   // gamma/3

    double weight(std::size_t i, double yref) const {
        const double atol = (i < ncore_) ? opt_.atol_core : opt_.atol_quad;
        return atol + opt_.rtol * std::abs(yref);
    }

    void ensure_f0() {
        if (have_f0_) return;
        if (!sys_.rhs(t_, y_.data(), f0_.data()))
            throw Error(ErrorKind::Integration,
                        "integrator: rhs failed at current state, t=" + std::to_string(t_) + " (" + sys_.last_error() + ")");
        have_f0_ = true;
    }

    // Finite-difference block-tridiagonal Jacobian at (t_, y_), using f0_.
    void form_jacobian() {
        ensure_f0();
        const double sqrt_eps = 1.4901161193847656e-08;
        std::fill(jac_.lower.begin(), jac_.lower.end(), 0.0);
        std::fill(jac_.diag.begin(), jac_.diag.end(), 0.0);
        std::fill(jac_.upper.begin(), jac_.upper.end(), 0.0);
        ytmp_ = y_;
        // columns with the same (cell mod 3, var) are structurally independent
        for (std::size_t phase = 0; phase < 3; ++phase) {
            for (std::size_t k = 0; k < nb_; ++k) {
                std::vector<double> dy(nc_, 0.0);
                bool any = false;
                const double scale = sys_.typical(k);
                for (std::size_t c = phase; c < nc_; c += 3) {
                    const std::size_t j = c * nb_ + k;
                    const double d = sqrt_eps * std::max(std::abs(y_[j]), scale);
                    dy[c] = d;
                    ytmp_[j] += d;
                    any = true;
                }
                if (!any) continue;
                if (!sys_.rhs(t_, ytmp_.data(), ftmp_.data())) {
                    // retry with negative perturbation
                    for (std::size_t c = phase; c < nc_; c += 3) {
                        const std::size_t j = c * nb_ + k;
                        ytmp_[j] = y_[j] - dy[c];
                        dy[c] = -dy[c];
                    }
                    if (!sys_.rhs(t_, ytmp_.data(), ftmp_.data()))
                        throw Error(ErrorKind::Integration,
                                    "integrator: jacobian rhs failed, t=" + std::to_string(t_) + " (" + sys_.last_error() + ")");
                }
                for (std::size_t c = phase; c < nc_; c += 3) {
                    const std::size_t j = c * nb_ + k;
                    const double inv = 1.0 / dy[c];
                    for (std::size_t cr = (c == 0 ? 0 : c - 1); cr <= std::min(c + 1, nc_ - 1); ++cr) {
                        double* blk = (cr + 1 == c)   ? jac_.upper_block(cr)
                                      : (cr == c)     ? jac_.diag_block(cr)
                                                      : jac_.lower_block(cr);
                        for (std::size_t r = 0; r < nb_; ++r)
                            blk[r * nb_ + k] = (ftmp_[cr * nb_ + r] - f0_[cr * nb_ + r]) * inv;
                    }
                    ytmp_[j] = y_[j];
                }
            }
        }
        have_jac_ = true;
    }

    // Newton matrix M = I - h*kD*J, factored.
    bool factor_newton(double h) {
        newton_.lower = jac_.lower;
        newton_.diag = jac_.diag;
        newton_.upper = jac_.upper;
        const double s = -h * kD;
        for (double& v : newton_.lower) v *= s;
        for (double& v : newton_.diag) v *= s;
        for (double& v : newton_.upper) v *= s;
        for (std::size_t c = 0; c < nc_; ++c) {
            double* d = newton_.diag_block(c);
            for (std::size_t r = 0; r < nb_; ++r) d[r * nb_ + r] += 1.0;
        }
        return newton_.factor();
    }

    // Solve one implicit stage y = psi + h*kD*f(t_stage, y), starting from y_guess.
    // Core variables only; quadrature entries of the result are set afterwards.
    bool newton_solve(double t_stage, double h, const std::vector<double>& psi,
                      std::vector<double>& y_out, std::vector<double>& f_out) {
        for (int it = 0; it < opt_.max_newton; ++it) {
            if (!sys_.rhs(t_stage, y_out.data(), f_out.data())) return false;
            double norm = 0.0;
            for (std::size_t i = 0; i < ncore_; ++i)
                delta_[i] = -(y_out[i] - psi[i] - h * kD * f_out[i]);
            newton_.solve(delta_.data());
            for (std::size_t i = 0; i < ncore_; ++i) {
                const double w = weight(i, y_[i]);
                norm += (delta_[i] / w) * (delta_[i] / w);
                y_out[i] += delta_[i];
            }
            norm = std::sqrt(norm / static_cast<double>(ncore_));
            if (!std::isfinite(norm)) return false;
            if (norm < 0.05) {
                if (!sys_.rhs(t_stage, y_out.data(), f_out.data())) return false;
                return true;
            }
        }
        return false;
    }

    void quad_stage_tr(double h, const std::vector<double>& f_at_yg) {
        for (std::size_t i = ncore_; i < n_; ++i)
            yg_[i] = y_[i] + h * kD * (f0_[i] + f_at_yg[i]);
    }

    void quad_stage_bdf(double h, const std::vector<double>& f_at_y1) {
        for (std::size_t i = ncore_; i < n_; ++i)
            y1_[i] = kA31 * y_[i] + kA32 * yg_[i] + h * kD * f_at_y1[i];
    }

    void step_to(double t_end) {
        ensure_f0();
        bool jac_fresh = false;
        for (;;) {
            double h = std::min(h_, t_end - t_);
            h = std::min(h, opt_.h_max);
            if (h < opt_.h_min)
                throw Error(ErrorKind::Integration,
                            "integrator: step underflow at t=" + std::to_string(t_) + " (" + sys_.last_error() + ")");

            if (!have_jac_) { form_jacobian(); jac_fresh = true; }
            if (!factor_newton(h)) {
                if (!jac_fresh) { have_jac_ = false; continue; }
                h_ = 0.5 * h;
                continue;
            }

            // TR stage: y_g = y + h*kD*(f0 + f(y_g))
            for (std::size_t i = 0; i < n_; ++i) psi_[i] = y_[i] + h * kD * f0_[i];
            yg_ = y_;
            bool ok = newton_solve(t_ + kGamma * h, h, psi_, yg_, fg_) && sys_.state_ok(yg_.data());

            // BDF2 stage: y1 = a31*y + a32*yg + h*kD*f(y1)
            if (ok) {
                quad_stage_tr(h, fg_);
                for (std::size_t i = 0; i < n_; ++i) psi_[i] = kA31 * y_[i] + kA32 * yg_[i];
                y1_ = yg_;
                ok = newton_solve(t_ + h, h, psi_, y1_, f1_) && sys_.state_ok(y1_.data());
                if (ok) quad_stage_bdf(h, f1_);
            }

            if (!ok) {
                if (!jac_fresh) { have_jac_ = false; continue; }
                h_ = 0.5 * h;
                jac_fresh = false; // force refresh after the state moves
                continue;
            }

            // embedded error estimate, filtered through the Newton matrix
            for (std::size_t i = 0; i < n_; ++i)
                est_[i] = h * (kE1 * f0_[i] + kE2 * fg_[i] + kE3 * f1_[i]);
            newton_.solve(est_.data()); // core part
            double err = 0.0;
            for (std::size_t i = 0; i < n_; ++i) {
                const double w = weight(i, std::max(std::abs(y_[i]), std::abs(y1_[i])));
                err += (est_[i] / w) * (est_[i] / w);
            }
            err = std::sqrt(err / static_cast<double>(n_));

            if (!std::isfinite(err) || err > 1.0) {
                const double fac = std::isfinite(err) ? std::max(0.1, 0.9 * std::pow(err, -1.0 / 3.0)) : 0.1;
                h_ = h * fac;
                jac_fresh = false;
                have_jac_ = false; // Jacobian may be stale after repeated rejections
                continue;
            }

            // accept
            t_ += h;
            y_ = y1_;
            f0_ = f1_; // stiffly accurate: rhs at the new state
            have_f0_ = true;
            have_jac_ = false; // refresh lazily next step
            ++n_steps_;
            const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -1.0 / 3.0), 0.2, 5.0);
            h_ = std::min(h * fac, opt_.h_max);
            return;
        }
    }

    System& sys_;
    TrBdf2Options opt_;
    std::size_t n_ = 0, nb_ = 0, nc_ = 0, ncore_ = 0;
    double t_ = 0.0;
    double h_ = 1e-2;
    bool have_f0_ = false;
    bool have_jac_ = false;
    std::size_t n_steps_ = 0;
    std::vector<double> y_, f0_, fg_, f1_, yg_, y1_, psi_, delta_, est_, ytmp_, ftmp_;
    BlockTridiag jac_, newton_;
};

} // namespace ubd
