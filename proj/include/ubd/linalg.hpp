#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ubd/error.hpp"

namespace ubd {

// Dense LU with partial pivoting for the small (nb x nb) blocks of the
// block-tridiagonal systems below. Matrices are row-major flat arrays.
struct SmallLu {
    std::size_t n = 0;
    std::vector<double> lu;
    std::vector<std::size_t> piv;

    bool factor(const double* a, std::size_t nn) {
        n = nn;
        lu.assign(a, a + n * n);
        piv.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t pr = k;
            double pmax = std::abs(lu[k * n + k]);
            for (std::size_t r = k + 1; r < n; ++r) {
                const double v = std::abs(lu[r * n + k]);
                if (v > pmax) { pmax = v; pr = r; }
            }
            if (pmax == 0.0 || !std::isfinite(pmax)) return false;
            piv[k] = pr;
            if (pr != k)
                for (std::size_t c = 0; c < n; ++c) std::swap(lu[k * n + c], lu[pr * n + c]);
            const double d = lu[k * n + k];
            for (std::size_t r = k + 1; r < n; ++r) {
                const double m = lu[r * n + k] / d;
                lu[r * n + k] = m;
                for (std::size_t c = k + 1; c < n; ++c) lu[r * n + c] -= m * lu[k * n + c];
            }
        }
        return true;
    }

    void solve(double* b) const {
        for (std::size_t k = 0; k < n; ++k) {
            if (piv[k] != k) std::swap(b[k], b[piv[k]]);
            for (std::size_t r = k + 1; r < n; ++r) b[r] -= lu[r * n + k] * b[k];
        }
        for (std::size_t k = n; k-- > 0;) {
            for (std::size_t c = k + 1; c < n; ++c) b[k] -= lu[k * n + c] * b[c];
            b[k] /= lu[k * n + k];
        }
    }

    // B := inv(A) * B for an nb x nb block (row-major), column by column.
    void solve_block(double* b_block) const {
        std::vector<double> col(n);
        for (std::size_t c = 0; c < n; ++c) {
            for (std::size_t r = 0; r < n; ++r) col[r] = b_block[r * n + c];
            solve(col.data());
            for (std::size_t r = 0; r < n; ++r) b_block[r * n + c] = col[r];
        }
    }
};

// Block-tridiagonal LU (block Thomas). Blocks are nb x nb row-major;
// lower[0] and upper[nc-1] are ignored. factor() is destructive: the upper
// blocks are overwritten with inv(D'_c) U_c, so refill all blocks before
// refactoring.
class BlockTridiag {
public:
    void resize(std::size_t n_blocks, std::size_t block) {
        nc_ = n_blocks;
        nb_ = block;
        const std::size_t bs = nb_ * nb_;
        lower.assign(nc_ * bs, 0.0);
        diag.assign(nc_ * bs, 0.0);
        upper.assign(nc_ * bs, 0.0);
    }

    std::size_t n_blocks() const { return nc_; }
    std::size_t block() const { return nb_; }

    double* lower_block(std::size_t c) { return lower.data() + c * nb_ * nb_; }
    double* diag_block(std::size_t c) { return diag.data() + c * nb_ * nb_; }
    double* upper_block(std::size_t c) { return upper.data() + c * nb_ * nb_; }

    bool factor() {
        const std::size_t bs = nb_ * nb_;
        lus_.resize(nc_);
        if (!lus_[0].factor(diag.data(), nb_)) return false;
        for (std::size_t c = 1; c < nc_; ++c) {
            double* x_prev = upper.data() + (c - 1) * bs;
            lus_[c - 1].solve_block(x_prev); // X_{c-1} = inv(D'_{c-1}) U_{c-1}
            const double* l_c = lower.data() + c * bs;
            double* d_c = diag.data() + c * bs;
            for (std::size_t r = 0; r < nb_; ++r)
                for (std::size_t j = 0; j < nb_; ++j) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < nb_; ++k) s += l_c[r * nb_ + k] * x_prev[k * nb_ + j];
                    d_c[r * nb_ + j] -= s;
                }
            if (!lus_[c].factor(d_c, nb_)) return false;
        }
        return true;
    }

    // Solve A x = b in place; b has nc*nb entries.
    void solve(double* b) const {
        const std::size_t bs = nb_ * nb_;
        std::vector<double> tmp(nb_);
        for (std::size_t c = 0; c < nc_; ++c) {
            if (c > 0) {
                for (std::size_t r = 0; r < nb_; ++r) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < nb_; ++k)
                        s += lower[c * bs + r * nb_ + k] * b[(c - 1) * nb_ + k];
                    b[c * nb_ + r] -= s;
                }
            }
            for (std::size_t r = 0; r < nb_; ++r) tmp[r] = b[c * nb_ + r];
            lus_[c].solve(tmp.data());
            for (std::size_t r = 0; r < nb_; ++r) b[c * nb_ + r] = tmp[r];
        }
        for (std::size_t c = nc_ - 1; c-- > 0;) {
            const double* x_c = upper.data() + c * bs;
            for (std::size_t r = 0; r < nb_; ++r) {
                double s = 0.0;
                for (std::size_t k = 0; k < nb_; ++k) s += x_c[r * nb_ + k] * b[(c + 1) * nb_ + k];
                b[c * nb_ + r] -= s;
            }
        }
    }

    std::vector<double> lower, diag, upper;

private:
    std::size_t nc_ = 0, nb_ = 0;
    std::vector<SmallLu> lus_;
};

} // namespace ubd
