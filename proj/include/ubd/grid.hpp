#pragma once

#include <cstddef>

#include "ubd/error.hpp"

namespace ubd {

// Uniform 1-D grid over [0, L]. The plant stores cell averages at the
// n_cells cell centers; the reduced-model kernels work on the n_cells + 1
// cell-edge nodes so both boundaries are grid points.
struct Grid {
    std::size_t n_cells = 50;
    double length = 2500.0;

    Grid() = default;
    Grid(std::size_t cells, double L) : n_cells(cells), length(L) {
        if (n_cells < 4) throw Error(ErrorKind::Validation, "grid: need at least 4 cells");
        if (!(length > 0.0)) throw Error(ErrorKind::Validation, "grid: length must be > 0");
    }

    double dx() const { return length / static_cast<double>(n_cells); }
    std::size_t n_nodes() const { return n_cells + 1; }
    double cell_center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dx(); }
    double node(std::size_t j) const { return static_cast<double>(j) * dx(); }
};

} // namespace ubd
