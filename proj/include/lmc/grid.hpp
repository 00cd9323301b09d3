#pragma once

#include <cstddef>
#include <vector>

namespace lmc {

//! Dense row-major 2D array. For box grids the row index follows y and the
//! column index follows x.
struct Grid2D
{
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    Grid2D() = default;
    Grid2D(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0)
    {
    }

    double& at(std::size_t row, std::size_t col) { return values[row * cols + col]; }
    double at(std::size_t row, std::size_t col) const
    {
        return values[row * cols + col];
    }

    double sum() const;
};

using DenseMatrix = Grid2D;

}  // namespace lmc
