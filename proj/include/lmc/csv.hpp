#pragma once

#include <string>

#include "lmc/grid.hpp"
#include "lmc/samplers.hpp"

namespace lmc {

//! Shortest representation that round-trips to the same double.
std::string format_double(double value);

//! Header step,x0,...,x{d-1},log_p,accepted; one row per recorded step.
std::string chain_to_csv(const Chain& chain);

//! One line per grid row, comma separated, no header.
std::string grid_to_csv(const Grid2D& grid);

}  // namespace lmc
