#pragma once

#include <cstdint>

#include "eelstm/autodiff.hpp"
#include "eelstm/cells.hpp"

namespace eelstm::test {

/// grad_check of the mean squared one-step loss of a small random batch.
GradCheckReport cell_grad_check(const CellSpec& spec, std::uint64_t seed, std::size_t steps = 2,
                                double step = 1e-4, double tol = 1e-4);

CellSpec vanilla(std::size_t h, std::size_t d);
CellSpec tensorized(std::size_t h, std::size_t d, TnKind kind, std::size_t L, std::size_t P,
                    std::vector<std::size_t> dims);

}  // namespace eelstm::test
