#pragma once

#include <vector>

namespace vstemma {

using Matrix = std::vector<std::vector<double>>;

struct Assignment {
    // row i is matched to column `columns[i]`
    std::vector<int> columns;
    double total = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix (Kuhn-Munkres with
/// potentials, O(k^3)). Among optimal matchings the lexicographically smallest
/// column sequence is returned; costs within `tie_tolerance` of each other are
/// treated as equal when deciding optimality.
Assignment solve_assignment(const Matrix& cost, double tie_tolerance = 1e-10);

// Maximises total similarity via cost = 1 - similarity. `total` is the summed
// similarity of the chosen pairs.
Assignment hungarian_match(const Matrix& similarity);

}  // namespace vstemma
