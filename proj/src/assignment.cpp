#include "vstemma/assignment.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "vstemma/error.hpp"

namespace vstemma {

namespace {

void check_square_finite(const Matrix& m, const char* what) {
    const std::size_t n = m.size();
    for (const auto& row : m) {
        if (row.size() != n) throw InputError(std::string(what) + ": matrix must be square");
        for (double v : row) {
            if (!std::isfinite(v)) throw InputError(std::string(what) + ": matrix has a non-finite entry");
        }
    }
}

}  // namespace

Assignment solve_assignment(const Matrix& cost, double tie_tolerance) {
    check_square_finite(cost, "solve_assignment");
    const int n = static_cast<int>(cost.size());
    Assignment result;
    if (n == 0) return result;

    // Shortest augmenting path with row/column potentials; 1-based internally.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> row_of(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (int i = 1; i <= n; ++i) {
        row_of[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), std::numeric_limits<double>::infinity());
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = row_of[j0];
            double delta = std::numeric_limits<double>::infinity();
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (row_of[j0] != 0);
        do {
            const int j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> col_of_row(n), row_of_col(n);
    for (int j = 1; j <= n; ++j) {
        col_of_row[row_of[j] - 1] = j - 1;
        row_of_col[j - 1] = row_of[j] - 1;
    }

    // Every optimal matching uses only zero-reduced-cost ("tight") edges under
    // the optimal potentials. Walk rows in order and move each to its smallest
    // tight column that still admits a perfect tight matching of the rest.
    double scale = 1.0;
    for (const auto& row : cost) {
        for (double c : row) scale = std::max(scale, std::abs(c));
    }
    const double eps = tie_tolerance * scale;
    auto tight = [&](int r, int c) { return std::abs(cost[r][c] - u[r + 1] - v[c + 1]) <= eps; };

    std::vector<char> locked_col(n, 0);
    std::vector<char> visited(n);
    // Alternating path from row `r` (which must give up its column) to column
    // `target`, through unlocked rows/columns and tight edges.
    std::function<bool(int, int)> reroute = [&](int r, int target) -> bool {
        for (int c = 0; c < n; ++c) {
            if (locked_col[c] || visited[c] || !tight(r, c)) continue;
            visited[c] = 1;
            if (c == target) {
                col_of_row[r] = c;
                row_of_col[c] = r;
                return true;
            }
            const int next = row_of_col[c];
            if (reroute(next, target)) {
                col_of_row[r] = c;
                row_of_col[c] = r;
                return true;
            }
        }
        return false;
    };

    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            if (locked_col[c] || !tight(r, c)) continue;
            if (col_of_row[r] == c) break;
            const std::vector<int> saved_col = col_of_row, saved_row = row_of_col;
            const int freed = col_of_row[r];
            const int displaced = row_of_col[c];
            locked_col[c] = 1;
            std::fill(visited.begin(), visited.end(), 0);
            col_of_row[r] = c;
            row_of_col[c] = r;
            if (reroute(displaced, freed)) break;
            col_of_row = saved_col;
            row_of_col = saved_row;
            locked_col[c] = 0;
        }
        locked_col[col_of_row[r]] = 1;
    }

    result.columns = col_of_row;
    for (int r = 0; r < n; ++r) result.total += cost[r][result.columns[r]];
    return result;
}

Assignment hungarian_match(const Matrix& similarity) {
    check_square_finite(similarity, "hungarian_match");
    Matrix cost = similarity;
    for (auto& row : cost) {
        for (double& c : row) c = 1.0 - c;
    }
    Assignment a = solve_assignment(cost);
    a.total = 0.0;
    for (std::size_t r = 0; r < similarity.size(); ++r) a.total += similarity[r][a.columns[r]];
    return a;
}

}  // namespace vstemma
