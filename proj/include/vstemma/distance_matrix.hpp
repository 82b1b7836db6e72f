#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace vstemma {

// Labelled square matrix over witnesses; symmetric, zero diagonal, nonnegative.
struct DistanceMatrix {
    std::vector<std::string> labels;
    std::vector<double> values;

    DistanceMatrix() = default;
    explicit DistanceMatrix(std::vector<std::string> labels);

    std::size_t size() const { return labels.size(); }
    double operator()(std::size_t i, std::size_t j) const { return values[i * labels.size() + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values[i * labels.size() + j]; }

    // Sets both (i, j) and (j, i).
    void set(std::size_t i, std::size_t j, double d);

    // Throws InputError unless symmetric (within tol), zero-diagonal, finite and nonnegative.
    void validate(double tol = 1e-12) const;

    // Upper triangle in row-major order: (0,1), (0,2), ..., (n-2,n-1).
    std::vector<double> upper_triangle() const;

    std::size_t index_of(const std::string& label) const;
};

// CSV with a header row and a label column; values printed with %.17g so a
// matrix read back is bit-identical to the one written.
void write_distance_csv(std::ostream& out, const DistanceMatrix& m);
void write_distance_csv(const std::filesystem::path& path, const DistanceMatrix& m);
DistanceMatrix read_distance_csv(std::istream& in, const std::string& source_name = "<stream>");
DistanceMatrix read_distance_csv(const std::filesystem::path& path);

}  // namespace vstemma
