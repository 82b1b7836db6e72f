#include "vstemma/distance_matrix.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "vstemma/error.hpp"

namespace vstemma {

DistanceMatrix::DistanceMatrix(std::vector<std::string> l) : labels(std::move(l)), values(labels.size() * labels.size(), 0.0) {}

void DistanceMatrix::set(std::size_t i, std::size_t j, double d) {
    (*this)(i, j) = d;
    (*this)(j, i) = d;
}

void DistanceMatrix::validate(double tol) const {
    const std::size_t n = labels.size();
    if (values.size() != n * n) throw InputError("distance matrix has " + std::to_string(values.size()) + " values for " + std::to_string(n) + " labels");
    std::set<std::string> unique(labels.begin(), labels.end());
    if (unique.size() != n) throw InputError("distance matrix labels are not unique");
    for (std::size_t i = 0; i < n; ++i) {
        if ((*this)(i, i) != 0.0) throw InputError("distance matrix diagonal is nonzero at " + labels[i]);
        for (std::size_t j = 0; j < n; ++j) {
            const double d = (*this)(i, j);
            if (!std::isfinite(d)) throw InputError("distance matrix has a non-finite entry at " + labels[i] + "," + labels[j]);
            if (d < 0.0) throw InputError("distance matrix has a negative entry at " + labels[i] + "," + labels[j]);
            if (std::abs(d - (*this)(j, i)) > tol) throw InputError("distance matrix is not symmetric at " + labels[i] + "," + labels[j]);
        }
    }
}

std::vector<double> DistanceMatrix::upper_triangle() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < size(); ++i) {
        for (std::size_t j = i + 1; j < size(); ++j) out.push_back((*this)(i, j));
    }
    return out;
}

std::size_t DistanceMatrix::index_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) return i;
    }
    throw InputError("unknown label '" + label + "' in distance matrix");
}

void write_distance_csv(std::ostream& out, const DistanceMatrix& m) {
    for (const auto& l : m.labels) out << ',' << l;
    out << '\n';
    char buf[40];
    for (std::size_t i = 0; i < m.size(); ++i) {
        out << m.labels[i];
        for (std::size_t j = 0; j < m.size(); ++j) {
            std::snprintf(buf, sizeof buf, ",%.17g", m(i, j));
            out << buf;
        }
        out << '\n';
    }
}

void write_distance_csv(const std::filesystem::path& path, const DistanceMatrix& m) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    write_distance_csv(out, m);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    for (auto& c : cells) {
        while (!c.empty() && (c.back() == '\r' || c.back() == ' ')) c.pop_back();
        while (!c.empty() && c.front() == ' ') c.erase(c.begin());
    }
    return cells;
}

}  // namespace

DistanceMatrix read_distance_csv(std::istream& in, const std::string& source_name) {
    std::string line;
    if (!std::getline(in, line)) throw InputError(source_name + ": empty distance file");
    auto header = split_csv_line(line);
    if (header.size() < 2) throw InputError(source_name + ": header must list at least one label");
    DistanceMatrix m(std::vector<std::string>(header.begin() + 1, header.end()));
    const std::size_t n = m.size();
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (row >= n) throw InputError(source_name + ": more rows than labels");
        if (cells.size() != n + 1) throw InputError(source_name + ": row " + std::to_string(row + 1) + " has " + std::to_string(cells.size()) + " cells, expected " + std::to_string(n + 1));
        if (cells[0] != m.labels[row]) throw InputError(source_name + ": row label '" + cells[0] + "' does not match column label '" + m.labels[row] + "'");
        for (std::size_t j = 0; j < n; ++j) {
            char* end = nullptr;
            const double v = std::strtod(cells[j + 1].c_str(), &end);
            if (cells[j + 1].empty() || *end != '\0') throw InputError(source_name + ": cannot parse '" + cells[j + 1] + "'");
            m(row, j) = v;
        }
        ++row;
    }
    if (row != n) throw InputError(source_name + ": expected " + std::to_string(n) + " rows, found " + std::to_string(row));
    m.validate();
    return m;
}

DistanceMatrix read_distance_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open distance file: " + path.string());
    return read_distance_csv(in, path.string());
}

}  // namespace vstemma
