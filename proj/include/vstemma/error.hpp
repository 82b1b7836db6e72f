#pragma once

#include <stdexcept>
#include <string>

namespace vstemma {

// Bad or missing input: malformed files, violated preconditions, unknown ids.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical stage could not produce a result (degenerate data, non-finite values).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vstemma
