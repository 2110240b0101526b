#pragma once

#include <stdexcept>
#include <string>

namespace cocoonlab {

/// An iterative numerical method failed to converge or lost its bracket.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cocoonlab
