#pragma once

// Error taxonomy shared by the CLI: ParseError covers malformed inputs
// (files, config keys, names on the command line) and maps to exit code 2;
// every other exception escaping an estimator maps to exit code 3.

#include <stdexcept>
#include <string>

namespace nnfe {

class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nnfe
