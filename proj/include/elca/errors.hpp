#pragma once

#include <stdexcept>
#include <string>

namespace elca {

// Error categories map one-to-one onto CLI exit codes (see tools/).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

class SpecError : public std::runtime_error {
public:
    explicit SpecError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated call contract (caller bug, not data): e.g. asking for a Wald
// interval from a fit that did not converge.
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace elca
