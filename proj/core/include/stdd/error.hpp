#pragma once

#include <stdexcept>
#include <string>

namespace stdd {

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Vector lengths or window sizes that do not line up.
class structural_error : public error {
public:
    using error::error;
};

// A state transition that the sequence invariants forbid.
class illegal_operation : public error {
public:
    using error::error;
};

class config_error : public error {
public:
    using error::error;
};

// A recorded trace ran out before the scheduler terminated.
class replay_underrun : public error {
public:
    using error::error;
};

// A strategy produced a decision that breaks the StepDecision contract.
class contract_violation : public error {
public:
    using error::error;
};

// Malformed input file (trace, spec, config).
class validation_error : public error {
public:
    using error::error;
};

}  // namespace stdd
