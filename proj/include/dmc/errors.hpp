// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace dmc {

// Contract violations on inputs. The CLI maps these to exit code 2.
class InvalidParam : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidDim : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ShapeMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class OrderMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NonPositiveInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical failures. The CLI maps these to exit code 4.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotPositiveDefinite : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NoDescentDirection : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularFim : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DivergedLoss : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// File format and filesystem problems. The CLI maps these to exit code 3.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dmc
