#pragma once

#include <stdexcept>
#include <string>

namespace povm {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable or syntactically malformed input files.
class ParseError : public Error {
public:
    using Error::Error;
};

// Malformed or semantically invalid inputs (bad dimensions, non-POVMs, ...).
class InputError : public Error {
public:
    using Error::Error;
};

// Numerical breakdown: failed convergence, overflow, corrupted intermediate data.
class NumericError : public Error {
public:
    using Error::Error;
};

// A search hit its node budget before exhausting the space. Never a
// nonexistence claim.
class SearchInconclusive : public Error {
public:
    using Error::Error;
};

class NonHermitianInput : public InputError {
public:
    using InputError::InputError;
};

class DimensionMismatch : public InputError {
public:
    using InputError::InputError;
};

class TooManyOutcomes : public InputError {
public:
    using InputError::InputError;
};

class NonCommuting : public InputError {
public:
    using InputError::InputError;
};

class NotProjection : public InputError {
public:
    using InputError::InputError;
};

class NotScalar : public InputError {
public:
    using InputError::InputError;
};

class NotBoolean : public InputError {
public:
    using InputError::InputError;
};

class ConvergenceFailure : public NumericError {
public:
    using NumericError::NumericError;
};

class NotPositive : public NumericError {
public:
    using NumericError::NumericError;
};

class DecompositionDefect : public NumericError {
public:
    using NumericError::NumericError;
};

class CertificateFailure : public NumericError {
public:
    using NumericError::NumericError;
};

class DenominatorOverflow : public NumericError {
public:
    using NumericError::NumericError;
};

class AlgebraTooLarge : public NumericError {
public:
    using NumericError::NumericError;
};

class AtomCoverFailure : public NumericError {
public:
    using NumericError::NumericError;
};

class SearchBudgetExceeded : public SearchInconclusive {
public:
    using SearchInconclusive::SearchInconclusive;
};

} // namespace povm
