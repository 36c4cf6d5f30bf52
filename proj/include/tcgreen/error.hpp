#pragma once

#include <stdexcept>
#include <string>

namespace tcgreen {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Validation-type failures: bad input, unsupported request.
class ParameterError : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };
class ShapeError : public Error { public: using Error::Error; };
class DivergenceError : public Error { public: using Error::Error; };
class UnsupportedError : public Error { public: using Error::Error; };

// Numeric failures: the input was fine but a method did not deliver.
class NumericError : public Error { public: using Error::Error; };
class HorizonError : public NumericError { public: using NumericError::NumericError; };
class NormalizationError : public NumericError { public: using NumericError::NumericError; };
class StabilityError : public NumericError { public: using NumericError::NumericError; };

}  // namespace tcgreen
