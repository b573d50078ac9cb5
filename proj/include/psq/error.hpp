#pragma once

#include <stdexcept>
#include <string>

namespace psq {

// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad arguments: malformed sizes, mismatched grids, constraint violations.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Two fields or wavefunctions live on different grids.
class GridMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

// A numerical bound was violated (ill-posed deconvolution, tail bound,
// stability limit, resolution limit). The message names the bound.
class NumericalPrecondition : public Error {
public:
    using Error::Error;
};

// A combination the operation does not implement.
class Unsupported : public Error {
public:
    using Error::Error;
};

// File system failures (open, write, read).
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace psq
