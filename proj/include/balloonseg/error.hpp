#pragma once

#include <stdexcept>
#include <string>

namespace balloonseg {

/// Base class for every domain error raised by the library. The CLI maps these
/// to exit code 1.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable/unwritable files and malformed on-disk formats.
class IoError : public Error
{
public:
    using Error::Error;
};

/// A value violates a documented precondition or type invariant.
class ValidationError : public Error
{
public:
    using Error::Error;
};

/// Contour cannot serve as an initialization (too few points, zero area,
/// self-intersecting, no interior pixels).
class ContourError : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

/// The intensity at the seed center is outside the initialized range, so no
/// seed mesh can sit inside the object.
class SeedOutsideRangeError : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

/// The mesh is not a closed, consistently oriented surface.
class MeshError : public Error
{
public:
    using Error::Error;
};

} // namespace balloonseg
