#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace miura {

using Index = int;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/// Gradient-field value at a point: column 0 is G^x, column 1 is G^y.
using Mat32 = Eigen::Matrix<double, 3, 2>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Linear-solve breakdown (singular pivot, factorization failure).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Input data violating a required identity (e.g. boundary-data hypothesis).
class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

#define MIURA_REQUIRE(cond, Type, msg)        \
    do {                                      \
        if (!(cond)) throw Type(msg);         \
    } while (0)

} // namespace miura
