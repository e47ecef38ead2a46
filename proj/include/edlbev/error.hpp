#pragma once

#include <stdexcept>
#include <string>

namespace edlbev {

// Error families map onto distinct CLI exit codes (see tools/edlbev.cpp).
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

} // namespace edlbev
