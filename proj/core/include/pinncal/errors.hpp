#pragma once

#include <stdexcept>

namespace pinncal {

/// Invalid configuration: bad sizes, empty point sets, missing values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Material parameters outside their admissible range.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed input files or solver breakdowns on user data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pinncal
