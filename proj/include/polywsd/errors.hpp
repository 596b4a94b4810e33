#pragma once

#include <stdexcept>
#include <string>

namespace polywsd {

// Base for every error raised by the library. Subclasses name the failing
// contract so callers (and the CLI) can report something useful.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ContractError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class OracleError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class BatchError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class InventoryError : public Error {
 public:
  using Error::Error;
};

class ScoringError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class IncompatibleVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class IntegrityError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace polywsd
