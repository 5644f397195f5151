#pragma once

#include <stdexcept>
#include <string>

namespace framerank {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input files.
class CorpusError : public Error {
public:
  using Error::Error;
};

// Arguments that violate an operation's preconditions.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

class TrainingError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace framerank
