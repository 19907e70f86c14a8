#pragma once

#include <stdexcept>
#include <string>

namespace adtk {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable/unwritable files and transport failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// Input that is readable but malformed (bad JSON, missing fields, bad WAV header).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Precondition violations on arguments.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace adtk
