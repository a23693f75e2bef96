#pragma once

#include <stdexcept>
#include <string>

namespace t2v {

/// Runtime failure caused by bad input data or an unsatisfiable request.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Failure to open or read a named file.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace t2v
