#pragma once

#include <stdexcept>
#include <string>

namespace ymimo {

// Base for every error raised by the library. Callers that only care about
// "something went wrong" can catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  RankDeficient(const std::string& what, double inverse_condition)
      : Error(what), inverse_condition_(inverse_condition) {}

  // sigma_min / sigma_max of the rejected matrix.
  double inverse_condition() const noexcept { return inverse_condition_; }

 private:
  double inverse_condition_;
};

class GenerationFailed : public Error {
 public:
  using Error::Error;
};

class NonIntegral : public Error {
 public:
  using Error::Error;
};

class ModeUnavailable : public Error {
 public:
  using Error::Error;
};

class ScalarUnderflow : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class Underdetermined : public Error {
 public:
  using Error::Error;
};

}  // namespace ymimo
