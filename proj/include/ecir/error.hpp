#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ecir {

// Bad call arguments (counts, shapes, orderings).
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Keypoints that cannot support a Lagrange basis (duplicates, wrong order).
class SingularBasisError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

class OutOfRangeError : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

// Well-formed call, but the data cannot be processed (e.g. non-positive intensity).
class InvalidInputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DivergenceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line)
    {
    }

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace ecir
