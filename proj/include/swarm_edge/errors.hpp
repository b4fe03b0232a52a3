#pragma once

#include <stdexcept>
#include <string>

namespace swarm_edge {

// Invalid configuration, dimension mismatch or violated precondition.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN/Inf produced by an arithmetic step.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (datasets, config files, metrics CSV).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace swarm_edge
