#pragma once

#include <stdexcept>
#include <string>

namespace reprel {

/// Error raised by any of the text-format loaders (.dfoci, .ops, instance
/// and manifest files). Carries a 1-based source position.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, int line, int column, const std::string& message)
      : std::runtime_error(file + ":" + std::to_string(line) + ":" +
                           std::to_string(column) + ": " + message),
        file_(std::move(file)),
        line_(line),
        column_(column) {}

  const std::string& file() const { return file_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::string file_;
  int line_;
  int column_;
};

}  // namespace reprel
