#pragma once

#include <stdexcept>
#include <string>

namespace dss {

// Hard failure in a structured text input (trace, ledger log, CSV, config).
// line_no is 1-based; 0 means the failure is not tied to a single line.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line_no, const std::string& message)
        : std::runtime_error(line_no == 0
                                 ? message
                                 : "line " + std::to_string(line_no) + ": " + message),
          line_no_(line_no) {}

    std::size_t line_no() const noexcept { return line_no_; }

private:
    std::size_t line_no_;
};

}  // namespace dss
