#pragma once

#include <stdexcept>
#include <string>

namespace cubepf {

// Malformed textual input (polynomial or equation-system files). Carries the
// 1-based line number where parsing stopped.
class parse_error : public std::runtime_error {
public:
    parse_error(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

}  // namespace cubepf
