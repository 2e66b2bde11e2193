#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace ixt {

/// Every failure raised by the library. `origin` names the module that
/// detected the problem, `code` is a stable machine-readable kind
/// (e.g. "DuplicateTable"), and `line` is set for text inputs.
class Error : public std::runtime_error
{
public:
    Error(std::string origin, std::string code, const std::string &message,
          std::optional<int> line = std::nullopt);

    const std::string & origin() const noexcept { return origin_; }
    const std::string & code() const noexcept { return code_; }
    std::optional<int> line() const noexcept { return line_; }
    const std::string & detail() const noexcept { return detail_; }

private:
    std::string origin_;
    std::string code_;
    std::string detail_;
    std::optional<int> line_;
};

}
