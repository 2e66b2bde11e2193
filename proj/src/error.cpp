#include <ixt/error.hpp>

namespace ixt {

namespace {

std::string render(const std::string &origin, const std::string &code, const std::string &message,
                   std::optional<int> line)
{
    std::string out = origin + ": " + code;
    if (line)
        out += " (line " + std::to_string(*line) + ")";
    if (!message.empty())
        out += ": " + message;
    return out;
}

}

Error::Error(std::string origin, std::string code, const std::string &message, std::optional<int> line)
    : std::runtime_error(render(origin, code, message, line))
    , origin_(std::move(origin))
    , code_(std::move(code))
    , detail_(message)
    , line_(line)
{ }

}
