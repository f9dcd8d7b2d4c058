#include "procqm/rational.hpp"

#include <cstdlib>

#include "procqm/errors.hpp"

namespace procqm {

Rational rational_from_string(const std::string& text) {
    const auto slash = text.find('/');
    try {
        if (slash == std::string::npos) {
            return Rational(std::stoll(text));
        }
        return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
    } catch (const std::invalid_argument&) {
        throw MalformedInstanceError("cannot parse rational: " + text);
    } catch (const std::out_of_range&) {
        throw MalformedInstanceError("rational out of range: " + text);
    }
}

}  // namespace procqm
