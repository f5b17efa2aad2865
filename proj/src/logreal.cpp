#include "symdyn/logreal.hpp"

#include <sstream>

namespace symdyn {

std::string to_string(const LogReal& x) {
    if (x.sign == 0) return "0";
    std::ostringstream os;
    os.precision(17);
    os << (x.sign < 0 ? "-" : "") << "exp(" << x.lg << ")";
    return os.str();
}

}  // namespace symdyn
