#include "balloonseg/geometry.hpp"

#include "balloonseg/error.hpp"

#include <string>

namespace balloonseg {

char axis_name(Axis a)
{
    switch (a) {
    case Axis::x: return 'x';
    case Axis::y: return 'y';
    case Axis::z: return 'z';
    }
    return 'z';
}

Axis parse_axis(char c)
{
    switch (c) {
    case 'x': case 'X': return Axis::x;
    case 'y': case 'Y': return Axis::y;
    case 'z': case 'Z': return Axis::z;
    default: break;
    }
    throw ValidationError(std::string("unknown axis '") + c + "', expected x, y or z");
}

} // namespace balloonseg
