#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "types.hpp"

namespace specrec {

// sRGB companding. The decode branch constant (0.04045, strict <) and the
// encode branch constant (0.0031308, <=) are kept exactly as in the reference
// listings even though they are not exact inverses of each other.

inline double decode_channel(int c) {
    if (c < 0 || c > 255) throw std::invalid_argument("sRGB component outside [0,255]");
    double v = c / 255.0;
    return v < 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

inline LinearRgb decode_gamma(const SrgbTriplet& s) {
    return {decode_channel(s.r), decode_channel(s.g), decode_channel(s.b)};
}

// Compand a linear channel to the 0-1 encoded range. Total on the reals:
// negative inputs take the linear branch, keeping the map strictly monotone,
// so "companded value in [0,1]" is an exact gamut test.
inline double compand_channel(double v) {
    return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

// Linear channel -> 0-255 integer. Out-of-[0,1] values are clamped before
// companding; gamut policing is the harness's job, not the encoder's.
inline int encode_channel(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite linear rgb component");
    return static_cast<int>(std::lround(compand_channel(std::clamp(v, 0.0, 1.0)) * 255.0));
}

inline SrgbTriplet encode_gamma(const LinearRgb& rgb) {
    return {encode_channel(rgb.r), encode_channel(rgb.g), encode_channel(rgb.b)};
}

}  // namespace specrec
