// Figure-style exports: SVG slices of the occupied set and OBJ tube meshes.
#pragma once

#include <string>

#include "lineproc.hpp"

namespace cylperc {

struct SliceSpec {
    double u = 0.07;
    double rho = 1.0;
    double R = 24;     // slice of the ball B(0,R)
    double z = 0;      // height on the third axis, other extra axes at 0
    int pixels = 240;  // per side
};

// covered pixels dark, vacant ones light, clipped to the disc of the ball
std::string render_svg_slice(const ProcessSample& s, const SliceSpec& spec);

struct SliceStats {
    std::size_t inside = 0, covered = 0;
};
SliceStats slice_stats(const ProcessSample& s, const SliceSpec& spec);

// one polygonal tube per chord of an axis through B(0,R); d = 3 only
std::string render_obj(const ProcessSample& s, double u, double rho, double R, int sides = 12);

} // namespace cylperc
