#include "render.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

namespace cylperc {

namespace {

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// covered flags row by row, −1 outside the disc
std::vector<std::vector<int>> raster(const ProcessSample& s, const SliceSpec& spec) {
    require(s.d >= 3, "slices need d >= 3");
    require(spec.pixels >= 1 && spec.R > 0, "bad slice geometry");
    require(std::fabs(spec.z) <= spec.R, "slice height outside the ball");
    check_coverage(make_view(s, spec.u, spec.rho), Ball{Vec(s.d), spec.R});
    std::vector<Line> lines;
    const double disc = std::sqrt(spec.R * spec.R - spec.z * spec.z);
    for (const auto& l : s.lines) {
        if (l.level > spec.u) continue;
        Vec c(s.d);
        c[2] = spec.z;
        if (dist_set_line(Ball{c, disc}, l.line) <= spec.rho) lines.push_back(l.line);
    }
    const int n = spec.pixels;
    const double h = 2 * spec.R / n;
    std::vector<std::vector<int>> img(n, std::vector<int>(n, -1));
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            Vec p(s.d);
            p[0] = -spec.R + (c + 0.5) * h;
            p[1] = spec.R - (r + 0.5) * h;
            p[2] = spec.z;
            if (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] > spec.R * spec.R) continue;
            int cov = 0;
            for (const auto& l : lines)
                if (dist_point_line(p, l) <= spec.rho) {
                    cov = 1;
                    break;
                }
            img[r][c] = cov;
        }
    return img;
}

} // namespace

SliceStats slice_stats(const ProcessSample& s, const SliceSpec& spec) {
    SliceStats st;
    for (const auto& row : raster(s, spec))
        for (int v : row) {
            if (v < 0) continue;
            ++st.inside;
            st.covered += std::size_t(v);
        }
    return st;
}

std::string render_svg_slice(const ProcessSample& s, const SliceSpec& spec) {
    auto img = raster(s, spec);
    const int n = spec.pixels;
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(n) +
                      "\" height=\"" + std::to_string(n) + "\" viewBox=\"0 0 " + std::to_string(n) +
                      " " + std::to_string(n) + "\" shape-rendering=\"crispEdges\">\n";
    out += "<title>slice z=" + fmt("%g", spec.z) + " u=" + fmt("%g", spec.u) + " rho=" +
           fmt("%g", spec.rho) + " R=" + fmt("%g", spec.R) + "</title>\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    const char* colour[2] = {"#e8eef7", "#1f3b6e"};
    for (int r = 0; r < n; ++r) {
        int c = 0;
        while (c < n) {
            int v = img[r][c], e = c;
            while (e < n && img[r][e] == v) ++e;
            if (v >= 0)
                out += "<rect x=\"" + std::to_string(c) + "\" y=\"" + std::to_string(r) + "\" width=\"" +
                       std::to_string(e - c) + "\" height=\"1\" fill=\"" + colour[v] + "\"/>\n";
            c = e;
        }
    }
    out += "<circle cx=\"" + fmt("%g", n / 2.0) + "\" cy=\"" + fmt("%g", n / 2.0) + "\" r=\"" +
           fmt("%g", n / 2.0 * std::sqrt(1 - spec.z * spec.z / (spec.R * spec.R))) +
           "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n</svg>\n";
    return out;
}

std::string render_obj(const ProcessSample& s, double u, double rho, double R, int sides) {
    require(s.d == 3, "meshes are three-dimensional");
    require(sides >= 3, "tubes need at least three sides");
    check_coverage(make_view(s, u, rho), Ball{Vec(3), R});
    std::string out = "# cylinder tubes, u=" + fmt("%g", u) + " rho=" + fmt("%g", rho) + " R=" + fmt("%g", R) + "\n";
    long base = 1;
    int tube = 0;
    for (const auto& l : s.lines) {
        if (l.level > u) continue;
        const Vec& a = l.line.anchor;
        const Vec& w = l.line.dir;
        // chord of the axis inside the ball
        double b = dot(a, w), c = norm2(a) - R * R, disc = b * b - c;
        if (disc <= 0) continue;
        double t0 = -b - std::sqrt(disc), t1 = -b + std::sqrt(disc);
        Vec p = std::fabs(w[0]) < 0.9 ? Vec{1, 0, 0} : Vec{0, 1, 0};
        Vec e1 = normalized(p - dot(p, w) * w);
        Vec e2{w[1] * e1[2] - w[2] * e1[1], w[2] * e1[0] - w[0] * e1[2], w[0] * e1[1] - w[1] * e1[0]};
        out += "o tube" + std::to_string(tube++) + "\n";
        for (double t : {t0, t1})
            for (int k = 0; k < sides; ++k) {
                double ang = 2 * std::numbers::pi * k / sides;
                Vec q = a + t * w + rho * std::cos(ang) * e1 + rho * std::sin(ang) * e2;
                out += "v " + fmt("%.6f", q[0]) + " " + fmt("%.6f", q[1]) + " " + fmt("%.6f", q[2]) + "\n";
            }
        for (int k = 0; k < sides; ++k) {
            long i = base + k, j = base + (k + 1) % sides;
            out += "f " + std::to_string(i) + " " + std::to_string(j) + " " + std::to_string(j + sides) +
                   " " + std::to_string(i + sides) + "\n";
        }
        base += 2 * sides;
    }
    return out;
}

} // namespace cylperc
