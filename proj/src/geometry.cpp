#include "geometry.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <vector>

namespace cylperc {

std::string to_string(const Vec& v) {
    std::string s = "(";
    char buf[32];
    for (int i = 0; i < v.d; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v[i]);
        if (i) s += ",";
        s += buf;
    }
    return s + ")";
}

Line canonical(const Line& l) {
    if (l.canon) return l;
    double n = norm(l.dir);
    if (!(n > kUnitTol)) fail(ErrorCode::DegenerateDirection, "line direction is zero");
    Vec v = (1.0 / n) * l.dir;
    for (int i = 0; i < v.d; ++i) {
        if (v[i] == 0.0) continue;
        if (v[i] < 0.0) v = -v;
        break;
    }
    Vec a = l.anchor - dot(l.anchor, v) * v;
    return {a, v, true};
}

Line make_line(const Vec& point, const Vec& dir) { return canonical(Line{point, dir}); }

bool same_line(const Line& a, const Line& b, double tol) {
    Line x = canonical(a), y = canonical(b);
    for (int i = 0; i < x.anchor.d; ++i) {
        if (std::fabs(x.anchor[i] - y.anchor[i]) > tol) return false;
        if (std::fabs(x.dir[i] - y.dir[i]) > tol) return false;
    }
    return true;
}

double dist_point_line(const Vec& x, const Line& l) {
    Vec r = x - l.anchor;
    Vec perp = r - dot(r, l.dir) * l.dir;
    return norm(perp);
}

double dist_point_box(const Vec& x, const BoxInf& b) {
    double s = 0.0;
    for (int i = 0; i < x.d; ++i) {
        double e = std::fabs(x[i] - b.center[i]) - b.radius;
        if (e > 0) s += e * e;
    }
    return std::sqrt(s);
}

// t ↦ dist(a + t v, box)² is convex and piecewise quadratic with kinks where a
// coordinate crosses a slab face; minimize piece by piece
double dist_set_line(const BoxInf& b, const Line& l) {
    const int d = l.dir.d;
    std::vector<double> kinks;
    kinks.reserve(2 * d);
    for (int i = 0; i < d; ++i) {
        if (l.dir[i] == 0.0) continue;
        kinks.push_back((b.center[i] - b.radius - l.anchor[i]) / l.dir[i]);
        kinks.push_back((b.center[i] + b.radius - l.anchor[i]) / l.dir[i]);
    }
    std::sort(kinks.begin(), kinks.end());
    double best = std::numeric_limits<double>::infinity();
    auto piece = [&](double lo, double hi, double probe) {
        double A = 0, B = 0;
        for (int i = 0; i < d; ++i) {
            double s = l.anchor[i] + probe * l.dir[i] - b.center[i];
            double off;
            if (s > b.radius) off = l.anchor[i] - b.center[i] - b.radius;
            else if (s < -b.radius) off = l.anchor[i] - b.center[i] + b.radius;
            else continue;
            A += l.dir[i] * l.dir[i];
            B += 2.0 * off * l.dir[i];
        }
        double t = A > 0 ? -B / (2.0 * A) : probe;
        t = std::clamp(t, lo, hi);
        best = std::min(best, dist_point_box(point_at(l, t), b));
    };
    if (kinks.empty()) {
        best = dist_point_box(l.anchor, b);
        return best;
    }
    const double big = 1e300;
    piece(-big, kinks.front(), kinks.front() - 1.0);
    for (std::size_t j = 0; j + 1 < kinks.size(); ++j)
        piece(kinks[j], kinks[j + 1], 0.5 * (kinks[j] + kinks[j + 1]));
    piece(kinks.back(), big, kinks.back() + 1.0);
    return best;
}

double dist_set_line(const Ball& b, const Line& l) {
    return std::max(0.0, dist_point_line(b.center, l) - b.radius);
}

double dist_set_line(const ConvexSet& s, const Line& l) {
    return std::visit([&](const auto& x) { return dist_set_line(x, l); }, s);
}

double farthest_distance(const ConvexSet& s, const Vec& x) {
    if (auto* b = std::get_if<Ball>(&s)) return dist(b->center, x) + b->radius;
    const auto& box = std::get<BoxInf>(s);
    double q = 0.0;
    for (int i = 0; i < x.d; ++i) {
        double e = std::fabs(x[i] - box.center[i]) + box.radius;
        q += e * e;
    }
    return std::sqrt(q);
}

bool cylinder_hits_box(const Cylinder& c, const BoxInf& b) {
    return dist_set_line(b, c.axis) <= c.radius;
}

double dist_segment_line(const Vec& x, const Vec& y, const Line& l) {
    // perpendicular part of P(s) − a is w0 + s·w1, minimize over s ∈ [0,1]
    Vec r = x - l.anchor;
    Vec w0 = r - dot(r, l.dir) * l.dir;
    Vec e = y - x;
    Vec w1 = e - dot(e, l.dir) * l.dir;
    double q = norm2(w1);
    double s = q > 0 ? std::clamp(-dot(w0, w1) / q, 0.0, 1.0) : 0.0;
    return norm(w0 + s * w1);
}

bool segment_hits_cylinder(const Vec& x, const Vec& y, const Cylinder& c) {
    if (x == y) fail(ErrorCode::InvalidSegment, "segment endpoints coincide");
    return dist_segment_line(x, y, c.axis) <= c.radius;
}

HyperplaneParam to_hyperplane_param(const Line& l, double h) {
    const int d = l.dir.d;
    double vd = l.dir[d - 1];
    if (std::fabs(vd) < kUnitTol)
        fail(ErrorCode::DegenerateDirection, "line is parallel to the hyperplane");
    Vec w = vd > 0 ? l.dir : -l.dir;
    double t = (h - l.anchor[d - 1]) / w[d - 1];
    Vec p = l.anchor + t * w;
    p[d - 1] = h;
    return {p, w};
}

Line from_hyperplane_param(const HyperplaneParam& hp) { return make_line(hp.p, hp.w); }

Eigen::MatrixXd rotation_to(const Vec& v) {
    const int d = v.d;
    Eigen::MatrixXd R = Eigen::MatrixXd::Identity(d, d);
    Vec u = Vec::unit(d, d - 1) - v;
    double q = norm2(u);
    if (q == 0.0) return R;
    // Householder reflection swapping e_d and v
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) R(i, j) -= 2.0 * u[i] * u[j] / q;
    return R;
}

Vec apply(const Eigen::MatrixXd& m, const Vec& v) {
    Vec r(v.d);
    for (int i = 0; i < v.d; ++i) {
        double s = 0;
        for (int j = 0; j < v.d; ++j) s += m(i, j) * v[j];
        r[i] = s;
    }
    return r;
}

} // namespace cylperc
