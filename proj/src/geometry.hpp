// d-dimensional kernel: vectors, lines, cylinders, ℓ∞ boxes, Euclidean balls.
#pragma once

#include <array>
#include <cmath>
#include <initializer_list>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "common.hpp"

namespace cylperc {

constexpr int kMaxDim = 8;
constexpr double kDistTol = 1e-9;
constexpr double kUnitTol = 1e-12;

struct Vec {
    int d = 0;
    std::array<double, kMaxDim> c{};

    Vec() = default;
    explicit Vec(int dim) : d(dim) { require(dim >= 1 && dim <= kMaxDim, "dimension out of range"); }
    Vec(std::initializer_list<double> xs) : d(int(xs.size())) {
        require(d <= kMaxDim, "dimension out of range");
        int i = 0;
        for (double x : xs) c[i++] = x;
    }
    static Vec unit(int d, int i) {
        Vec v(d);
        v.c[i] = 1.0;
        return v;
    }
    double& operator[](int i) { return c[i]; }
    double operator[](int i) const { return c[i]; }
    bool operator==(const Vec& o) const {
        if (d != o.d) return false;
        for (int i = 0; i < d; ++i)
            if (c[i] != o.c[i]) return false;
        return true;
    }
};

inline Vec operator+(Vec a, const Vec& b) {
    for (int i = 0; i < a.d; ++i) a.c[i] += b.c[i];
    return a;
}
inline Vec operator-(Vec a, const Vec& b) {
    for (int i = 0; i < a.d; ++i) a.c[i] -= b.c[i];
    return a;
}
inline Vec operator-(Vec a) {
    for (int i = 0; i < a.d; ++i) a.c[i] = -a.c[i];
    return a;
}
inline Vec operator*(double s, Vec a) {
    for (int i = 0; i < a.d; ++i) a.c[i] *= s;
    return a;
}
inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (int i = 0; i < a.d; ++i) s += a.c[i] * b.c[i];
    return s;
}
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }
inline double dist(const Vec& a, const Vec& b) { return norm(a - b); }
inline Vec normalized(const Vec& a) { return (1.0 / norm(a)) * a; }

std::string to_string(const Vec& v);

struct Line {
    Vec anchor; // foot of the perpendicular from the origin
    Vec dir;    // unit, first nonzero coordinate positive
    bool canon = false; // set by canonical()
};

// canonical line through `point` with direction `dir` (any nonzero length)
Line make_line(const Vec& point, const Vec& dir);
Line canonical(const Line& l);
bool same_line(const Line& a, const Line& b, double tol = kDistTol);
inline Vec point_at(const Line& l, double t) { return l.anchor + t * l.dir; }

struct HyperplaneParam {
    Vec p; // p[d−1] == h
    Vec w; // w[d−1] > 0
};

struct Cylinder {
    Line axis;
    double radius;
};

struct BoxInf {
    Vec center;
    double radius; // half side
};

struct Ball {
    Vec center;
    double radius;
};

using ConvexSet = std::variant<BoxInf, Ball>;

double dist_point_line(const Vec& x, const Line& l);
double dist_point_box(const Vec& x, const BoxInf& b);
double dist_set_line(const BoxInf& b, const Line& l);
double dist_set_line(const Ball& b, const Line& l);
double dist_set_line(const ConvexSet& s, const Line& l);
// largest distance from `x` to a point of the set
double farthest_distance(const ConvexSet& s, const Vec& x);
bool cylinder_hits_box(const Cylinder& c, const BoxInf& b);
double dist_segment_line(const Vec& x, const Vec& y, const Line& l);
bool segment_hits_cylinder(const Vec& x, const Vec& y, const Cylinder& c);

HyperplaneParam to_hyperplane_param(const Line& l, double h);
Line from_hyperplane_param(const HyperplaneParam& hp);

Eigen::MatrixXd rotation_to(const Vec& v);
Vec apply(const Eigen::MatrixXd& m, const Vec& v);

} // namespace cylperc
