// Integer lattice vectors and sparse edge flows on ℤ^d.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "geometry.hpp"

namespace cylperc {

struct IVec {
    int d = 0;
    std::array<std::int64_t, kMaxDim> c{};

    IVec() = default;
    explicit IVec(int dim) : d(dim) {}
    IVec(std::initializer_list<std::int64_t> xs) : d(int(xs.size())) {
        int i = 0;
        for (auto x : xs) c[i++] = x;
    }
    static IVec unit(int d, int i, std::int64_t s = 1) {
        IVec v(d);
        v.c[i] = s;
        return v;
    }
    std::int64_t& operator[](int i) { return c[i]; }
    std::int64_t operator[](int i) const { return c[i]; }
    bool operator==(const IVec& o) const {
        if (d != o.d) return false;
        for (int i = 0; i < d; ++i)
            if (c[i] != o.c[i]) return false;
        return true;
    }
    bool operator<(const IVec& o) const {
        for (int i = 0; i < d; ++i)
            if (c[i] != o.c[i]) return c[i] < o.c[i];
        return false;
    }
    template <class H>
    friend H AbslHashValue(H h, const IVec& v) {
        for (int i = 0; i < v.d; ++i) h = H::combine(std::move(h), v.c[i]);
        return H::combine(std::move(h), v.d);
    }
};

inline IVec operator+(IVec a, const IVec& b) {
    for (int i = 0; i < a.d; ++i) a.c[i] += b.c[i];
    return a;
}
inline IVec operator-(IVec a, const IVec& b) {
    for (int i = 0; i < a.d; ++i) a.c[i] -= b.c[i];
    return a;
}
inline IVec operator-(IVec a) {
    for (int i = 0; i < a.d; ++i) a.c[i] = -a.c[i];
    return a;
}
inline IVec operator*(std::int64_t s, IVec a) {
    for (int i = 0; i < a.d; ++i) a.c[i] *= s;
    return a;
}
inline std::int64_t idot(const IVec& a, const IVec& b) {
    std::int64_t s = 0;
    for (int i = 0; i < a.d; ++i) s += a.c[i] * b.c[i];
    return s;
}
inline std::int64_t linf(const IVec& a) {
    std::int64_t m = 0;
    for (int i = 0; i < a.d; ++i) m = std::max(m, a.c[i] < 0 ? -a.c[i] : a.c[i]);
    return m;
}
inline Vec to_vec(const IVec& a) {
    Vec v(a.d);
    for (int i = 0; i < a.d; ++i) v[i] = double(a.c[i]);
    return v;
}
std::string to_string(const IVec& v);

// a signed unit direction ±e_axis
struct Dir {
    int axis = 0;
    int sign = 1;
    bool operator==(const Dir& o) const { return axis == o.axis && sign == o.sign; }
    bool operator<(const Dir& o) const { return axis != o.axis ? axis < o.axis : sign < o.sign; }
    Dir operator-() const { return {axis, -sign}; }
    IVec vec(int d, std::int64_t len = 1) const { return IVec::unit(d, axis, sign * len); }
};
std::vector<Dir> all_dirs(int d);
std::string to_string(const Dir& v);

// vertex key: d signed fields packed into one word
class Packer {
public:
    explicit Packer(int d);
    std::uint64_t key(const IVec& x) const;
    IVec unkey(std::uint64_t k) const;
    bool fits(const IVec& x) const;
    int d() const { return d_; }

private:
    int d_, bits_;
    std::int64_t bias_;
};

// θ(x → x+e_a) stored once per undirected edge; θ(y → x) = −θ(x → y)
class LatticeFlow {
public:
    explicit LatticeFlow(int d);

    int dim() const { return d_; }
    void add(const IVec& x, const IVec& y, double v); // y a lattice neighbour of x
    void add_path(const std::vector<IVec>& path, double w);
    void merge(const LatticeFlow& o, double scale = 1.0);
    double value(const IVec& x, const IVec& y) const;
    std::size_t edges() const { return map_.size(); }
    double energy() const;
    double max_abs() const;
    absl::flat_hash_map<IVec, double> divergence() const;
    // f(x, axis, θ(x → x+e_axis))
    void for_each(const std::function<void(const IVec&, int, double)>& f) const;
    // entries sorted by (x, axis), for deterministic export
    std::vector<std::pair<std::pair<IVec, int>, double>> sorted() const;
    void clear() { map_.clear(); }

private:
    int d_;
    Packer pk_;
    absl::flat_hash_map<std::uint64_t, double> map_; // key·8 + axis
};

} // namespace cylperc
