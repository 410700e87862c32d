#include "carpet.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace cylperc {

namespace {

// neighbours of y in increasing lexicographic order
std::vector<Dir> lex_dirs(int d) {
    std::vector<Dir> out;
    for (int a = 0; a < d; ++a) out.push_back({a, -1});
    for (int a = d - 1; a >= 0; --a) out.push_back({a, 1});
    return out;
}

int dir_index(Dir v) { return 2 * v.axis + (v.sign > 0 ? 0 : 1); }

// all integer vectors in [-h, h]^n, lexicographic
template <class F>
void for_cube(int n, std::int64_t h, F&& f) {
    std::vector<std::int64_t> j(n, -h);
    if (h < 0) return;
    for (;;) {
        f(j);
        int i = n - 1;
        while (i >= 0 && ++j[i] > h) j[i--] = -h;
        if (i < 0) break;
    }
}

} // namespace

Dir dir_between(const IVec& from, const IVec& to) {
    for (int i = 0; i < from.d; ++i)
        if (to[i] != from[i]) return {i, to[i] > from[i] ? 1 : -1};
    fail(ErrorCode::InvalidArgument, "dir_between: equal points");
}

Carpet::Carpet(const ScaleLadder& lad, const World& world) : lad_(lad), world_(world) {
    for (int k = 1; k <= lad_.k_max(); ++k) {
        std::int64_t r = lad_.L[k] / lad_.L[k - 1];
        require(lad_.L[k] % (17 * lad_.L[k - 1]) == 0 && r % 2 == 1,
                "carpet needs L_k = 17·q·L_{k−1} with q odd");
    }
}

double Carpet::small_radius0() const { return std::pow(double(L(0)), 0.7) / 4; }

std::int64_t Carpet::spacing0() const {
    return std::int64_t(std::floor(std::pow(double(L(0)), 0.7)));
}

std::vector<IVec> Carpet::face_grid(const BoxId& m, Dir v) const {
    const int dd = d();
    std::vector<std::int64_t> as;
    std::int64_t step;
    if (m.k == 0) {
        double half = std::pow(double(L(0)), 0.3) / 2;
        for (std::int64_t a = -std::int64_t(half) - 1; a <= std::int64_t(half) + 1; ++a)
            if (std::fabs(double(a)) < half) as.push_back(a);
        step = spacing0();
    } else {
        for (std::int64_t a = -8; a <= 8; a += 2) as.push_back(a);
        step = L(m.k) / 17;
    }
    IVec base = m.x + v.vec(dd, L(m.k));
    std::vector<IVec> out;
    std::vector<std::size_t> idx(dd - 1, 0);
    for (;;) {
        IVec y = base;
        for (int i = 0, t = 0; i < dd; ++i)
            if (i != v.axis) y[i] += as[idx[t++]] * step;
        out.push_back(y);
        int t = dd - 2;
        while (t >= 0 && ++idx[t] == as.size()) idx[t--] = 0;
        if (t < 0) break;
    }
    return out;
}

std::vector<IVec> Carpet::small_face(const BoxId& m, Dir v, const IVec& y) const {
    const int dd = d();
    std::int64_t h, step;
    if (m.k == 0) {
        h = std::int64_t(std::floor(small_radius0()));
        step = 1;
    } else {
        h = (q(m.k) - 1) / 2;
        step = 2 * L(m.k - 1);
    }
    std::vector<IVec> out;
    for_cube(dd - 1, h, [&](const std::vector<std::int64_t>& j) {
        IVec z = y;
        for (int i = 0, t = 0; i < dd; ++i)
            if (i != v.axis) z[i] += j[t++] * step;
        out.push_back(z);
    });
    return out;
}

std::vector<IVec> Carpet::coarse_grid(const BoxId& m) const {
    require(m.k >= 1, "coarse grid needs k >= 1");
    std::vector<IVec> out;
    const std::int64_t s = L(m.k) / 17;
    for_cube(d(), 8, [&](const std::vector<std::int64_t>& a) {
        IVec z = m.x;
        for (int i = 0; i < d(); ++i) z[i] += 2 * a[i] * s;
        out.push_back(z);
    });
    return out;
}

BoxId Carpet::canonical_face(const BoxId& m, Dir v, int& axis) const {
    axis = v.axis;
    if (v.sign > 0) return m;
    return {m.x + v.vec(d(), 2 * L(m.k)), m.k};
}

std::vector<IVec> Carpet::good_centers(const BoxId& m, Dir v) const {
    const int dd = d();
    const IVec nb = m.x + v.vec(dd, 2 * L(m.k));
    auto grid = face_grid(m, v);
    std::vector<IVec> out;
    if (m.k == 0) {
        auto h1 = world_.hole0(m.x), h2 = world_.hole0(nb);
        h1.insert(h1.end(), h2.begin(), h2.end());
        const double r = small_radius0();
        for (const auto& y : grid) {
            bool hit = false;
            for (const auto& h : h1) {
                bool in = true;
                for (int i = 0; i < dd && in; ++i)
                    if (i != v.axis && std::fabs(double(h[i] - y[i])) > r) in = false;
                if (in) {
                    hit = true;
                    break;
                }
            }
            if (!hit) out.push_back(y);
        }
        return out;
    }
    std::vector<Defect> defs;
    for (const auto& c : {m.x, nb})
        if (auto df = world_.defect(c, m.k)) defs.push_back(*df);
    if (defs.empty()) return grid;
    const std::int64_t r = L(m.k) / 17, Lp = L(m.k - 1);
    const std::int64_t hq = (L(m.k) / Lp - 1) / 2;
    for (const auto& y : grid) {
        bool hit = false;
        for (const auto& df : defs) {
            // sub-box columns whose projection meets the small face
            for_cube(dd, hq, [&](const std::vector<std::int64_t>& j) {
                if (hit) return;
                IVec c = df.owner;
                for (int i = 0; i < dd; ++i) c[i] += 2 * Lp * j[i];
                for (int i = 0; i < dd; ++i)
                    if (i != v.axis && std::llabs(c[i] - y[i]) > r + Lp) return;
                if (df.contains(c, lad_)) hit = true;
            });
            if (hit) break;
        }
        if (!hit) out.push_back(y);
    }
    return out;
}

IVec Carpet::anchor(const BoxId& m, Dir v) {
    int axis;
    BoxId f = canonical_face(m, v, axis);
    auto key = std::make_tuple(f.k, f.x, axis);
    auto it = anchors_.find(key);
    if (it != anchors_.end()) return it->second;
    auto g = good_centers(f, {axis, 1});
    if (g.empty())
        fail(ErrorCode::FlowNotFeasible,
             "no good centre on face " + to_string(f.x) + " +e" + std::to_string(axis + 1) +
                 " at scale " + std::to_string(f.k));
    anchors_[key] = g.front();
    return g.front();
}

const std::vector<IVec>& Carpet::fractal(const BoxId& m, Dir v) {
    int axis;
    BoxId f = canonical_face(m, v, axis);
    auto key = std::make_tuple(f.k, f.x, axis);
    auto it = fractals_.find(key);
    if (it != fractals_.end()) return it->second;
    const Dir up{axis, 1};
    IVec y = anchor(f, up);
    std::vector<IVec> pts;
    if (f.k == 0) {
        pts = small_face(f, up, y);
    } else {
        const std::int64_t Lp = L(f.k - 1);
        for (const auto& c : small_face(f, up, y)) {
            const auto& sub = fractal({c - up.vec(d(), Lp), f.k - 1}, up);
            pts.insert(pts.end(), sub.begin(), sub.end());
        }
        std::sort(pts.begin(), pts.end());
    }
    return fractals_[key] = std::move(pts);
}

std::size_t Carpet::fractal_size(int k) const {
    std::size_t side = 2 * std::size_t(std::floor(small_radius0())) + 1;
    std::size_t n = 1;
    for (int i = 0; i < d() - 1; ++i) n *= side;
    for (int j = 1; j <= k; ++j)
        for (int i = 0; i < d() - 1; ++i) n *= std::size_t(q(j));
    return n;
}

std::vector<IVec> Carpet::path0(const BoxId& m, const IVec& from, const IVec& to) const {
    require(m.k == 0, "path0 works at scale 0");
    const int dd = d();
    const std::int64_t L0 = L(0), side = 2 * L0 + 1;
    auto local = [&](const IVec& y, std::size_t& id) {
        id = 0;
        for (int i = 0; i < dd; ++i) {
            std::int64_t t = y[i] - m.x[i] + L0;
            if (t < 0 || t >= side) return false;
            id = id * side + std::size_t(t);
        }
        return true;
    };
    std::size_t s, t;
    if (!local(from, s) || !local(to, t)) fail(ErrorCode::InvalidArgument, "path0 endpoint outside box");
    if (!world_.open(from) || !world_.open(to)) return {};
    std::vector<std::size_t> stride(dd);
    std::size_t total = 1;
    for (int i = dd - 1; i >= 0; --i) {
        stride[i] = total;
        total *= std::size_t(side);
    }
    // allowed: interior and open; the target is always allowed
    if (interior0_.size() != total) {
        interior0_.assign(total, 0);
        for (std::size_t id = 0; id < total; ++id) {
            std::size_t r = id;
            bool in = true;
            for (int i = 0; i < dd && in; ++i) {
                std::int64_t c = std::int64_t(r / stride[i]);
                r %= stride[i];
                in = c >= 1 && c <= side - 2;
            }
            interior0_[id] = in;
        }
    }
    std::vector<char> allowed = interior0_;
    for (const auto& y : world_.hole0(m.x)) {
        std::size_t id;
        if (local(y, id)) allowed[id] = 0;
    }
    allowed[t] = 1;

    std::vector<std::int64_t> parent(total, -2);
    std::vector<std::size_t> queue{s};
    parent[s] = -1;
    const auto dirs = lex_dirs(dd);
    bool found = s == t;
    for (std::size_t head = 0; head < queue.size() && !found; ++head) {
        const std::size_t cur = queue[head];
        for (const Dir& dv : dirs) {
            const std::int64_t c = std::int64_t(cur / stride[dv.axis] % std::size_t(side)) + dv.sign;
            if (c < 0 || c >= side) continue;
            const std::size_t id = dv.sign > 0 ? cur + stride[dv.axis] : cur - stride[dv.axis];
            if (parent[id] != -2 || !allowed[id]) continue;
            parent[id] = std::int64_t(cur);
            if (id == t) {
                found = true;
                break;
            }
            queue.push_back(id);
        }
    }
    if (!found) return {};
    auto unpack = [&](std::size_t id) {
        IVec y(dd);
        for (int i = dd - 1; i >= 0; --i) {
            y[i] = m.x[i] - L0 + std::int64_t(id % side);
            id /= side;
        }
        return y;
    };
    std::vector<IVec> path;
    for (std::int64_t id = std::int64_t(t); id >= 0; id = parent[id]) path.push_back(unpack(id));
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<IVec> Carpet::coarse_path17(const BoxId& m, Dir v, Dir w) {
    require(m.k >= 1, "coarse paths live at k >= 1");
    require(!(v == w), "faces must differ");
    const int dd = d(), k = m.k;
    const std::int64_t s = L(k) / 17, Lp = L(k - 1), hq = (q(k) - 1) / 2;
    IVec start = anchor(m, v) - v.vec(dd, s);
    IVec goal = anchor(m, w) - w.vec(dd, s);
    absl::flat_hash_map<IVec, bool> allowed;
    auto ok = [&](const IVec& z) {
        for (int i = 0; i < dd; ++i)
            if (std::llabs(z[i] - m.x[i]) > 16 * s) return false;
        if (world_.clean()) return true;
        auto it = allowed.find(z);
        if (it != allowed.end()) return it->second;
        bool all = true;
        for_cube(dd, hq, [&](const std::vector<std::int64_t>& j) {
            if (!all) return;
            IVec c = z;
            for (int i = 0; i < dd; ++i) c[i] += 2 * Lp * j[i];
            if (!world_.good(c, k - 1)) all = false;
        });
        return allowed[z] = all;
    };
    if (!ok(start) || !ok(goal)) return {};
    absl::flat_hash_map<IVec, IVec> parent;
    std::deque<IVec> queue{start};
    parent[start] = start;
    auto dirs = lex_dirs(dd);
    while (!queue.empty() && !parent.contains(goal)) {
        IVec y = queue.front();
        queue.pop_front();
        for (const Dir& dv : dirs) {
            IVec z = y + dv.vec(dd, 2 * s);
            if (parent.contains(z) || !ok(z)) continue;
            parent[z] = y;
            queue.push_back(z);
        }
    }
    if (!parent.contains(goal)) return {};
    std::vector<IVec> path{goal};
    while (!(path.back() == start)) path.push_back(parent[path.back()]);
    std::reverse(path.begin(), path.end());
    return path;
}

namespace {

// one bundle path inside the coarse box z, in index coordinates j
std::vector<IVec> bundle_path(const IVec& z, Dir a, Dir b, const IVec& start, std::int64_t Lp,
                              std::int64_t h) {
    const int d = z.d;
    auto coord = [&](const IVec& p, Dir e) { return e.sign * (p[e.axis] - z[e.axis]) / (2 * Lp); };
    std::vector<IVec> out{start};
    IVec p = start;
    if (a.axis == b.axis) {
        for (std::int64_t t = 0; t < 2 * h; ++t) out.push_back(p = p + b.vec(d, 2 * Lp));
        return out;
    }
    std::int64_t beta = coord(start, b);
    for (std::int64_t t = coord(start, a); t > beta; --t) out.push_back(p = p - a.vec(d, 2 * Lp));
    for (std::int64_t t = beta; t < h; ++t) out.push_back(p = p + b.vec(d, 2 * Lp));
    return out;
}

} // namespace

std::vector<std::vector<IVec>> Carpet::path_bundle_box(const IVec& z, Dir a, Dir b, int k) const {
    require(k >= 1, "bundles live at k >= 1");
    require(!(a == b), "bundle faces must differ");
    const int dd = d();
    const std::int64_t Lp = L(k - 1), h = (q(k) - 1) / 2;
    std::vector<std::vector<IVec>> out;
    for_cube(dd - 1, h, [&](const std::vector<std::int64_t>& j) {
        IVec c = z;
        for (int i = 0, t = 0; i < dd; ++i)
            c[i] += 2 * Lp * (i == a.axis ? a.sign * h : j[t++]);
        out.push_back(bundle_path(z, a, b, c, Lp, h));
    });
    return out;
}

std::vector<std::vector<IVec>> Carpet::bundle_k(const BoxId& m, Dir v, Dir w) {
    auto route = coarse_path17(m, v, w);
    if (route.empty()) return {};
    const int dd = d(), k = m.k;
    const std::int64_t Lp = L(k - 1), h = (q(k) - 1) / 2;
    std::vector<std::vector<IVec>> out;
    for (const auto& x : small_face(m, v, anchor(m, v))) {
        std::vector<IVec> path;
        IVec cur = x - v.vec(dd, Lp);
        for (std::size_t i = 0; i < route.size(); ++i) {
            Dir a = i == 0 ? v : -dir_between(route[i - 1], route[i]);
            Dir b = i + 1 == route.size() ? w : dir_between(route[i], route[i + 1]);
            auto seg = bundle_path(route[i], a, b, cur, Lp, h);
            path.insert(path.end(), seg.begin(), seg.end());
            cur = seg.back() + b.vec(dd, 2 * Lp);
        }
        out.push_back(std::move(path));
    }
    return out;
}

void Carpet::build_flow(LatticeFlow& out, const BoxId& m, Dir v, Dir w, double scale) {
    require(!(v == w), "box flow faces must differ");
    if (m.k == 0) {
        const auto fv = fractal(m, v);
        const auto& fw = fractal(m, w);
        const double wgt = scale / double(fv.size());
        for (std::size_t i = 0; i < fv.size(); ++i) {
            auto p = path0(m, fv[i], fw[i]);
            if (p.empty())
                fail(ErrorCode::NoPath, "no vacant path in 0-box " + to_string(m.x) + " from " +
                                            to_string(fv[i]) + " to " + to_string(fw[i]));
            out.add_path(p, wgt);
        }
        return;
    }
    auto paths = bundle_k(m, v, w);
    if (paths.empty())
        fail(ErrorCode::NoPath, "no coarse route in " + std::to_string(m.k) + "-box " + to_string(m.x));
    const double ratio = double(fractal_size(m.k - 1)) / double(fractal_size(m.k));
    for (const auto& p : paths)
        for (std::size_t j = 0; j < p.size(); ++j) {
            Dir in = j == 0 ? v : dir_between(p[j], p[j - 1]);
            Dir o = j + 1 == p.size() ? w : dir_between(p[j], p[j + 1]);
            add_flow_box(out, {p[j], m.k - 1}, in, o, scale * ratio);
        }
}

const LatticeFlow& Carpet::box_template(int k, Dir v, Dir w) {
    require(world_.clean(), "box templates need the clean world");
    auto key = std::make_tuple(k, dir_index(v), dir_index(w));
    auto it = templates_.find(key);
    if (it == templates_.end()) {
        LatticeFlow t(d());
        build_flow(t, {IVec(d()), k}, v, w, 1.0);
        it = templates_.emplace(key, std::move(t)).first;
    }
    return it->second;
}

void Carpet::add_flow_box(LatticeFlow& out, const BoxId& m, Dir v, Dir w, double scale) {
    if (!world_.clean()) {
        build_flow(out, m, v, w, scale);
        return;
    }
    const int dd = d();
    box_template(m.k, v, w).for_each([&](const IVec& y, int axis, double val) {
        IVec a = y + m.x;
        out.add(a, a + IVec::unit(dd, axis), scale * val);
    });
}

LatticeFlow Carpet::flow_box(const BoxId& m, Dir v, Dir w) {
    LatticeFlow f(d());
    add_flow_box(f, m, v, w, 1.0);
    return f;
}

} // namespace cylperc
