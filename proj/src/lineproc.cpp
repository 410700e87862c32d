#include "lineproc.hpp"

#include <cstdio>
#include <sstream>

namespace cylperc {

ProcessSample ProcessSample::restrict_to(double u) const {
    require(u <= u_max, "restriction level above u_max");
    ProcessSample r{d, window, u, seed, {}};
    for (const auto& l : lines)
        if (l.level <= u) r.lines.push_back(l);
    return r;
}

double c_mu(int d) { return 2.0 * kappa(d - 1) / (d * kappa(d)); }

double window_mass(const Window& w, int d) {
    if (auto* b = std::get_if<BallWindow>(&w)) return kappa(d - 1) * std::pow(b->R, d - 1);
    const auto& p = std::get<PlaneWindow>(w);
    double vol = 1.0;
    for (int i = 0; i < d - 1; ++i) vol *= p.hi[i] - p.lo[i];
    return c_mu(d) * vol;
}

Vec sample_sphere(Rng& rng, int d) {
    for (;;) {
        Vec v(d);
        for (int i = 0; i < d; ++i) v[i] = rng.normal();
        double n = norm(v);
        if (n > 1e-12) return (1.0 / n) * v;
    }
}

Vec sample_chi(Rng& rng, int d) {
    for (;;) {
        Vec w = sample_sphere(rng, d);
        w[d - 1] = std::fabs(w[d - 1]);
        if (w[d - 1] > 0.0 && rng.uniform() < w[d - 1]) return w;
    }
}

Vec sample_orthogonal(Rng& rng, const Vec& v) {
    for (;;) {
        Vec g = sample_sphere(rng, v.d);
        g = g - dot(g, v) * v;
        double n = norm(g);
        if (n > 1e-9) return (1.0 / n) * g;
    }
}

ProcessSample sample_hitting_ball(double u_max, const Vec& center, double R, std::uint64_t seed) {
    if (!(R > 0)) fail(ErrorCode::InvalidWindow, "ball window radius must be positive");
    require(u_max >= 0, "u_max must be >= 0");
    const int d = center.d;
    ProcessSample s{d, BallWindow{center, R}, u_max, seed, {}};
    Rng rng(seed);
    auto n = rng.poisson(u_max * kappa(d - 1) * std::pow(R, d - 1));
    s.lines.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        Vec v = sample_sphere(rng, d);
        Vec e = sample_orthogonal(rng, v);
        double r = R * std::pow(rng.uniform(), 1.0 / (d - 1));
        double level = u_max * rng.uniform();
        s.lines.push_back({make_line(center + r * e, v), level});
    }
    return s;
}

ProcessSample sample_hyperplane_window(double u_max, double h, const Vec& lo, const Vec& hi,
                                       std::uint64_t seed) {
    const int d = lo.d;
    for (int i = 0; i < d - 1; ++i)
        if (!(hi[i] > lo[i])) fail(ErrorCode::InvalidWindow, "hyperplane window is empty");
    require(u_max >= 0, "u_max must be >= 0");
    PlaneWindow pw{h, lo, hi};
    ProcessSample s{d, pw, u_max, seed, {}};
    Rng rng(seed);
    auto n = rng.poisson(u_max * window_mass(pw, d));
    s.lines.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        Vec p(d);
        for (int j = 0; j < d - 1; ++j) p[j] = rng.uniform(lo[j], hi[j]);
        p[d - 1] = h;
        Vec w = sample_chi(rng, d);
        double level = u_max * rng.uniform();
        s.lines.push_back({from_hyperplane_param({p, w}), level});
    }
    return s;
}

ProcessSample top_up(const ProcessSample& s, double delta, std::uint64_t seed) {
    require(delta > 0, "top_up needs delta > 0");
    ProcessSample extra;
    if (auto* b = std::get_if<BallWindow>(&s.window))
        extra = sample_hitting_ball(delta, b->center, b->R, seed);
    else {
        const auto& p = std::get<PlaneWindow>(s.window);
        extra = sample_hyperplane_window(delta, p.h, p.lo, p.hi, seed);
    }
    ProcessSample r = s;
    r.u_max = s.u_max + delta;
    for (auto l : extra.lines) {
        l.level += s.u_max;
        r.lines.push_back(l);
    }
    return r;
}

BallWindow window_for(const ConvexSet& A, double rho) {
    Vec c = std::visit([](const auto& x) { return x.center; }, A);
    return {c, farthest_distance(A, c) + rho};
}

CylinderView make_view(const ProcessSample& s, double u, double rho) {
    require(u <= s.u_max, "view level above u_max");
    require(rho > 0, "cylinder radius must be positive");
    return {&s, u, rho};
}

void check_coverage(const CylinderView& v, const ConvexSet& A) {
    const auto* b = std::get_if<BallWindow>(&v.sample->window);
    if (!b) fail(ErrorCode::WindowUndercoverage, "hyperplane windows certify no query set");
    if (farthest_distance(A, b->center) + v.rho > b->R * (1 + 1e-12))
        fail(ErrorCode::WindowUndercoverage, "query set plus rho leaves the ball window");
}

int count_hitting(const CylinderView& v, const ConvexSet& A) {
    check_coverage(v, A);
    int n = 0;
    for (const auto& l : v.sample->lines)
        if (l.level <= v.u && dist_set_line(A, l.line) <= v.rho) ++n;
    return n;
}

bool is_covered(const CylinderView& v, const Vec& x) {
    check_coverage(v, Ball{x, 0.0});
    for (const auto& l : v.sample->lines)
        if (l.level <= v.u && dist_point_line(x, l.line) <= v.rho) return true;
    return false;
}

LineIndex::LineIndex(const std::vector<Line>& lines, const Vec& lo, const Vec& hi, double cell,
                     double reach)
    : lines_(lines), lo_(lo), cell_(cell) {
    require(cell > 0, "cell size must be positive");
    const int d = lo.d;
    long total = 1;
    for (int i = 0; i < d; ++i) {
        n_[i] = std::max(1, int(std::ceil((hi[i] - lo[i]) / cell)));
        total *= n_[i];
    }
    cells_.resize(total);
    std::vector<int> stamp(total, -1);
    const int rc = int(std::ceil(reach / cell)) + 1;
    for (int li = 0; li < int(lines.size()); ++li) {
        const Line& l = lines[li];
        // t-range where the line is near the region
        double t0 = -1e300, t1 = 1e300;
        bool miss = false;
        for (int i = 0; i < d; ++i) {
            double a = lo[i] - reach - cell, b = hi[i] + reach + cell;
            if (l.dir[i] == 0) {
                if (l.anchor[i] < a || l.anchor[i] > b) miss = true;
                continue;
            }
            double s0 = (a - l.anchor[i]) / l.dir[i], s1 = (b - l.anchor[i]) / l.dir[i];
            t0 = std::max(t0, std::min(s0, s1));
            t1 = std::min(t1, std::max(s0, s1));
        }
        if (miss || t0 > t1) continue;
        for (double t = t0;; t += 0.5 * cell) {
            double tc = std::min(t, t1);
            Vec p = point_at(l, tc);
            std::array<int, kMaxDim> base{}, off{};
            for (int i = 0; i < d; ++i) base[i] = int(std::floor((p[i] - lo[i]) / cell));
            for (int i = 0; i < d; ++i) off[i] = -rc;
            for (;;) {
                std::array<int, kMaxDim> idx{};
                bool ok = true;
                for (int i = 0; i < d && ok; ++i) {
                    idx[i] = base[i] + off[i];
                    ok = idx[i] >= 0 && idx[i] < n_[i];
                }
                if (ok) {
                    long ci = cell_index(idx);
                    if (stamp[ci] != li) {
                        Vec c(d);
                        for (int i = 0; i < d; ++i) c[i] = lo[i] + (idx[i] + 0.5) * cell;
                        if (dist_set_line(BoxInf{c, 0.5 * cell}, l) <= reach) {
                            stamp[ci] = li;
                            cells_[ci].push_back(li);
                        }
                    }
                }
                int i = 0;
                while (i < d && ++off[i] > rc) off[i++] = -rc;
                if (i == d) break;
            }
            if (tc >= t1) break;
        }
    }
}

long LineIndex::cell_index(const std::array<int, kMaxDim>& idx) const {
    long k = 0;
    for (int i = 0; i < lo_.d; ++i) k = k * n_[i] + idx[i];
    return k;
}

const std::vector<int>& LineIndex::near(const Vec& x) const {
    std::array<int, kMaxDim> idx{};
    for (int i = 0; i < lo_.d; ++i) {
        idx[i] = int(std::floor((x[i] - lo_[i]) / cell_));
        if (idx[i] < 0 || idx[i] >= n_[i]) {
            // outside the indexed region: clamp only when on the boundary face
            if (idx[i] == n_[i] && x[i] - lo_[i] <= n_[i] * cell_) idx[i] = n_[i] - 1;
            else fail(ErrorCode::WindowUndercoverage, "point outside the line index region");
        }
    }
    return cells_[cell_index(idx)];
}

namespace {
std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}
} // namespace

std::string window_string(const Window& w) {
    std::string s;
    if (auto* b = std::get_if<BallWindow>(&w)) {
        s = "ball";
        for (int i = 0; i < b->center.d; ++i) s += ":" + num(b->center[i]);
        return s + ":" + num(b->R);
    }
    const auto& p = std::get<PlaneWindow>(w);
    s = "plane:" + num(p.h);
    for (int i = 0; i + 1 < p.lo.d; ++i) s += ":" + num(p.lo[i]) + ":" + num(p.hi[i]);
    return s;
}

std::string to_csv(const ProcessSample& s) {
    std::string out = "d,window,u_max,seed\n";
    out += std::to_string(s.d) + "," + window_string(s.window) + "," + num(s.u_max) + "," +
           std::to_string(s.seed) + "\n";
    for (int i = 0; i < s.d; ++i) out += "a" + std::to_string(i) + ",";
    for (int i = 0; i < s.d; ++i) out += "v" + std::to_string(i) + ",";
    out += "level\n";
    for (const auto& l : s.lines) {
        for (int i = 0; i < s.d; ++i) out += num(l.line.anchor[i]) + ",";
        for (int i = 0; i < s.d; ++i) out += num(l.line.dir[i]) + ",";
        out += num(l.level) + "\n";
    }
    return out;
}

namespace {
std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') cur += c;
    }
    out.push_back(cur);
    return out;
}
} // namespace

ProcessSample from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    auto bad = [](const std::string& why) { fail(ErrorCode::Io, "sample csv: " + why); };
    if (!std::getline(in, line) || line.rfind("d,window", 0) != 0) bad("missing header");
    if (!std::getline(in, line)) bad("missing header values");
    auto h = split(line, ',');
    if (h.size() != 4) bad("header needs 4 fields");
    ProcessSample s;
    try {
        s.d = std::stoi(h[0]);
        s.u_max = std::stod(h[2]);
        s.seed = std::stoull(h[3]);
        auto w = split(h[1], ':');
        if (w[0] == "ball" && int(w.size()) == s.d + 2) {
            Vec c(s.d);
            for (int i = 0; i < s.d; ++i) c[i] = std::stod(w[1 + i]);
            s.window = BallWindow{c, std::stod(w[s.d + 1])};
        } else if (w[0] == "plane" && int(w.size()) == 2 + 2 * (s.d - 1)) {
            Vec lo(s.d), hi(s.d);
            for (int i = 0; i < s.d - 1; ++i) {
                lo[i] = std::stod(w[2 + 2 * i]);
                hi[i] = std::stod(w[3 + 2 * i]);
            }
            s.window = PlaneWindow{std::stod(w[1]), lo, hi};
        } else
            bad("unknown window " + h[1]);
        std::getline(in, line); // column names
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto f = split(line, ',');
            if (int(f.size()) != 2 * s.d + 1) bad("row width");
            Vec a(s.d), v(s.d);
            for (int i = 0; i < s.d; ++i) {
                a[i] = std::stod(f[i]);
                v[i] = std::stod(f[s.d + i]);
            }
            s.lines.push_back({Line{a, v, true}, std::stod(f[2 * s.d])});
        }
    } catch (const std::logic_error& e) {
        bad(e.what());
    }
    return s;
}

} // namespace cylperc
