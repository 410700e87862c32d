#include "renorm.hpp"

#include <algorithm>
#include <cstdio>

#include "parallel.hpp"

namespace cylperc {

std::int64_t ceil_pow(std::int64_t L, double a) {
    long double x = std::pow((long double)L, (long double)a);
    auto c = std::int64_t(std::ceil(x));
    // guard the float rounding at integer boundaries
    if ((long double)(c - 1) >= x) --c;
    return c;
}

namespace {

void schedules(ScaleLadder& lad) {
    const double L0 = double(lad.L[0]);
    lad.u_tilde = std::pow(L0, -(lad.d - 1 - lad.gamma / 2));
    lad.u.clear();
    lad.rho.clear();
    for (int k = 0; k <= lad.k_max(); ++k) {
        double f = 1.0 - 1.0 / (k + 2);
        lad.u.push_back(lad.u_tilde * f);
        lad.rho.push_back(2.0 * f);
    }
}

void check_params(ScaleLadder& lad, std::int64_t L0) {
    require(lad.d >= 3 && lad.d <= kMaxDim, "d out of range");
    require(L0 > 0 && L0 % 17 == 0, "L0 must be a positive multiple of 17");
    require(lad.gamma > 0 && lad.gamma <= 0.2, "gamma must lie in (0, 1/5)");
    if (lad.gamma == 0.2)
        lad.warnings.push_back("gamma sits on the open bound 1/5; accepted as the desk preset");
    double alpha_lo = 1 - lad.gamma / (2 * (lad.d - 1));
    require(lad.alpha > alpha_lo && lad.alpha < 1, "alpha must lie in (1 - gamma/(2(d-1)), 1)");
    require(lad.beta > 0 && lad.beta < 1 - lad.alpha, "beta must lie in (0, 1 - alpha)");
    double lower = 30 * std::sqrt(double(lad.d)) / double(L0);
    if (lower > std::sqrt(2.0))
        lad.warnings.push_back(
            "scale-1 unalignment window is empty: 30*sqrt(d)/L0 > sqrt(2), no 1-box can be bad");
}

} // namespace

ScaleLadder ladder(std::int64_t L0, double gamma, double alpha, double beta, int d, int k_max) {
    ScaleLadder lad;
    lad.d = d;
    lad.gamma = gamma;
    lad.alpha = alpha;
    lad.beta = beta;
    check_params(lad, L0);
    require(k_max >= 0, "k_max must be >= 0");
    lad.L.push_back(L0);
    for (int k = 1; k <= k_max; ++k) {
        __int128 Lp = lad.L.back();
        __int128 c = ceil_pow(lad.L.back(), alpha + beta);
        const long double approx = 17.0L * k * k * 2 * (long double)Lp * (long double)Lp * (long double)c;
        __int128 v = approx > 1e30L ? __int128(INT64_MAX) : 17 * (__int128(k) * k * 2 * Lp * Lp * c + Lp);
        if (v > INT64_MAX / 4)
            fail(ErrorCode::LadderOverflow,
                 "L_" + std::to_string(k) + " exceeds 64-bit lattice coordinates");
        lad.L.push_back(std::int64_t(v));
    }
    schedules(lad);
    return lad;
}

ScaleLadder synthetic_ladder(std::int64_t L0, const std::vector<std::int64_t>& q, double gamma,
                             double alpha, double beta, int d) {
    ScaleLadder lad;
    lad.d = d;
    lad.gamma = gamma;
    lad.alpha = alpha;
    lad.beta = beta;
    lad.synthetic = true;
    check_params(lad, L0);
    lad.L.push_back(L0);
    for (auto qk : q) {
        require(qk >= 1 && qk % 2 == 1, "synthetic ratios must be odd and positive");
        lad.L.push_back(17 * qk * lad.L.back());
    }
    schedules(lad);
    return lad;
}

std::vector<std::string> ladder_violations(const ScaleLadder& lad) {
    std::vector<std::string> out;
    for (int k = 0; k <= lad.k_max(); ++k) {
        if (lad.L[k] % 17 != 0) out.push_back("L_" + std::to_string(k) + " not in 17N");
        if (k == 0) continue;
        if (lad.L[k] % lad.L[k - 1] != 0)
            out.push_back("L_" + std::to_string(k - 1) + " does not divide L_" + std::to_string(k));
        if (lad.L[k] % (2 * lad.L[k - 1]) == 0)
            out.push_back("2L_" + std::to_string(k - 1) + " divides L_" + std::to_string(k));
        if (!(lad.u[k] > lad.u[k - 1])) out.push_back("u not increasing");
        if (!(lad.rho[k] > lad.rho[k - 1])) out.push_back("rho not increasing");
    }
    return out;
}

Verdict0 classify0(const CylinderView& view, const IVec& x, const ScaleLadder& lad) {
    Verdict0 v;
    v.count = count_hitting(view, box_of(x, lad.L[0]));
    v.bad = v.count > std::pow(double(lad.L[0]), lad.gamma);
    return v;
}

namespace {

double ndist(const IVec& a, const IVec& b) {
    double s = 0;
    for (int i = 0; i < a.d; ++i) {
        double t = double(a[i] - b[i]);
        s += t * t;
    }
    return std::sqrt(s);
}

Vec unit_diff(const IVec& a, const IVec& b) {
    Vec v(a.d);
    for (int i = 0; i < a.d; ++i) v[i] = double(a[i] - b[i]);
    return normalized(v);
}

} // namespace

VerdictK classify_k(std::vector<IVec> bad, const ScaleLadder& lad, int k) {
    require(k >= 1 && k <= lad.k_max(), "scale out of ladder range");
    VerdictK out;
    std::sort(bad.begin(), bad.end());
    bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
    const std::size_t n = bad.size();
    if (n < 3) return out;
    const double Lp = double(lad.L[k - 1]);
    const double floor_ = double(k) * k * std::pow(Lp, 2 + lad.alpha);
    const double lower = 30 * std::sqrt(double(lad.d)) / (double(k) * k * Lp);
    const double upper = std::sqrt(2.0);
    // pair table prunes everything below the distance floor
    std::vector<std::uint8_t> far(n * n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            far[i * n + j] = far[j * n + i] = ndist(bad[i], bad[j]) >= floor_;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            if (b == a || !far[a * n + b]) continue;
            Vec ub = unit_diff(bad[a], bad[b]);
            for (std::size_t c = b + 1; c < n; ++c) {
                if (c == a || !far[a * n + c] || !far[b * n + c]) continue;
                double dd = dist(ub, unit_diff(bad[a], bad[c]));
                if (dd >= lower && dd <= upper) {
                    out.bad = true;
                    out.witness = {bad[a], bad[b], bad[c]};
                    return out;
                }
            }
        }
    return out;
}

bool Defect::contains(const IVec& sub, const ScaleLadder& lad) const {
    if (empty) return false;
    return dist_set_line(box_of(sub, lad.L[k - 1]), line) <= radius;
}

Covering find_covering_line(std::vector<IVec> bad, const IVec& owner, const ScaleLadder& lad,
                            int k) {
    require(k >= 1 && k <= lad.k_max(), "scale out of ladder range");
    const int d = owner.d;
    std::sort(bad.begin(), bad.end());
    bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
    Covering cov;
    Defect& def = cov.defect;
    def.owner = owner;
    def.k = k;
    def.radius = 2.0 * k * k * std::pow(double(lad.L[k - 1]), 2 + lad.alpha);
    Vec ed = Vec::unit(d, d - 1);
    if (bad.empty()) {
        def.line = make_line(to_vec(owner), ed);
        def.empty = true;
        cov.found = true;
        cov.which = 0;
        return cov;
    }
    def.empty = false;
    const IVec& x1 = bad.front();
    const double Lp = double(lad.L[k - 1]);
    std::size_t far_i = 0;
    double far_d = -1;
    bool all_near = true;
    for (std::size_t i = 0; i < bad.size(); ++i) {
        double reach = farthest_distance(BoxInf{to_vec(bad[i]), Lp}, to_vec(x1));
        if (reach > def.radius) all_near = false;
        double c = ndist(bad[i], x1);
        if (c > far_d) {
            far_d = c;
            far_i = i;
        }
    }
    if (all_near) {
        def.line = make_line(to_vec(x1), ed);
        cov.which = 1;
    } else {
        Vec dir(d);
        for (int i = 0; i < d; ++i) dir[i] = double(bad[far_i][i] - x1[i]);
        def.line = make_line(to_vec(x1), dir);
        cov.which = 2;
    }
    cov.found = true;
    for (const auto& b : bad)
        if (!def.contains(b, lad)) {
            cov.found = false;
            break;
        }
    return cov;
}

Vacancy::Vacancy(const ProcessSample& s, double u, double rho, const IVec& center,
                 std::int64_t radius)
    : d_(center.d), rho_(rho) {
    const int d = d_;
    // unit segments leave the box by one step
    BoxInf region = box_of(center, radius + 1);
    check_coverage(make_view(s, std::min(u, s.u_max), rho), region);
    for (const auto& l : s.lines)
        if (l.level <= u && dist_set_line(region, l.line) <= rho) lines_.push_back(l.line);
    lo_ = center - IVec::unit(d, 0, 0);
    for (int i = 0; i < d; ++i) lo_[i] = center[i] - radius;
    side_ = 2 * radius + 1;
    if (lines_.empty()) {
        all_open_ = true;
        return;
    }
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= std::size_t(side_);
    closed_.assign(total, 0);
    Vec lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
        lo[i] = double(lo_[i]) - 0.5;
        hi[i] = double(lo_[i] + side_) - 0.5;
    }
    LineIndex index(lines_, lo, hi, 4.0, rho + 1.0);
    std::vector<std::size_t> slots(total);
    IVec y(d);
    for (std::size_t t = 0; t < total; ++t) {
        std::size_t r = t;
        for (int i = d - 1; i >= 0; --i) {
            y[i] = lo_[i] + std::int64_t(r % side_);
            r /= side_;
        }
        Vec yv = to_vec(y);
        const auto& cand = index.near(yv);
        bool closed = false;
        for (int li : cand) {
            const Line& l = lines_[li];
            for (int a = 0; a < d && !closed; ++a)
                for (int sgn = -1; sgn <= 1 && !closed; sgn += 2) {
                    Vec z = yv;
                    z[a] += sgn;
                    closed = dist_segment_line(yv, z, l) <= rho;
                }
            if (closed) break;
        }
        closed_[t] = closed;
    }
}

bool Vacancy::inside(const IVec& y) const {
    for (int i = 0; i < d_; ++i)
        if (y[i] < lo_[i] || y[i] >= lo_[i] + side_) return false;
    return true;
}

std::size_t Vacancy::index(const IVec& y) const {
    std::size_t t = 0;
    for (int i = 0; i < d_; ++i) t = t * side_ + std::size_t(y[i] - lo_[i]);
    return t;
}

bool Vacancy::is_open(const IVec& y) const {
    if (all_open_) return true;
    if (!inside(y)) fail(ErrorCode::WindowUndercoverage, "site outside the vacancy region");
    return !closed_[index(y)];
}

bool Vacancy::segment_open(const IVec& x, const IVec& y) const {
    if (all_open_) return true;
    Vec a = to_vec(x), b = to_vec(y);
    for (const auto& l : lines_)
        if (dist_segment_line(a, b, l) <= rho_) return false;
    return true;
}

std::size_t Vacancy::closed_count() const {
    std::size_t n = 0;
    for (auto c : closed_) n += c;
    return n;
}

std::vector<IVec> Vacancy::closed_in(const IVec& center, std::int64_t radius) const {
    std::vector<IVec> out;
    if (all_open_) return out;
    const int d = d_;
    IVec y(d), off(d);
    for (int i = 0; i < d; ++i) off[i] = -radius;
    for (;;) {
        y = center + off;
        if (!is_open(y)) out.push_back(y);
        int i = d - 1;
        while (i >= 0 && ++off[i] > radius) off[i--] = -radius;
        if (i < 0) break;
    }
    return out;
}

std::vector<IVec> hole0(const Vacancy& vac, const IVec& x, std::int64_t L0) {
    return vac.closed_in(x, L0);
}

double box_hitting_mass(double L, double rho, int d) {
    // surface area of the parallel body of a cube of side a, then Cauchy's formula
    double a = 2 * L, area = 0, binom = 1;
    for (int j = 1; j <= d; ++j) {
        binom = binom * (d - j + 1) / j;
        area += binom * std::pow(a, d - j) * kappa(j) * j * std::pow(rho, j - 1);
    }
    return kappa(d - 1) / (d * kappa(d)) * area;
}

P0Report estimate_p0(const ScaleLadder& lad, int replicas, std::uint64_t seed, double z) {
    P0Report rep;
    const int d = lad.d;
    rep.L0 = lad.L[0];
    rep.u0 = lad.u[0];
    rep.rho0 = lad.rho[0];
    rep.threshold = std::pow(double(rep.L0), lad.gamma);
    rep.replicas = replicas;
    IVec origin(d);
    BoxInf box = box_of(origin, rep.L0);
    BallWindow w = window_for(box, rep.rho0);
    std::vector<std::uint8_t> bad(replicas, 0);
    parallel_for(replicas, [&](std::size_t r) {
        auto s = sample_hitting_ball(rep.u0, w.center, w.R, derive_seed(seed, "p0", r));
        bad[r] = classify0(make_view(s, rep.u0, rep.rho0), origin, lad).bad;
    });
    for (auto b : bad) rep.bad += b;
    rep.estimate = replicas ? double(rep.bad) / replicas : 0.0;
    rep.ci = wilson(rep.bad, replicas, z);
    rep.lambda = rep.u0 * box_hitting_mass(double(rep.L0), rep.rho0, d);
    rep.tail = poisson_tail_above(rep.lambda, rep.threshold);
    rep.lambda_env = rep.u0 * kappa(d - 1) * std::pow(double(rep.L0) * std::sqrt(double(d)) + rep.rho0, d - 1);
    rep.tail_env = poisson_tail_above(rep.lambda_env, rep.threshold);
    rep.within_ci = rep.ci.contains(rep.tail);
    return rep;
}

CertificateReport covering_certificate(const ScaleLadder& lad, int k, int trials, std::uint64_t seed) {
    require(k >= 1 && k <= lad.k_max(), "scale out of ladder range");
    const int d = lad.d;
    const std::int64_t Lp = lad.L[k - 1], h = (lad.L[k] / Lp - 1) / 2;
    const double floor = double(k) * k * std::pow(double(Lp), 2 + lad.alpha);
    CertificateReport rep;
    rep.trials = trials;
    std::vector<int> good(trials), counter(trials), which(trials);
    parallel_for(std::size_t(trials), [&](std::size_t t) {
        Rng rng = Rng::stream(seed, "certificate", t);
        auto snap = [&](double v) {
            double j = std::round(v / double(2 * Lp));
            return std::int64_t(std::clamp(j, -double(h), double(h))) * 2 * Lp;
        };
        const int mode = int(rng.below(3));
        const int m = 1 + int(rng.below(6));
        std::vector<IVec> bad;
        Vec p(d);
        for (int i = 0; i < d; ++i) p[i] = rng.uniform(-1, 1) * double(lad.L[k]);
        Vec w = sample_sphere(rng, d);
        for (int n = 0; n < m; ++n) {
            IVec c(d);
            for (int i = 0; i < d; ++i) {
                double v;
                if (mode == 0) v = rng.uniform(-1, 1) * double(lad.L[k]);
                else if (mode == 1) v = p[i] + rng.uniform(-1, 1) * double(lad.L[k]) * w[i] + rng.uniform(-2, 2) * double(Lp);
                else v = p[i] + rng.uniform(-0.3, 0.3) * floor;
                c[i] = snap(v);
            }
            bad.push_back(c);
        }
        if (classify_k(bad, lad, k).bad) return;
        good[t] = 1;
        auto cov = find_covering_line(bad, IVec(d), lad, k);
        counter[t] = !cov.found;
        which[t] = cov.which;
    });
    for (int t = 0; t < trials; ++t) {
        rep.good += good[t];
        rep.counterexamples += counter[t];
        if (good[t]) ++rep.which[which[t]];
    }
    rep.bad = trials - rep.good;
    return rep;
}

} // namespace cylperc
