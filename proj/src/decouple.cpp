#include "decouple.hpp"

#include <algorithm>
#include <cstdio>

#include "parallel.hpp"

namespace cylperc {

TwoBoxGeometry build_two_box(double L, double alpha, double eps, double rho, int d) {
    require(d >= 3 && d <= kMaxDim, "d out of range");
    require(alpha > 0 && alpha < 1, "alpha must lie in (0,1)");
    require(eps > 0 && eps < 1, "eps must lie in (0,1)");
    require(rho >= 1 && rho <= 4, "rho must lie in [1,4]");
    require(L >= 1, "L must be >= 1");
    TwoBoxGeometry g;
    g.d = d;
    g.L = L;
    g.alpha = alpha;
    g.eps = eps;
    g.rho = rho;
    g.sep = std::pow(L, 2 + alpha) / eps;
    g.B1 = {Vec(d), L};
    Vec c2(d);
    c2[d - 1] = 2 * L + g.sep;
    g.B2 = {c2, L};
    g.pi1 = L;
    g.pi2 = L + g.sep;
    g.s_half = 2 * L;
    g.s_prime_half = 2 * std::pow(L, 1 + alpha);
    g.cap_chord = eps / (8 * L);
    g.cap_cos = 1 - eps * eps / (128 * L * L);
    g.pad = rho * (1 + eps);
    return g;
}

double cap_mass(double eps, double L, int d) {
    double x = eps * eps / (128 * L * L);
    // sin²θ₀ = 1 − (1−x)², written to avoid cancellation
    double s2 = x * (2 - x);
    return std::pow(s2, 0.5 * (d - 1));
}

Vec sample_cap(Rng& rng, int d, double cos_max) {
    double smax = std::sqrt((1 - cos_max) * (1 + cos_max));
    double s = smax * std::pow(rng.uniform(), 1.0 / (d - 1));
    Vec u(d);
    double n = 0;
    while (n < 1e-12) {
        for (int i = 0; i < d - 1; ++i) u[i] = rng.normal();
        u[d - 1] = 0;
        n = norm(u);
    }
    Vec w = (s / n) * u;
    w[d - 1] = std::sqrt((1 - s) * (1 + s));
    return w;
}

std::vector<Line> gamma_resample(const std::vector<Line>& lines, int plane,
                                 const TwoBoxGeometry& g, std::uint64_t seed) {
    require(plane == 1 || plane == 2, "plane must be 1 or 2");
    Rng rng(seed);
    std::vector<Line> out;
    out.reserve(lines.size());
    for (const auto& l : lines) {
        auto hp = to_hyperplane_param(l, g.plane(plane));
        if (!g.in_square(hp.p, g.s_prime_half)) {
            out.push_back(l);
            continue;
        }
        hp.w = sample_cap(rng, g.d, g.cap_cos);
        out.push_back(from_hyperplane_param(hp));
    }
    return out;
}

namespace {

// η-lines: crossing S₁′ with a cap direction
std::vector<Line> sample_eta(const TwoBoxGeometry& g, double u, Rng& rng) {
    const int d = g.d;
    double area = std::pow(2 * g.s_prime_half, d - 1);
    double mean = u * c_mu(d) * area * cap_mass(g.eps, g.L, d);
    auto n = rng.poisson(mean);
    std::vector<Line> out;
    for (std::uint64_t i = 0; i < n; ++i) {
        Vec p(d);
        for (int j = 0; j < d - 1; ++j) p[j] = rng.uniform(-g.s_prime_half, g.s_prime_half);
        p[d - 1] = g.pi1;
        out.push_back(from_hyperplane_param({p, sample_cap(rng, d, g.cap_cos)}));
    }
    return out;
}

} // namespace

DetailedBalanceReport detailed_balance_test(const TwoBoxGeometry& g, double u, int replicas,
                                            std::uint64_t seed) {
    DetailedBalanceReport rep;
    rep.replicas = replicas;
    BoxInf probe2{g.B2.center, g.B2.radius};
    BoxInf probe1{g.B1.center, g.B1.radius};
    struct Row {
        double n = 0, hit2a = 0, hit2b = 0, hit1a = 0, hit1b = 0, xa = 0, xb = 0, ina = 0, inb = 0;
    };
    std::vector<Row> rows(replicas);
    parallel_for(replicas, [&](std::size_t r) {
        Rng rng = Rng::stream(seed, "balance.eta", r);
        auto eta = sample_eta(g, u, rng);
        auto swapped = gamma_resample(eta, 1, g, derive_seed(seed, "balance.gamma", r));
        Row& row = rows[r];
        row.n = eta.size();
        auto tally = [&](const std::vector<Line>& ls, double& h2, double& h1, double& x, double& in) {
            for (const auto& l : ls) {
                h2 += dist_set_line(probe2, l) <= g.pad;
                h1 += dist_set_line(probe1, l) <= g.pad;
                auto hp = to_hyperplane_param(l, g.pi2);
                x += hp.p[0];
                in += g.in_square(hp.p, g.s_prime_half);
            }
        };
        tally(eta, row.hit2a, row.hit1a, row.xa, row.ina);
        tally(swapped, row.hit2b, row.hit1b, row.xb, row.inb);
    });
    MeanVar n, s_hits;
    MeanVar a2, a1, ax, ain;
    std::vector<double> first, second;
    for (const auto& row : rows) {
        n.add(row.n);
        a2.add(row.hit2a - row.hit2b);
        a1.add(row.hit1a - row.hit1b);
        ax.add(row.xa - row.xb);
        ain.add(row.ina - row.inb);
        s_hits.add(row.hit2a + row.hit2b);
        first.push_back(row.hit2a);
        second.push_back(row.hit2b);
    }
    rep.mean_lines = n.mean;
    auto push = [&](const char* name, const MeanVar& m, bool anti) {
        SwapStat s{name, anti, m.mean, m.sem(), true};
        if (anti) s.ok = std::fabs(m.mean) <= 3 * m.sem() || (m.mean == 0 && m.sem() == 0);
        rep.ok = rep.ok && s.ok;
        rep.stats.push_back(s);
    };
    push("probe_B2_hits_diff", a2, true);
    push("probe_B1_hits_diff", a1, true);
    push("landing_x1_sum_diff", ax, true);
    push("landing_in_S2prime_diff", ain, true);
    push("probe_B2_hits_sum", s_hits, false);
    rep.ks = ks_two_sample(first, second);
    return rep;
}

WiggleReport wiggle_check(double L, double eps, int d, int samples, std::uint64_t seed,
                          double min_L) {
    require(L >= min_L, "L below the configured validity threshold");
    require(eps > 0 && eps < 1, "eps must lie in (0,1)");
    WiggleReport rep;
    rep.samples = samples;
    rep.bound = 0.75 * eps;
    double cos_max = 1 - eps * eps / (128 * L * L);
    Rng rng = Rng::stream(seed, "wiggle");
    for (int i = 0; i < samples; ++i) {
        Vec v1 = sample_cap(rng, d, cos_max);
        Vec v2 = sample_cap(rng, d, cos_max);
        double z0 = rng.uniform(-L, L);
        // p ∈ Π₁ cancels: both points are p + t·v with t chosen to reach x_d = z₀
        double t1 = (z0 - L) / v1[d - 1];
        double t2 = (z0 - L) / v2[d - 1];
        double disp = norm(t1 * v1 - t2 * v2);
        rep.max_displacement = std::max(rep.max_displacement, disp);
    }
    rep.ok = rep.max_displacement < rep.bound;
    return rep;
}

LandingReport landing_density_probe(const TwoBoxGeometry& g, int samples, std::uint64_t seed,
                                    bool single_line) {
    const int d = g.d;
    LandingReport rep;
    rep.samples = samples;
    const int n = rep.grid;
    double dz = g.pi2 - g.pi1;
    double smax = std::sqrt((1 - g.cap_cos) * (1 + g.cap_cos));
    double reach = dz * smax / g.cap_cos; // largest lateral drift
    double half = single_line ? reach : g.s_half + reach;
    int cells = 1;
    for (int i = 0; i < d - 1; ++i) cells *= n;
    std::vector<int> hist(cells, 0);
    const int nb = 1 << (d - 1);
    std::vector<double> table(nb * nb, 0.0);
    Rng rng = Rng::stream(seed, "landing");
    int inside = 0;
    for (int s = 0; s < samples; ++s) {
        Vec p(d);
        if (!single_line)
            for (int j = 0; j < d - 1; ++j) p[j] = rng.uniform(-g.s_half, g.s_half);
        p[d - 1] = g.pi1;
        // Γ₁ redraws the direction through p₁
        Vec w = sample_cap(rng, d, g.cap_cos);
        Vec p2 = p + (dz / w[d - 1]) * w;
        p2[d - 1] = g.pi2;
        inside += g.in_square(p2, g.s_prime_half);
        int idx = 0, row = 0;
        for (int j = 0; j < d - 1; ++j) {
            int c = int(std::floor((p2[j] + half) / (2 * half) * n));
            c = std::clamp(c, 0, n - 1);
            idx = idx * n + c;
            row |= (p2[j] - p[j] >= 0) << j;
        }
        ++hist[idx];
        // Γ₂ at the landing point
        Vec w2 = sample_cap(rng, d, g.cap_cos);
        int col = 0;
        for (int j = 0; j < d - 1; ++j) col |= (w2[j] >= 0) << j;
        table[row * nb + col] += 1;
    }
    double cell_area = std::pow(2 * half / n, d - 1);
    int mx = 0;
    for (int h : hist) {
        rep.cells_hit += h > 0;
        mx = std::max(mx, h);
    }
    rep.sup_density = samples > 0 ? mx / (double(samples) * cell_area) : 0.0;
    rep.scaled_sup = rep.sup_density * std::pow(g.L, (1 + g.alpha) * (d - 1));
    rep.frac_in_s2prime = samples > 0 ? double(inside) / samples : 0.0;
    rep.independence = chi2_independence(table, nb, nb);
    return rep;
}

ThreeBoxResult three_box_predicates(const Vec& x1, const Vec& x2, const Vec& x3, double L,
                                    double eps, double alpha) {
    if (x1 == x2 || x1 == x3 || x2 == x3)
        fail(ErrorCode::InvalidArgument, "three-box centres must be distinct");
    const int d = x1.d;
    ThreeBoxResult r;
    r.pair_floor = std::pow(L, 2 + alpha) / eps;
    r.min_pair = std::min({dist(x1, x2), dist(x1, x3), dist(x2, x3)});
    r.dir_dist = dist(normalized(x1 - x2), normalized(x1 - x3));
    r.dir_lower = 30 * std::sqrt(double(d)) * eps / L;
    r.dir_upper = std::sqrt(2.0);
    const double tol = 1e-12;
    r.separated = r.min_pair >= r.pair_floor * (1 - tol);
    r.unaligned = r.dir_dist >= r.dir_lower * (1 - tol) && r.dir_dist <= r.dir_upper * (1 + tol);
    r.ok = r.separated && r.unaligned;
    return r;
}

DisjointnessReport three_box_disjointness(const Vec& x1, const Vec& x2, const Vec& x3, double L,
                                          double eps, double alpha, int samples,
                                          std::uint64_t seed) {
    const int d = x1.d;
    DisjointnessReport rep;
    rep.samples = samples;
    Vec v12 = normalized(x2 - x1);
    double cap = eps / (16 * std::sqrt(double(d)) * L);
    double reach = 7 * std::sqrt(double(d)) * std::pow(L, 1 + alpha);
    Rng rng = Rng::stream(seed, "three_box");
    rep.min_gap = 1e300;
    auto in_ball = [&] {
        Vec e = sample_sphere(rng, d);
        return (reach * std::pow(rng.uniform(), 1.0 / d)) * e;
    };
    for (int s = 0; s < samples; ++s) {
        Vec y1 = x1 + in_ball();
        Vec y3 = x3 + in_ball();
        Vec w = normalized(y3 - y1);
        if (dot(w, v12) < 0) w = -w;
        double gap = dist(w, v12) - cap;
        rep.min_gap = std::min(rep.min_gap, gap);
        rep.violations += gap < 0;
    }
    return rep;
}

std::string obs_name(const MonotoneObservable& f) {
    char buf[96];
    switch (f.kind) {
    case ObsKind::CountAtLeast: std::snprintf(buf, sizeof buf, "count_at_least(%d)", f.threshold); break;
    case ObsKind::CoveredFractionAtLeast:
        std::snprintf(buf, sizeof buf, "covered_fraction_at_least(%d^d,%g)", f.grid, f.fraction);
        break;
    case ObsKind::AllVacant: std::snprintf(buf, sizeof buf, "all_vacant(%d^d)", f.grid); break;
    }
    return buf;
}

namespace {

std::vector<Vec> box_grid(const BoxInf& b, int n) {
    const int d = b.center.d;
    std::vector<Vec> pts;
    std::vector<int> idx(d, 0);
    for (;;) {
        Vec x(d);
        for (int i = 0; i < d; ++i)
            x[i] = b.center[i] - b.radius + (n > 1 ? 2 * b.radius * idx[i] / (n - 1) : b.radius);
        pts.push_back(x);
        int i = 0;
        while (i < d && ++idx[i] == n) idx[i++] = 0;
        if (i == d) break;
    }
    return pts;
}

// precomputed per box: line distance to the box and, for grid observables, to each grid point
struct BoxData {
    std::vector<double> level, dbox;
    std::vector<std::vector<double>> dpts; // [line][point], only lines that can reach
};

BoxData prepare(const ProcessSample& s, const BoxInf& box, const std::vector<Vec>& pts,
                double rho_max) {
    BoxData bd;
    for (const auto& l : s.lines) {
        double db = dist_set_line(box, l.line);
        if (db > rho_max) continue;
        bd.level.push_back(l.level);
        bd.dbox.push_back(db);
        std::vector<double> dp;
        dp.reserve(pts.size());
        for (const auto& x : pts) dp.push_back(dist_point_line(x, l.line));
        bd.dpts.push_back(std::move(dp));
    }
    return bd;
}

double evaluate(const MonotoneObservable& f, const BoxData& bd, std::size_t npts, double u,
                double rho) {
    if (f.kind == ObsKind::CountAtLeast) {
        int c = 0;
        for (std::size_t i = 0; i < bd.level.size(); ++i) c += bd.level[i] <= u && bd.dbox[i] <= rho;
        return c >= f.threshold ? 1.0 : 0.0;
    }
    std::size_t covered = 0;
    for (std::size_t p = 0; p < npts; ++p) {
        bool hit = false;
        for (std::size_t i = 0; i < bd.level.size() && !hit; ++i)
            hit = bd.level[i] <= u && bd.dpts[i][p] <= rho;
        covered += hit;
    }
    if (f.kind == ObsKind::AllVacant) return covered == 0 ? 1.0 : 0.0;
    return covered >= f.fraction * npts ? 1.0 : 0.0;
}

std::string verdict(double value, double bound, double sigma) {
    if (value - 3 * sigma > bound) return "violated";
    if (value + 3 * sigma <= bound) return "holds";
    return "inconclusive";
}

} // namespace

DecoupleReport estimate_decoupling(const TwoBoxGeometry& g, const DecoupleConfig& cfg) {
    if (cfg.f1.increasing() != cfg.f2.increasing())
        fail(ErrorCode::InvalidArgument, "observables must share a monotonicity direction");
    const bool inc = cfg.f1.increasing();
    require(cfg.u >= 0 && cfg.delta >= 0, "u and delta must be >= 0");
    if (!inc) {
        require(cfg.delta < cfg.u || cfg.u == 0, "decreasing branch needs delta < u");
        require(g.eps < g.rho, "decreasing branch needs eps < rho");
    }
    const int d = g.d;
    // (u, ρ) on the left; the sprinkled pair on the right
    const double rho = g.rho;
    const double rho_s = inc ? rho + g.eps : rho - g.eps;
    const double u1 = cfg.u;
    const double u2 = inc ? cfg.u + cfg.delta : std::max(0.0, cfg.u - cfg.delta);
    const double u_max = std::max(cfg.u, u2);
    const double rho_max = std::max(rho, rho_s);

    Vec mid = 0.5 * (g.B1.center + g.B2.center);
    double R = std::max(farthest_distance(g.B1, mid), farthest_distance(g.B2, mid)) + rho_max;
    auto pts1 = box_grid(g.B1, cfg.f1.grid);
    auto pts2 = box_grid(g.B2, cfg.f2.grid);
    const bool grid1 = cfg.f1.kind != ObsKind::CountAtLeast;
    const bool grid2 = cfg.f2.kind != ObsKind::CountAtLeast;
    const std::vector<Vec> none;

    struct Row {
        double a1, a2, a1s, b2, b2s;
        int viol;
    };
    std::vector<Row> rows(cfg.replicas);
    parallel_for(cfg.replicas, [&](std::size_t r) {
        Row& row = rows[r];
        row.viol = 0;
        if (u_max <= 0) {
            ProcessSample empty{d, BallWindow{mid, R}, 0.0, 0, {}};
            BoxData e;
            row.a1 = evaluate(cfg.f1, e, grid1 ? pts1.size() : 0, 0, rho);
            row.a2 = evaluate(cfg.f2, e, grid2 ? pts2.size() : 0, 0, rho);
            row.a1s = row.a1;
            row.b2 = row.a2;
            row.b2s = row.a2;
            return;
        }
        auto A = sample_hitting_ball(u_max, mid, R, derive_seed(cfg.seed, "decouple.A", r));
        auto B = sample_hitting_ball(u_max, mid, R, derive_seed(cfg.seed, "decouple.B", r));
        auto A1 = prepare(A, g.B1, grid1 ? pts1 : none, rho_max);
        auto A2 = prepare(A, g.B2, grid2 ? pts2 : none, rho_max);
        auto B2 = prepare(B, g.B2, grid2 ? pts2 : none, rho_max);
        std::size_t n1 = grid1 ? pts1.size() : 0, n2 = grid2 ? pts2.size() : 0;
        row.a1 = evaluate(cfg.f1, A1, n1, u1, rho);
        row.a2 = evaluate(cfg.f2, A2, n2, u1, rho);
        row.a1s = evaluate(cfg.f1, A1, n1, u1, rho_s);
        row.b2 = evaluate(cfg.f2, B2, n2, u1, rho);
        row.b2s = evaluate(cfg.f2, B2, n2, u2, rho_s);
        // pointwise coupling check: moving to the sprinkled pair never lowers the value,
        // for increasing (u+δ, ρ+ε) and decreasing (u−δ, ρ−ε) alike
        double a1_s = evaluate(cfg.f1, A1, n1, u2, rho_s);
        double a2_s = evaluate(cfg.f2, A2, n2, u2, rho_s);
        row.viol = (row.a1 > a1_s) + (row.a2 > a2_s);
    });

    DecoupleReport rep;
    rep.replicas = cfg.replicas;
    rep.err_c = cfg.err_c;
    MeanVar lhs, f1, f2b, rhs1, rhs2;
    for (const auto& row : rows) {
        lhs.add(row.a1 * row.a2);
        f1.add(row.a1);
        f2b.add(row.b2);
        rhs1.add(row.a1s);
        rhs2.add(row.b2s);
        rep.monotone_violations += row.viol;
        if (cfg.keep_values) rep.lhs_values.push_back(row.a1 * row.a2);
    }
    rep.lhs = {lhs.mean, lhs.sem()};
    rep.f1 = {f1.mean, f1.sem()};
    rep.f2 = {f2b.mean, f2b.sem()};
    rep.rhs1 = {rhs1.mean, rhs1.sem()};
    rep.rhs2 = {rhs2.mean, rhs2.sem()};
    auto prod = [](const Estimate& a, const Estimate& b) {
        return Estimate{a.value * b.value,
                        std::sqrt(b.value * b.value * a.sigma * a.sigma +
                                  a.value * a.value * b.sigma * b.sigma)};
    };
    rep.fkg = prod(rep.f1, rep.f2);
    rep.product = prod(rep.rhs1, rep.rhs2);
    double x = cfg.delta * std::pow(g.eps, d - 1) * std::pow(g.L, g.alpha * (d - 1));
    rep.err_term = std::exp(-cfg.err_c * x) / cfg.err_c;
    double sep = dist(g.B1.center, g.B2.center);
    rep.baseline = std::pow((g.L + 1) * (g.L + 1) / sep, d - 1);

    // FKG: fkg ≤ lhs, i.e. the gap fkg − lhs must not exceed 0 beyond noise
    double s_f = std::sqrt(rep.lhs.sigma * rep.lhs.sigma + rep.fkg.sigma * rep.fkg.sigma);
    rep.verdict_fkg = verdict(rep.fkg.value, rep.lhs.value, s_f);
    rep.fkg_ok = rep.verdict_fkg != "violated";
    double s_b = std::sqrt(rep.lhs.sigma * rep.lhs.sigma + rep.product.sigma * rep.product.sigma);
    rep.verdict_bound = verdict(rep.lhs.value, rep.product.value + rep.err_term, s_b);
    rep.bound_ok = rep.verdict_bound != "violated";
    return rep;
}

} // namespace cylperc
