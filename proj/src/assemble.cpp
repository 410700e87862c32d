#include <algorithm>
#include <cmath>
#include <map>

#include "carpet.hpp"

namespace cylperc {

struct SampleWorld::Impl {
    ScaleLadder lad;
    int K;
    ProcessSample local; // lines that can matter for the region, up to level u_K
    Vec lo, hi;
    LineIndex index;
    mutable std::map<IVec, Vacancy> vac;
    mutable std::map<std::pair<int, IVec>, bool> bad0; // (level, centre)
    mutable std::map<IVec, bool> goodk;
    mutable std::map<IVec, std::optional<Defect>> defects;

    static double rho_max(const ScaleLadder& lad, int K) { return std::max(lad.rho[0] + 1, lad.rho[K]); }
    static double reach(const ScaleLadder& lad, int K) {
        return rho_max(lad, K) + double(lad.L[0] + 1) * std::sqrt(double(lad.d));
    }

    Impl(const ScaleLadder& l, int k, ProcessSample&& loc, Vec lo_, Vec hi_)
        : lad(l), K(k), local(std::move(loc)), lo(lo_), hi(hi_),
          index(lines_of(local), lo_, hi_, 6.0 * double(l.L[0]), reach(l, k)) {}

    static std::vector<Line> lines_of(const ProcessSample& s) {
        std::vector<Line> out;
        for (const auto& l : s.lines) out.push_back(l.line);
        return out;
    }

    void check_inside(const IVec& x, std::int64_t r) const {
        for (int i = 0; i < lad.d; ++i)
            if (double(x[i] - r) < lo[i] || double(x[i] + r) > hi[i])
                fail(ErrorCode::WindowUndercoverage, "box " + to_string(x) + " outside the sampled region");
    }

    static IVec center0(const IVec& y, std::int64_t L0) {
        IVec c(y.d);
        for (int i = 0; i < y.d; ++i) {
            std::int64_t t = y[i] + L0;
            std::int64_t q = t >= 0 ? t / (2 * L0) : -((-t + 2 * L0 - 1) / (2 * L0));
            c[i] = 2 * L0 * q;
        }
        return c;
    }

    const Vacancy& vacancy(const IVec& c) const {
        auto it = vac.find(c);
        if (it != vac.end()) return it->second;
        const std::int64_t L0 = lad.L[0];
        check_inside(c, L0 + 1);
        ProcessSample sub = local;
        sub.lines.clear();
        for (int li : index.near(to_vec(c)))
            if (local.lines[li].level <= lad.u[0]) sub.lines.push_back(local.lines[li]);
        return vac.emplace(c, Vacancy(sub, lad.u[0], lad.rho[0], c, L0)).first->second;
    }

    // scale-0 verdict at level j
    bool is_bad0(const IVec& x, int j) const {
        auto key = std::make_pair(j, x);
        auto it = bad0.find(key);
        if (it != bad0.end()) return it->second;
        const std::int64_t L0 = lad.L[0];
        check_inside(x, L0);
        const BoxInf b = box_of(x, L0);
        int n = 0;
        for (int li : index.near(to_vec(x))) {
            const auto& l = local.lines[li];
            if (l.level <= lad.u[j] && dist_set_line(b, l.line) <= lad.rho[j]) ++n;
        }
        return bad0[key] = n > std::pow(double(L0), lad.gamma);
    }

    std::vector<IVec> bad_subs(const IVec& x) const {
        const int d = lad.d;
        const std::int64_t L0 = lad.L[0], h = (lad.L[1] / L0 - 1) / 2;
        std::vector<IVec> out;
        // a sub-box never meets more lines than its parent
        const BoxInf whole = box_of(x, lad.L[1]);
        int n = 0;
        for (const auto& l : local.lines)
            if (l.level <= lad.u[1] && dist_set_line(whole, l.line) <= lad.rho[1]) ++n;
        if (n <= std::pow(double(L0), lad.gamma)) return out;
        std::vector<std::int64_t> j(d, -h);
        for (;;) {
            IVec c = x;
            for (int i = 0; i < d; ++i) c[i] += 2 * L0 * j[i];
            if (is_bad0(c, 1)) out.push_back(c);
            int i = d - 1;
            while (i >= 0 && ++j[i] > h) j[i--] = -h;
            if (i < 0) break;
        }
        return out;
    }
};

SampleWorld::SampleWorld(const ProcessSample& s, const ScaleLadder& lad, int K) {
    require(K == 1, "sample-backed worlds are implemented for K = 1");
    require(K <= lad.k_max(), "K beyond the ladder");
    const int d = lad.d;
    const std::int64_t LK = lad.L[K];
    Vec lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
        lo[i] = double(-LK - 1);
        hi[i] = double(i == 0 ? 3 * LK + 1 : LK + 1);
    }
    Vec c(d);
    c[0] = double(LK);
    const BoxInf hull{c, double(2 * LK + 1)};
    const double rmax = Impl::rho_max(lad, K), umax = lad.u[K];
    check_coverage(make_view(s, umax, rmax), hull);
    ProcessSample loc = s;
    loc.lines.clear();
    for (const auto& l : s.lines)
        if (l.level <= umax && dist_set_line(hull, l.line) <= Impl::reach(lad, K)) loc.lines.push_back(l);
    p_ = std::make_unique<Impl>(lad, K, std::move(loc), lo, hi);
}

SampleWorld::~SampleWorld() = default;

std::size_t SampleWorld::lines() const { return p_->local.lines.size(); }

bool SampleWorld::open(const IVec& y) const {
    return p_->vacancy(Impl::center0(y, p_->lad.L[0])).is_open(y);
}

std::vector<IVec> SampleWorld::hole0(const IVec& x) const {
    return cylperc::hole0(p_->vacancy(x), x, p_->lad.L[0]);
}

bool SampleWorld::good(const IVec& x, int k) const {
    if (k == 0) return !p_->is_bad0(x, 0);
    require(k == 1, "verdicts above K = 1 are not sampled");
    auto it = p_->goodk.find(x);
    if (it != p_->goodk.end()) return it->second;
    return p_->goodk[x] = !classify_k(p_->bad_subs(x), p_->lad, 1).bad;
}

std::optional<Defect> SampleWorld::defect(const IVec& x, int k) const {
    require(k == 1, "defects above K = 1 are not sampled");
    auto it = p_->defects.find(x);
    if (it != p_->defects.end()) return it->second;
    auto bad = p_->bad_subs(x);
    std::optional<Defect> out;
    if (!bad.empty()) out = find_covering_line(bad, x, p_->lad, 1).defect;
    return p_->defects[x] = out;
}

namespace {

// first failing Ā_k condition, or empty
std::string check_abar(Carpet& c, int k_max) {
    const World& w = c.world();
    if (w.clean()) return {};
    const int d = c.d();
    if (!w.hole0(IVec(d)).empty()) return "A_0 fails: box (0,0) contains closed sites";
    for (int k = 1; k <= k_max; ++k) {
        const std::int64_t Lp = c.L(k - 1), h = (c.L(k) / Lp - 1) / 2;
        std::vector<std::int64_t> j(d, -h);
        for (;;) {
            IVec x(d);
            for (int i = 0; i < d; ++i) x[i] = 2 * Lp * j[i];
            if (!w.good(x, k - 1))
                return "A_" + std::to_string(k) + " fails: " + std::to_string(k - 1) + "-box " +
                       to_string(x) + " is bad";
            int i = d - 1;
            while (i >= 0 && ++j[i] > h) j[i--] = -h;
            if (i < 0) break;
        }
    }
    return {};
}

struct DivTally {
    std::map<IVec, double> faces;
    double interior = 0;
    // split a local divergence: face points of the box are kept, the rest must vanish
    void absorb(const absl::flat_hash_map<IVec, double>& div, const IVec& box, std::int64_t L,
                const IVec& keep) {
        for (const auto& [y, v] : div) {
            IVec rel = y - box;
            if (linf(rel) >= L || y == keep) faces[y] += v;
            else interior = std::max(interior, std::fabs(v));
        }
    }
};

int dir_slot(Dir v) { return 2 * v.axis + (v.sign > 0 ? 0 : 1); }

} // namespace

AssembleReport assemble_flow(Carpet& c, const AssembleConfig& cfg) {
    AssembleReport rep;
    rep.k_max = cfg.k_max;
    rep.J = cfg.J;
    require(cfg.k_max >= 1 && cfg.k_max <= c.ladder().k_max(), "k_max outside the ladder");
    const int d = c.d();
    const IVec origin(d);
    const Dir e1{0, 1};

    rep.failure = check_abar(c, cfg.k_max);
    if (!rep.failure.empty()) return rep;

    try {
        rep.sink = c.fractal({origin, cfg.k_max}, e1);
        LatticeFlow global(d);
        DivTally tally;

        // origin to the 0-fractal on the e₁ face of (0,0)
        {
            const auto& f0 = c.fractal({origin, 0}, e1);
            LatticeFlow local(d);
            for (const auto& p : f0) {
                auto path = c.path0({origin, 0}, origin, p);
                if (path.empty()) fail(ErrorCode::NoPath, "origin does not reach " + to_string(p));
                local.add_path(path, 1.0 / double(f0.size()));
            }
            rep.origin_energy = local.energy();
            tally.absorb(local.divergence(), origin, c.L(0), origin);
            if (cfg.materialize) global.merge(local);
        }

        const bool gram = c.world().clean() && !cfg.materialize;
        for (int k = 0; k < cfg.k_max; ++k) {
            ConeFlow cone = cone_flow(c, k);
            LedgerRow row;
            row.k = k;
            row.box_flows = cone.edges.size();
            std::map<IVec, std::vector<const ConeEdge*>> by_box;
            for (const auto& e : cone.edges) by_box[e.box].push_back(&e);
            row.boxes = by_box.size();

            if (gram) {
                // exact energies of translated templates via their Gram matrix
                std::map<std::pair<int, int>, const LatticeFlow*> tpl;
                for (const auto& e : cone.edges)
                    tpl[{dir_slot(e.v), dir_slot(e.w)}] = &c.box_template(k, e.v, e.w);
                std::map<std::pair<std::pair<int, int>, std::pair<int, int>>, double> G;
                for (auto& [a, ta] : tpl)
                    for (auto& [b, tb] : tpl) {
                        if (b < a) continue;
                        double s = 0;
                        ta->for_each([&](const IVec& y, int axis, double v) {
                            s += v * tb->value(y, y + IVec::unit(d, axis));
                        });
                        G[{a, b}] = G[{b, a}] = s;
                    }
                std::map<std::pair<int, int>, absl::flat_hash_map<IVec, double>> tdiv;
                for (auto& [a, t] : tpl) tdiv[a] = t->divergence();
                for (const auto& [box, es] : by_box) {
                    for (const ConeEdge* x : es)
                        for (const ConeEdge* y : es)
                            row.energy += x->value * y->value *
                                          G.at({{dir_slot(x->v), dir_slot(x->w)},
                                                {dir_slot(y->v), dir_slot(y->w)}});
                    absl::flat_hash_map<IVec, double> div;
                    for (const ConeEdge* x : es)
                        for (const auto& [y, v] : tdiv.at({dir_slot(x->v), dir_slot(x->w)}))
                            div[y + box] += x->value * v;
                    tally.absorb(div, box, c.L(k), origin);
                }
            } else {
                for (const auto& [box, es] : by_box) {
                    LatticeFlow local(d);
                    for (const ConeEdge* e : es) c.add_flow_box(local, {box, k}, e->v, e->w, e->value);
                    row.energy += local.energy();
                    tally.absorb(local.divergence(), box, c.L(k), origin);
                    if (cfg.materialize) global.merge(local);
                }
            }
            row.scaled = row.energy * std::pow(double(c.L(k)), 2 * cfg.J);
            rep.ledger.push_back(row);
            rep.cones.push_back(std::move(cone));
        }

        // expected: +1 at the origin, −1/|sink| on the sink
        tally.faces[origin] -= 1;
        for (const auto& s : rep.sink) tally.faces[s] += 1.0 / double(rep.sink.size());
        rep.div_error = tally.interior;
        for (const auto& [y, v] : tally.faces) rep.div_error = std::max(rep.div_error, std::fabs(v));

        rep.total_energy = rep.origin_energy;
        for (const auto& r : rep.ledger) rep.total_energy += r.energy;
        if (rep.ledger.size() >= 2 && rep.ledger[0].scaled > 0)
            rep.ratio = rep.ledger[1].scaled / rep.ledger[0].scaled;
        if (cfg.materialize) {
            global.for_each([&](const IVec& y, int axis, double v) {
                IVec z = y + IVec::unit(d, axis);
                rep.antisym_error = std::max(rep.antisym_error, std::fabs(global.value(z, y) + v));
            });
            rep.edges = global.edges();
            rep.flow = std::move(global);
        }
        rep.ok = true;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoPath && e.code() != ErrorCode::FlowNotFeasible) throw;
        rep.failure = e.what();
    }
    return rep;
}

} // namespace cylperc
