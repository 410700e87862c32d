#include "vacantwalk.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include "parallel.hpp"
#include "rng.hpp"

namespace cylperc {

Graph Graph::from_edges(std::size_t n, const std::vector<std::pair<int, int>>& edges) {
    Graph g;
    std::vector<std::size_t> deg(n, 0);
    for (auto [a, b] : edges) {
        require(a >= 0 && b >= 0 && std::size_t(a) < n && std::size_t(b) < n && a != b,
                "edge endpoint out of range");
        ++deg[a];
        ++deg[b];
    }
    g.offset.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) g.offset[i + 1] = g.offset[i] + deg[i];
    g.adj.assign(g.offset[n], 0);
    std::vector<std::size_t> fill(g.offset.begin(), g.offset.end() - 1);
    for (auto [a, b] : edges) {
        g.adj[fill[a]++] = b;
        g.adj[fill[b]++] = a;
    }
    for (std::size_t i = 0; i < n; ++i) std::sort(g.adj.begin() + g.offset[i], g.adj.begin() + g.offset[i + 1]);
    return g;
}

int LatticeGraph::find(const IVec& x) const {
    auto it = id.find(x);
    return it == id.end() ? -1 : it->second;
}

LatticeGraph support_graph(const LatticeFlow& f) {
    LatticeGraph lg;
    lg.d = f.dim();
    std::vector<std::pair<IVec, int>> es;
    for (const auto& [key, v] : f.sorted())
        if (v != 0) es.push_back(key);
    std::vector<IVec> pts;
    for (const auto& [x, a] : es) {
        pts.push_back(x);
        pts.push_back(x + IVec::unit(lg.d, a));
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    lg.pos = pts;
    for (std::size_t i = 0; i < pts.size(); ++i) lg.id[pts[i]] = int(i);
    std::vector<std::pair<int, int>> edges;
    for (const auto& [x, a] : es) edges.push_back({lg.id[x], lg.id[x + IVec::unit(lg.d, a)]});
    lg.g = Graph::from_edges(pts.size(), edges);
    return lg;
}

std::vector<std::pair<IVec, int>> VacantGraph::edge_list() const {
    std::vector<std::pair<IVec, int>> out;
    for (std::size_t v = 0; v < g.n(); ++v)
        for (const int* w = g.begin(int(v)); w != g.end(int(v)); ++w) {
            IVec diff = pos[*w] - pos[v];
            for (int a = 0; a < d; ++a)
                if (diff[a] == 1) out.push_back({pos[v], a});
        }
    std::sort(out.begin(), out.end());
    return out;
}

VacantGraph build_vacant_graph(const ProcessSample& s, double u, double rho, std::int64_t R,
                               bool brute_force) {
    require(R >= 1, "R must be positive");
    require(u >= 0 && u <= s.u_max, "u outside the sampled range");
    const int d = s.d;
    VacantGraph vg;
    vg.d = d;
    vg.R = R;
    vg.u = u;
    vg.rho = rho;
    check_coverage(make_view(s, u, rho), BoxInf{Vec(d), double(R)});

    std::vector<Line> lines;
    for (const auto& l : s.lines)
        if (l.level <= u) lines.push_back(l.line);
    Vec lo(d), hi(d);
    for (int i = 0; i < d; ++i) lo[i] = -double(R) - 0.5, hi[i] = double(R) + 0.5;
    std::optional<LineIndex> index;
    std::vector<int> all(lines.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = int(i);
    if (!brute_force) index.emplace(lines, lo, hi, 4.0, rho + 1.0);
    auto candidates = [&](const Vec& x) -> const std::vector<int>& {
        return brute_force ? all : index->near(x);
    };

    const std::int64_t side = 2 * R + 1;
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= std::size_t(side);
    auto point = [&](std::size_t t) {
        IVec y(d);
        for (int i = d - 1; i >= 0; --i) {
            y[i] = std::int64_t(t % side) - R;
            t /= side;
        }
        return y;
    };
    std::vector<std::uint8_t> covered(total, 0);
    parallel_for(total, [&](std::size_t t) {
        Vec y = to_vec(point(t));
        for (int li : candidates(y))
            if (dist_point_line(y, lines[li]) <= rho) {
                covered[t] = 1;
                break;
            }
    });
    std::vector<int> id(total, -1);
    for (std::size_t t = 0; t < total; ++t)
        if (!covered[t]) {
            id[t] = int(vg.pos.size());
            vg.pos.push_back(point(t));
        }
    // per-vertex forward edges, merged in vertex order
    std::vector<std::vector<std::pair<int, int>>> fwd(vg.pos.size());
    parallel_for(vg.pos.size(), [&](std::size_t v) {
        const IVec& x = vg.pos[v];
        const Vec xv = to_vec(x);
        const auto& cand = candidates(xv);
        for (int a = d - 1; a >= 0; --a) {
            if (x[a] < R) {
                IVec y = x + IVec::unit(d, a);
                std::size_t t = 0;
                for (int i = 0; i < d; ++i) t = t * side + std::size_t(y[i] + R);
                if (id[t] >= 0) {
                    Vec yv = to_vec(y);
                    bool hit = false;
                    for (int li : cand)
                        if (segment_hits_cylinder(xv, yv, Cylinder{lines[li], rho})) {
                            hit = true;
                            break;
                        }
                    if (!hit) fwd[v].push_back({int(v), id[t]});
                }
            }
        }
    });
    std::vector<std::pair<int, int>> edges;
    for (auto& f : fwd) edges.insert(edges.end(), f.begin(), f.end());
    vg.g = Graph::from_edges(vg.pos.size(), edges);
    for (std::size_t i = 0; i < vg.pos.size(); ++i) vg.id[vg.pos[i]] = int(i);

    vg.component.assign(vg.pos.size(), -1);
    int label = 0;
    for (std::size_t s0 = 0; s0 < vg.pos.size(); ++s0) {
        if (vg.component[s0] >= 0) continue;
        std::deque<int> q{int(s0)};
        vg.component[s0] = label;
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            for (const int* w = vg.g.begin(v); w != vg.g.end(v); ++w)
                if (vg.component[*w] < 0) {
                    vg.component[*w] = label;
                    q.push_back(*w);
                }
        }
        ++label;
    }
    return vg;
}

EscapeReport escape_probability(const VacantGraph& g, const IVec& start, std::int64_t R_out,
                                std::uint64_t walks, std::uint64_t seed, double z) {
    require(R_out >= 1 && R_out <= g.R, "R_out must lie in [1, R]");
    const int s = g.find(start);
    if (s < 0) fail(ErrorCode::StartCovered, "start " + to_string(start) + " is not a vacant vertex");
    EscapeReport rep;
    rep.walks = walks;
    if (linf(start) >= R_out) {
        rep.escapes = walks;
    } else if (g.g.degree(s) > 0) {
        std::vector<std::uint8_t> hit(walks, 0);
        parallel_for(walks, [&](std::size_t i) {
            Rng rng = Rng::stream(seed, "walk", i);
            int v = s;
            for (;;) {
                v = g.g.begin(v)[rng.below(std::uint64_t(g.g.degree(v)))];
                if (v == s) return;
                if (linf(g.pos[v]) >= R_out) {
                    hit[i] = 1;
                    return;
                }
            }
        });
        for (auto h : hit) rep.escapes += h;
    }
    rep.estimate = walks ? double(rep.escapes) / double(walks) : 0.0;
    rep.ci = wilson(rep.escapes, walks, z);
    return rep;
}

std::vector<int> box_boundary(const LatticeGraph& g, std::int64_t R_out) {
    std::vector<int> out;
    for (std::size_t i = 0; i < g.pos.size(); ++i)
        if (linf(g.pos[i]) >= R_out) out.push_back(int(i));
    return out;
}

ResistanceReport effective_resistance(const Graph& g, int source, const std::vector<int>& boundary,
                                      double tol, int max_iter) {
    require(source >= 0 && std::size_t(source) < g.n(), "source out of range");
    ResistanceReport rep;
    rep.source = source;
    rep.potential.assign(g.n(), 0.0);
    std::vector<std::uint8_t> ground(g.n(), 0);
    for (int b : boundary) {
        require(b >= 0 && std::size_t(b) < g.n(), "boundary vertex out of range");
        ground[b] = 1;
    }
    if (ground[source]) {
        rep.converged = true;
        rep.boundary = 1;
        return rep;
    }
    // free vertices of the source's component
    std::vector<int> local(g.n(), -1), order;
    std::deque<int> q{source};
    local[source] = 0;
    order.push_back(source);
    std::vector<std::uint8_t> seen(g.n(), 0);
    seen[source] = 1;
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        for (const int* w = g.begin(v); w != g.end(v); ++w) {
            if (seen[*w]) continue;
            seen[*w] = 1;
            if (ground[*w]) {
                ++rep.boundary;
                continue;
            }
            local[*w] = int(order.size());
            order.push_back(*w);
            q.push_back(*w);
        }
    }
    if (rep.boundary == 0) fail(ErrorCode::NoConnection, "source cannot reach the boundary set");

    const int n = int(order.size());
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < n; ++i) {
        int v = order[i];
        trip.emplace_back(i, i, double(g.degree(v)));
        for (const int* w = g.begin(v); w != g.end(v); ++w)
            if (local[*w] >= 0) trip.emplace_back(i, local[*w], -1.0);
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b[0] = 1.0;
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(tol);
    cg.setMaxIterations(max_iter);
    cg.compute(A);
    Eigen::VectorXd phi = cg.solve(b);
    rep.iterations = int(cg.iterations());
    rep.residual = (A * phi - b).norm();
    rep.converged = cg.info() == Eigen::Success && rep.residual <= tol;
    for (int i = 0; i < n; ++i) rep.potential[order[i]] = phi[i];
    rep.r_eff = phi[0];
    return rep;
}

LatticeFlow harmonic_flow(const LatticeGraph& g, const ResistanceReport& r) {
    LatticeFlow f(g.d);
    for (std::size_t v = 0; v < g.g.n(); ++v)
        for (const int* w = g.g.begin(int(v)); w != g.g.end(int(v)); ++w)
            if (std::size_t(*w) > v) {
                double val = r.potential[v] - r.potential[*w];
                if (val != 0) f.add(g.pos[v], g.pos[*w], val);
            }
    return f;
}

ThomsonReport thomson_check(const LatticeFlow& theta, const LatticeGraph& g, const IVec& source,
                            const std::vector<int>& boundary, double tol) {
    const int s = g.find(source);
    if (s < 0) fail(ErrorCode::FlowNotFeasible, "flow source is not a graph vertex");
    std::vector<std::uint8_t> sink(g.g.n(), 0);
    for (int b : boundary) sink[b] = 1;
    theta.for_each([&](const IVec& x, int a, double v) {
        if (v == 0) return;
        int i = g.find(x), j = g.find(x + IVec::unit(g.d, a));
        if (i < 0 || j < 0 || !std::binary_search(g.g.begin(i), g.g.end(i), j))
            fail(ErrorCode::FlowNotFeasible, "flow uses edge " + to_string(x) + " +e" +
                                                 std::to_string(a + 1) + " outside the graph");
    });
    double total = 0;
    for (const auto& [y, v] : theta.divergence()) {
        int i = g.find(y);
        if (i == s) {
            if (std::fabs(v - 1) > tol) fail(ErrorCode::FlowNotFeasible, "flow is not a unit flow");
        } else if (sink[i]) {
            total += v;
        } else if (std::fabs(v) > tol) {
            fail(ErrorCode::FlowNotFeasible, "flow has divergence at " + to_string(y));
        }
    }
    if (std::fabs(total + 1) > tol) fail(ErrorCode::FlowNotFeasible, "sink does not absorb the unit");
    ThomsonReport rep;
    rep.energy = theta.energy();
    rep.r_eff = effective_resistance(g.g, s, boundary).r_eff;
    rep.slack = rep.energy - rep.r_eff;
    rep.ok = rep.slack >= -tol;
    return rep;
}

} // namespace cylperc
