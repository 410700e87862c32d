#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <queue>

#include "carpet.hpp"

namespace cylperc {

namespace {

// a·t ≤ b on [lo, hi]
void clip(long double a, long double b, long double& lo, long double& hi) {
    if (a > 0) hi = std::min(hi, b / a);
    else if (a < 0) lo = std::max(lo, b / a);
    else if (b < 0) hi = lo - 1;
}

double dist_point_segment(const Vec& p, const Vec& a, const Vec& b) {
    Vec ab = b - a;
    double t = std::clamp(dot(p - a, ab) / norm2(ab), 0.0, 1.0);
    return dist(p, a + t * ab);
}

} // namespace

std::vector<IVec> cone_boxes(Carpet& c, int k) {
    require(k >= 0 && k + 1 <= c.ladder().k_max(), "cone needs scale k+1 on the ladder");
    const int d = c.d();
    const std::int64_t Lk = c.L(k), LK = c.L(k + 1), h = (LK / Lk - 1) / 2;
    const Dir e1{0, 1};
    const IVec y = c.anchor({IVec(d), k + 1}, e1);
    const long double r = LK / 17, a0 = 2 * Lk, D = LK - a0;
    std::vector<IVec> out;
    std::vector<std::int64_t> j(d, -h);
    for (;;) {
        IVec x(d);
        for (int i = 0; i < d; ++i) x[i] = 2 * Lk * j[i];
        long double lo = 0, hi = 1;
        // apex + t·(face point − apex), first coordinate inside the box
        clip(D, x[0] + Lk - a0, lo, hi);
        clip(-D, -(x[0] - Lk - a0), lo, hi);
        for (int i = 1; i < d; ++i) {
            long double flo = y[i] - r, fhi = y[i] + r;
            clip(flo, x[i] + Lk, lo, hi);
            clip(-fhi, -(x[i] - Lk), lo, hi);
        }
        if (lo <= hi) out.push_back(x);
        int i = d - 1;
        while (i >= 0 && ++j[i] > h) j[i--] = -h;
        if (i < 0) break;
    }
    return out;
}

ConeFlow cone_flow(Carpet& c, int k) {
    const int d = c.d();
    const std::int64_t Lk = c.L(k);
    ConeFlow cf;
    cf.k = k;
    cf.boxes = cone_boxes(c, k);
    const auto dirs = all_dirs(d);

    // dual graph: vertices are face centres, edges join faces of a common box
    std::map<IVec, int> face_id;
    std::vector<IVec> faces;
    std::vector<std::vector<std::pair<int, int>>> owners; // (box, dir index)
    for (std::size_t b = 0; b < cf.boxes.size(); ++b)
        for (std::size_t di = 0; di < dirs.size(); ++di) {
            IVec f = cf.boxes[b] + dirs[di].vec(d, Lk);
            auto [it, fresh] = face_id.emplace(f, int(faces.size()));
            if (fresh) {
                faces.push_back(f);
                owners.emplace_back();
            }
            owners[it->second].push_back({int(b), int(di)});
        }
    // face_id iterates sorted, so renumber to lexicographic order
    {
        std::vector<int> perm(faces.size());
        int n = 0;
        for (auto& [f, id] : face_id) perm[id] = n++;
        std::vector<IVec> f2(faces.size());
        std::vector<std::vector<std::pair<int, int>>> o2(faces.size());
        for (std::size_t i = 0; i < faces.size(); ++i) {
            f2[perm[i]] = faces[i];
            o2[perm[i]] = owners[i];
        }
        faces.swap(f2);
        owners.swap(o2);
        for (auto& [f, id] : face_id) id = perm[id];
    }
    const int nf = int(faces.size());
    std::vector<std::vector<int>> adj(nf);
    for (int f = 0; f < nf; ++f) {
        for (auto [b, di] : owners[f])
            for (std::size_t dj = 0; dj < dirs.size(); ++dj)
                if (int(dj) != di) adj[f].push_back(face_id.at(cf.boxes[b] + dirs[dj].vec(d, Lk)));
        std::sort(adj[f].begin(), adj[f].end());
        adj[f].erase(std::unique(adj[f].begin(), adj[f].end()), adj[f].end());
    }

    cf.source = IVec::unit(d, 0, Lk);
    auto src_it = face_id.find(cf.source);
    if (src_it == face_id.end()) fail(ErrorCode::Internal, "cone misses its source face");
    const int src = src_it->second;
    const Dir e1{0, 1};
    cf.basis = c.small_face({IVec(d), k + 1}, e1, c.anchor({IVec(d), k + 1}, e1));
    const double w = 1.0 / double(cf.basis.size());

    std::map<std::tuple<int, int, int>, double> flow; // (box, v, w) with v < w
    const Vec s = to_vec(cf.source);
    for (const auto& Z : cf.basis) {
        auto zt = face_id.find(Z);
        if (zt == face_id.end()) fail(ErrorCode::Internal, "basis face " + to_string(Z) + " outside cone");
        const int z = zt->second;
        const Vec zv = to_vec(Z);
        std::vector<double> cost(nf);
        for (int f = 0; f < nf; ++f) cost[f] = dist_point_segment(to_vec(faces[f]), s, zv);

        // minimise the largest distance to the segment along the path
        std::vector<double> best(nf, INFINITY);
        using QE = std::pair<double, int>;
        std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
        best[src] = cost[src];
        pq.push({best[src], src});
        while (!pq.empty()) {
            auto [bv, f] = pq.top();
            pq.pop();
            if (bv > best[f]) continue;
            if (f == z) break;
            for (int g : adj[f]) {
                double nv = std::max(bv, cost[g]);
                if (nv < best[g]) {
                    best[g] = nv;
                    pq.push({nv, g});
                }
            }
        }
        const double bstar = best[z];
        cf.bottleneck = std::max(cf.bottleneck, bstar);
        const double cap = bstar + 1e-9 * (1 + bstar);

        std::vector<int> parent(nf, -2);
        std::deque<int> queue{src};
        parent[src] = -1;
        while (!queue.empty() && parent[z] == -2) {
            int f = queue.front();
            queue.pop_front();
            for (int g : adj[f])
                if (parent[g] == -2 && cost[g] <= cap) {
                    parent[g] = f;
                    queue.push_back(g);
                }
        }
        if (parent[z] == -2) fail(ErrorCode::Internal, "cone path lost after bottleneck search");
        for (int g = z; parent[g] >= 0; g = parent[g]) {
            int f = parent[g];
            int box = -1, df = -1, dg = -1;
            for (auto [b, di] : owners[f])
                for (auto [b2, dj] : owners[g])
                    if (b == b2) box = b, df = di, dg = dj;
            if (df < dg) flow[{box, df, dg}] += w;
            else flow[{box, dg, df}] -= w;
        }
    }

    for (auto& [key, val] : flow) {
        if (val == 0) continue;
        auto [b, di, dj] = key;
        ConeEdge e{cf.boxes[b], dirs[di], dirs[dj], val};
        if (val < 0) std::swap(e.v, e.w), e.value = -val;
        cf.max_abs = std::max(cf.max_abs, e.value);
        cf.edges.push_back(e);
    }

    // conservation on face vertices
    std::vector<double> div(nf, 0);
    for (const auto& e : cf.edges) {
        div[face_id.at(e.box + e.v.vec(d, Lk))] += e.value;
        div[face_id.at(e.box + e.w.vec(d, Lk))] -= e.value;
    }
    div[src] -= 1;
    for (const auto& Z : cf.basis) div[face_id.at(Z)] += w;
    for (double x : div) cf.div_error = std::max(cf.div_error, std::fabs(x));

    std::map<std::int64_t, double> layer;
    for (const auto& x : cf.boxes) layer[x[0] / (2 * Lk)] = 0;
    for (const auto& e : cf.edges) {
        double& m = layer[e.box[0] / (2 * Lk)];
        m = std::max(m, e.value);
    }
    for (auto [j, m] : layer) {
        if (j <= 0) continue;
        double env = std::min(std::pow(1.0 / double(2 * j), d - 1), 1.0);
        cf.depth_profile.push_back({m, env});
    }
    return cf;
}

} // namespace cylperc
