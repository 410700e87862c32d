// Vacant graphs, simple random walks, effective resistance and Thomson checks.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lattice.hpp"
#include "lineproc.hpp"
#include "stats.hpp"

namespace cylperc {

// undirected graph in CSR form
struct Graph {
    std::vector<std::size_t> offset{0};
    std::vector<int> adj;

    std::size_t n() const { return offset.size() - 1; }
    std::size_t edges() const { return adj.size() / 2; }
    int degree(int v) const { return int(offset[v + 1] - offset[v]); }
    const int* begin(int v) const { return adj.data() + offset[v]; }
    const int* end(int v) const { return adj.data() + offset[v + 1]; }
    static Graph from_edges(std::size_t n, const std::vector<std::pair<int, int>>& edges);
};

struct LatticeGraph {
    int d = 3;
    std::vector<IVec> pos;
    absl::flat_hash_map<IVec, int> id;
    Graph g;
    int find(const IVec& x) const; // −1 when absent
};

// vertices and edges touched by a flow
LatticeGraph support_graph(const LatticeFlow& f);

struct VacantGraph : LatticeGraph {
    std::int64_t R = 0;
    double u = 0, rho = 1;
    std::vector<int> component;
    // (x, axis) for each edge x — x+e_axis, sorted
    std::vector<std::pair<IVec, int>> edge_list() const;
};

// vertices: uncovered points of B∞(0,R); edges: unit segments avoiding every cylinder
VacantGraph build_vacant_graph(const ProcessSample& s, double u, double rho, std::int64_t R,
                               bool brute_force = false);

struct EscapeReport {
    std::uint64_t walks = 0, escapes = 0;
    double estimate = 0;
    Interval ci;
};
// SRW from start hits |y|∞ ≥ R_out before returning to start
EscapeReport escape_probability(const VacantGraph& g, const IVec& start, std::int64_t R_out,
                                std::uint64_t walks, std::uint64_t seed, double z = 3.0);

struct ResistanceReport {
    int source = -1;
    std::size_t boundary = 0; // boundary vertices in the source's component
    double r_eff = 0;
    double residual = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> potential; // φ per vertex, 0 outside the component
};
// unit current into source, boundary grounded; NoConnection when unreachable
ResistanceReport effective_resistance(const Graph& g, int source, const std::vector<int>& boundary,
                                      double tol = 1e-10, int max_iter = 100000);
std::vector<int> box_boundary(const LatticeGraph& g, std::int64_t R_out);

// θ(x → y) = φ(x) − φ(y) on the lattice edges of g
LatticeFlow harmonic_flow(const LatticeGraph& g, const ResistanceReport& r);

struct ThomsonReport {
    double energy = 0, r_eff = 0, slack = 0;
    bool ok = false;
};
// θ a unit flow from source into the boundary set, supported on g
ThomsonReport thomson_check(const LatticeFlow& theta, const LatticeGraph& g, const IVec& source,
                            const std::vector<int>& boundary, double tol = 1e-6);

} // namespace cylperc
