// Windowed samples of the Poisson line process with levels, and cylinder views.
#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "geometry.hpp"
#include "rng.hpp"

namespace cylperc {

struct BallWindow {
    Vec center;
    double R;
};

// rectangle lo ≤ x ≤ hi in the first d−1 coordinates of Π_h
struct PlaneWindow {
    double h;
    Vec lo, hi;
};

using Window = std::variant<BallWindow, PlaneWindow>;

struct LabeledLine {
    Line line;
    double level;
};

struct ProcessSample {
    int d = 3;
    Window window;
    double u_max = 0.0;
    std::uint64_t seed = 0;
    std::vector<LabeledLine> lines;

    ProcessSample restrict_to(double u) const;
};

// ∫_𝔻⟨w,e_d⟩dσ / σ(𝔻): intensity factor of the hyperplane parametrization
double c_mu(int d);
// μ-mass of the lines the window sampler produces
double window_mass(const Window& w, int d);

Vec sample_sphere(Rng& rng, int d);
// density ∝ ⟨w,e_d⟩ on the upper hemisphere
Vec sample_chi(Rng& rng, int d);
// unit vector uniform on the sphere of v^⊥
Vec sample_orthogonal(Rng& rng, const Vec& v);

ProcessSample sample_hitting_ball(double u_max, const Vec& center, double R, std::uint64_t seed);
ProcessSample sample_hyperplane_window(double u_max, double h, const Vec& lo, const Vec& hi,
                                       std::uint64_t seed);
ProcessSample top_up(const ProcessSample& s, double delta, std::uint64_t seed);

// smallest ball window answering queries about A at radius rho
BallWindow window_for(const ConvexSet& A, double rho);

struct CylinderView {
    const ProcessSample* sample;
    double u;
    double rho;
};

CylinderView make_view(const ProcessSample& s, double u, double rho);
void check_coverage(const CylinderView& v, const ConvexSet& A);
int count_hitting(const CylinderView& v, const ConvexSet& A);
bool is_covered(const CylinderView& v, const Vec& x);

// Uniform grid over an axis-aligned region; each cell lists the lines that come
// within `reach` of some point of the cell. Pure pruning: callers still run the
// exact predicate on every candidate.
class LineIndex {
public:
    LineIndex(const std::vector<Line>& lines, const Vec& lo, const Vec& hi, double cell,
              double reach);
    const std::vector<int>& near(const Vec& x) const;
    const std::vector<Line>& lines() const { return lines_; }

private:
    std::vector<Line> lines_;
    Vec lo_;
    double cell_;
    std::array<int, kMaxDim> n_{};
    std::vector<std::vector<int>> cells_;
    long cell_index(const std::array<int, kMaxDim>& idx) const;
};

std::string window_string(const Window& w);
std::string to_csv(const ProcessSample& s);
ProcessSample from_csv(const std::string& text);

} // namespace cylperc
