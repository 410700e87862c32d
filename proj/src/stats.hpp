// Small statistics toolbox for the Monte Carlo verdicts.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace cylperc {

struct MeanVar {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    void add(double x) {
        ++n;
        double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    double var() const { return n > 1 ? m2 / (n - 1) : 0.0; }
    double sem() const { return n > 0 ? std::sqrt(var() / n) : 0.0; }
};

struct Interval {
    double lo = 0.0, hi = 0.0;
    bool contains(double x) const { return lo <= x && x <= hi; }
};

Interval wilson(std::uint64_t successes, std::uint64_t trials, double z = 3.0);

// upper tail of the chi-square distribution
double chi2_sf(double x, double dof);

struct ChiSquare {
    double stat = 0.0;
    double dof = 0.0;
    double p = 1.0;
};

// goodness of fit, bins with expected < min_expected are pooled into one
ChiSquare chi2_gof(const std::vector<double>& observed, const std::vector<double>& expected,
                   double min_expected = 5.0);
// homogeneity of two histograms over the same bins
ChiSquare chi2_two_sample(const std::vector<double>& a, const std::vector<double>& b,
                          double min_expected = 5.0);
// independence in an r×c table (row-major)
ChiSquare chi2_independence(const std::vector<double>& table, int rows, int cols);

// two-sample Kolmogorov–Smirnov, asymptotic p-value
struct KsResult {
    double d = 0.0;
    double p = 1.0;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// P[Poisson(lambda) > t]
double poisson_tail_above(double lambda, double t);

} // namespace cylperc
