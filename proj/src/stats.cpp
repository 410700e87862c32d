#include <cmath>

#include "stats.hpp"

#include <algorithm>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

namespace cylperc {

Interval wilson(std::uint64_t s, std::uint64_t n, double z) {
    if (n == 0) return {0.0, 1.0};
    double p = double(s) / n, z2 = z * z;
    double denom = 1.0 + z2 / n;
    double centre = (p + z2 / (2.0 * n)) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double chi2_sf(double x, double dof) {
    if (dof <= 0) return 1.0;
    if (x <= 0) return 1.0;
    boost::math::chi_squared dist(dof);
    return boost::math::cdf(boost::math::complement(dist, x));
}

ChiSquare chi2_gof(const std::vector<double>& obs, const std::vector<double>& exp_,
                   double min_expected) {
    ChiSquare r;
    double po = 0, pe = 0;
    int bins = 0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (exp_[i] < min_expected) {
            po += obs[i];
            pe += exp_[i];
            continue;
        }
        r.stat += (obs[i] - exp_[i]) * (obs[i] - exp_[i]) / exp_[i];
        ++bins;
    }
    if (pe > 0) {
        r.stat += (po - pe) * (po - pe) / pe;
        ++bins;
    }
    r.dof = bins - 1;
    r.p = chi2_sf(r.stat, r.dof);
    return r;
}

ChiSquare chi2_two_sample(const std::vector<double>& a, const std::vector<double>& b,
                          double min_expected) {
    double na = 0, nb = 0;
    for (double x : a) na += x;
    for (double x : b) nb += x;
    ChiSquare r;
    if (na == 0 || nb == 0) return r;
    double pa = 0, pb = 0;
    int bins = 0;
    auto term = [&](double x, double y) {
        double t = x + y;
        double ea = t * na / (na + nb), eb = t * nb / (na + nb);
        return (x - ea) * (x - ea) / ea + (y - eb) * (y - eb) / eb;
    };
    for (std::size_t i = 0; i < a.size(); ++i) {
        double t = a[i] + b[i];
        if (std::min(t * na, t * nb) / (na + nb) < min_expected) {
            pa += a[i];
            pb += b[i];
            continue;
        }
        r.stat += term(a[i], b[i]);
        ++bins;
    }
    if (pa + pb > 0) {
        r.stat += term(pa, pb);
        ++bins;
    }
    r.dof = bins - 1;
    r.p = chi2_sf(r.stat, r.dof);
    return r;
}

ChiSquare chi2_independence(const std::vector<double>& t, int rows, int cols) {
    std::vector<double> rs(rows, 0.0), cs(cols, 0.0);
    double n = 0;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            rs[i] += t[i * cols + j];
            cs[j] += t[i * cols + j];
            n += t[i * cols + j];
        }
    ChiSquare r;
    if (n == 0) return r;
    int nr = 0, nc = 0;
    for (double x : rs) nr += x > 0;
    for (double x : cs) nc += x > 0;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            double e = rs[i] * cs[j] / n;
            if (e > 0) r.stat += (t[i * cols + j] - e) * (t[i * cols + j] - e) / e;
        }
    r.dof = double(nr - 1) * (nc - 1);
    r.p = chi2_sf(r.stat, r.dof);
    return r;
}

namespace {
// Q_KS(λ) = 2 Σ (−1)^{j−1} exp(−2 j² λ²)
double kolmogorov_q(double lam) {
    if (lam < 1e-3) return 1.0;
    double sum = 0.0, sign = 1.0;
    for (int j = 1; j <= 200; ++j) {
        double term = std::exp(-2.0 * j * j * lam * lam);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}
} // namespace

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    KsResult r;
    if (a.empty() || b.empty()) return r;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double na = a.size(), nb = b.size();
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        r.d = std::max(r.d, std::fabs(i / na - j / nb));
    }
    double ne = na * nb / (na + nb);
    double sq = std::sqrt(ne);
    r.p = kolmogorov_q((sq + 0.12 + 0.11 / sq) * r.d);
    return r;
}

double poisson_tail_above(double lambda, double t) {
    if (lambda <= 0) return t < 0 ? 1.0 : 0.0;
    if (t < 0) return 1.0;
    double k = std::floor(t); // N > t  ⇔  N ≥ ⌊t⌋+1
    boost::math::poisson_distribution<> dist(lambda);
    return boost::math::cdf(boost::math::complement(dist, k));
}

} // namespace cylperc
