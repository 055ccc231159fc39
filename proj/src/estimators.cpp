#include "evcond/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace evcond {

namespace {

void validate_k(int k, int n, const char* who) {
    if (k < 2 || k >= n)
        throw std::invalid_argument(std::string(who) + ": k must satisfy 2 <= k < n");
}

}  // namespace

double SpectralCdf::eval(double theta) const {
    const auto it = std::upper_bound(angles.begin(), angles.end(), theta);
    return static_cast<double>(it - angles.begin()) / k;
}

double SpectralCdf::total() const { return static_cast<double>(angles.size()) / k; }

SpectralCdf spectral_cdf(const RankData& ranks, int k) {
    validate_k(k, ranks.n, "spectral_cdf");
    const int n = ranks.n;

    struct Atom {
        double angle;
        double a;  // min(1, tan angle)
        double b;  // min(1, cot angle)
        int p;
    };
    std::vector<Atom> atoms;
    atoms.reserve(2 * k);
    for (int i = 0; i < n; ++i) {
        const int p = n + 1 - ranks.rx[i];
        const int q = n + 1 - ranks.ry[i];
        if (p > k && q > k) continue;  // larger rank not in the top k
        Atom atom;
        atom.angle = std::atan2(static_cast<double>(q), static_cast<double>(p));
        atom.a = std::min(1.0, static_cast<double>(q) / p);
        atom.b = std::min(1.0, static_cast<double>(p) / q);
        atom.p = p;
        atoms.push_back(atom);
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& l, const Atom& r) {
        if (l.angle != r.angle) return l.angle < r.angle;
        return l.p < r.p;
    });

    SpectralCdf phi;
    phi.k = k;
    phi.n = n;
    phi.angles.reserve(atoms.size());
    phi.prefix_a.assign(atoms.size() + 1, 0.0);
    phi.prefix_b.assign(atoms.size() + 1, 0.0);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        phi.angles.push_back(atoms[i].angle);
        phi.prefix_a[i + 1] = phi.prefix_a[i] + atoms[i].a;
        phi.prefix_b[i + 1] = phi.prefix_b[i] + atoms[i].b;
    }
    return phi;
}

double stdf_rank(const RankData& ranks, int k, double x, double y) {
    validate_k(k, ranks.n, "stdf_rank");
    if (!(x > 0.0) || !(y > 0.0))
        throw std::invalid_argument("stdf_rank: x and y must be positive");
    const int n = ranks.n;
    const double kx = k * x;
    const double ky = k * y;
    int count = 0;
    for (int i = 0; i < n; ++i) {
        const int p = n + 1 - ranks.rx[i];
        const int q = n + 1 - ranks.ry[i];
        if (p < kx || q < ky) ++count;
    }
    return static_cast<double>(count) / k;
}

double stdf_spectral(const SpectralCdf& phi, double x, double y) {
    if (x < 0.0 || y < 0.0)
        throw std::invalid_argument("stdf_spectral: x and y must be nonnegative");
    if (x == 0.0 && y == 0.0) return 0.0;
    const double split = std::atan2(y, x);
    const std::size_t s =
        std::lower_bound(phi.angles.begin(), phi.angles.end(), split) - phi.angles.begin();
    const std::size_t count = phi.angles.size();
    return (x * (phi.prefix_a[count] - phi.prefix_a[s]) + y * phi.prefix_b[s]) / phi.k;
}

AtomMeasure exponent_measure(const RankData& ranks, int k) {
    validate_k(k, ranks.n, "exponent_measure");
    const int n = ranks.n;
    AtomMeasure measure;
    measure.k = k;
    measure.n = n;
    measure.px.resize(n);
    measure.qy.resize(n);
    measure.obs_with_px.assign(n + 1, 0);
    measure.obs_with_qy.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) {
        const int p = n + 1 - ranks.rx[i];
        const int q = n + 1 - ranks.ry[i];
        measure.px[i] = p;
        measure.qy[i] = q;
        measure.obs_with_px[p] = i;
        measure.obs_with_qy[q] = i;
    }
    return measure;
}

int AtomMeasure::count_rect(int plo, int phi_, int qlo, int qhi) const {
    plo = std::max(plo, 1);
    phi_ = std::min(phi_, n);
    qlo = std::max(qlo, 1);
    qhi = std::min(qhi, n);
    if (plo > phi_ || qlo > qhi) return 0;
    int count = 0;
    if (phi_ - plo <= qhi - qlo) {
        for (int p = plo; p <= phi_; ++p) {
            const int q = qy[obs_with_px[p]];
            if (q >= qlo && q <= qhi) ++count;
        }
    } else {
        for (int q = qlo; q <= qhi; ++q) {
            const int p = px[obs_with_qy[q]];
            if (p >= plo && p <= phi_) ++count;
        }
    }
    return count;
}

namespace {

// integer threshold for "coordinate strictly below k * x"
int strict_threshold(double kx, int n) {
    const double t = std::ceil(kx) - 1.0;
    if (t <= 0.0) return 0;
    return t >= n ? n : static_cast<int>(t);
}

}  // namespace

double box_mass(const AtomMeasure& measure, double x, double y) {
    if (!(x > 0.0) || !(y > 0.0))
        throw std::invalid_argument("box_mass: x and y must be positive");
    const int a = strict_threshold(measure.k * x, measure.n);
    const int b = strict_threshold(measure.k * y, measure.n);
    return static_cast<double>(measure.count_rect(1, a, 1, b)) / measure.k;
}

double strip_mass(const AtomMeasure& measure, double x_lo, double x_hi, double y_lo,
                  double y_hi) {
    if (x_lo > x_hi || y_lo > y_hi)
        throw std::invalid_argument("strip_mass: inverted rectangle bounds");
    x_lo = std::max(x_lo, 0.0);
    y_lo = std::max(y_lo, 0.0);
    const int k = measure.k;
    const int n = measure.n;
    const int plo = static_cast<int>(std::ceil(k * x_lo));
    const int qlo = static_cast<int>(std::ceil(k * y_lo));
    const double ph = std::floor(k * x_hi);
    const double qh = std::floor(k * y_hi);
    const int phi_ = ph >= n ? n : static_cast<int>(ph);
    const int qhi = qh >= n ? n : static_cast<int>(qh);
    return static_cast<double>(measure.count_rect(plo, phi_, qlo, qhi)) / k;
}

void save_atoms(std::ostream& out, const AtomMeasure& measure) {
    char buf[96];
    out << "# p q mass (coordinates are p/k, q/k with k=" << measure.k << ")\n";
    for (int i = 0; i < measure.n; ++i) {
        std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", measure.px[i], measure.qy[i],
                      measure.mass_per_atom());
        out << buf;
    }
}

StdfEvaluator::StdfEvaluator(const RankData& ranks, int k)
    : phi_(spectral_cdf(ranks, k)), measure_(exponent_measure(ranks, k)) {}

double StdfEvaluator::l1(double x, double y) const { return stdf_spectral(phi_, x, y); }

double StdfEvaluator::l2(double x, double y) const {
    if (!(x > 0.0) || !(y > 0.0))
        throw std::invalid_argument("stdf evaluator: x and y must be positive");
    const int a = strict_threshold(measure_.k * x, measure_.n);
    const int b = strict_threshold(measure_.k * y, measure_.n);
    const int both = measure_.count_rect(1, a, 1, b);
    return static_cast<double>(a + b - both) / measure_.k;
}

}  // namespace evcond
