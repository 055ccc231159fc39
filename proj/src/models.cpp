#include "evcond/models.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace evcond {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

AnalyticMeasure cauchy_analytic() {
    AnalyticMeasure m;
    m.R = [](double x, double y) { return x + y - std::sqrt(x * x + y * y); };
    m.lambda = [](double x, double y) {
        if (x == 0.0 && y == 0.0)
            throw std::invalid_argument("lambda is undefined at the origin");
        const double r2 = x * x + y * y;
        return x * y / (r2 * std::sqrt(r2));
    };
    m.l = [](double x, double y) { return std::sqrt(x * x + y * y); };
    m.r1 = [](double x, double y) { return 1.0 - x / std::sqrt(x * x + y * y); };
    m.r2 = [](double x, double y) { return 1.0 - y / std::sqrt(x * x + y * y); };
    m.tail_x = [](double c) { return 1.0 / std::sqrt(c * c + 1.0); };
    m.tail_y = [](double c) { return 1.0 / std::sqrt(c * c + 1.0); };
    return m;
}

BivariateSample sample_cauchy(int n, RngStream& stream) {
    if (n < 1) throw std::invalid_argument("sample_cauchy: n must be at least 1");
    BivariateSample out;
    out.x.reserve(n);
    out.y.reserve(n);
    for (int i = 0; i < n; ++i) {
        double a = 0.0, b = 0.0;
        do {
            const double n1 = stream.next_normal();
            const double n2 = stream.next_normal();
            const double n3 = stream.next_normal();
            if (n3 == 0.0) continue;
            a = std::fabs(n1 / n3);
            b = std::fabs(n2 / n3);
        } while (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b));
        out.x.push_back(a);
        out.y.push_back(b);
    }
    return out;
}

BivariateSample sample_gumbel(int n, double theta, RngStream& stream) {
    if (n < 1) throw std::invalid_argument("sample_gumbel: n must be at least 1");
    if (!(theta >= 1.0)) throw std::invalid_argument("sample_gumbel: theta must be >= 1");
    const double alpha = 1.0 / theta;
    BivariateSample out;
    out.x.reserve(n);
    out.y.reserve(n);
    for (int i = 0; i < n; ++i) {
        double u = 0.0, v = 0.0;
        do {
            if (theta == 1.0) {
                u = stream.next_unit_open();
                v = stream.next_unit_open();
                break;
            }
            // positive stable multiplier with Laplace transform exp(-s^alpha)
            const double angle = kPi * stream.next_unit_open();
            double w;
            while ((w = stream.next_exp()) <= 0.0) {
            }
            const double s = std::sin(alpha * angle) *
                             std::pow(std::sin((1.0 - alpha) * angle), (1.0 - alpha) / alpha) /
                             (std::pow(std::sin(angle), 1.0 / alpha) *
                              std::pow(w, (1.0 - alpha) / alpha));
            double e1, e2;
            while ((e1 = stream.next_exp()) <= 0.0) {
            }
            while ((e2 = stream.next_exp()) <= 0.0) {
            }
            u = std::exp(-std::pow(e1 / s, alpha));
            v = std::exp(-std::pow(e2 / s, alpha));
        } while (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0));
        out.x.push_back(u);
        out.y.push_back(1.0 - v);
    }
    return out;
}

namespace {

// P(J = j) = (3/4) 4^{-j}; indices truncated at 52 (tail mass < 1e-30).
int dyadic_index(RngStream& stream) {
    const double t = 1.0 - stream.next_unit();
    double th = 0.25;
    int j = 0;
    while (th > t && j < 52) {
        th *= 0.25;
        ++j;
    }
    return j;
}

}  // namespace

BivariateSample sample_alternative(int n, RngStream& stream) {
    if (n < 1) throw std::invalid_argument("sample_alternative: n must be at least 1");
    BivariateSample out;
    out.x.reserve(n);
    out.y.reserve(n);
    for (int i = 0; i < n; ++i) {
        if (stream.next_unit() <= 2.0 / 3.0) {
            const int m = dyadic_index(stream);
            const int r = dyadic_index(stream);
            const double xlo = std::ldexp(1.0, -(2 * m + 1));
            const double ylo = std::ldexp(1.0, -(2 * r + 1));
            out.x.push_back(xlo + stream.next_unit() * xlo);
            out.y.push_back(ylo + stream.next_unit() * ylo);
        } else {
            const int m = dyadic_index(stream);
            const double lo = std::ldexp(1.0, -(2 * m + 2));
            const double c = lo + stream.next_unit() * lo;
            out.x.push_back(c);
            out.y.push_back(c);
        }
    }
    return out;
}

}  // namespace evcond
