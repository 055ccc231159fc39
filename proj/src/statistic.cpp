#include "evcond/statistic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "evcond/parallel.hpp"

namespace evcond {

void QuadSpec::validate() const {
    if (m < 20) throw std::invalid_argument("quadrature grid must have at least 20 cells per axis");
}

int aligned_cells(int m, int k) {
    if (k >= 2 && k <= m) return ((m + k - 1) / k) * k;
    return m;
}

namespace {

// Midpoint-grid integral of k * node(i,j)^2 * (x v y)^-beta. Rows are
// summed left to right and combined with a fixed pairwise tree, so the
// value does not depend on the worker count.
double integrate_nodes(int cells, int k, double beta,
                       const std::function<double(int, int, double, double)>& node) {
    std::vector<double> rows(cells, 0.0);
    parallel_for(cells, [&](std::size_t jb, std::size_t je) {
        for (std::size_t j = jb; j < je; ++j) {
            const double y = (static_cast<double>(j) + 0.5) / cells;
            double acc = 0.0;
            for (int i = 0; i < cells; ++i) {
                const double x = (i + 0.5) / cells;
                const double d = node(i, static_cast<int>(j), x, y);
                const double weight = beta == 0.0 ? 1.0 : std::exp(-beta * std::log(std::max(x, y)));
                acc += d * d * weight;
            }
            rows[j] = acc;
        }
    });
    const double cell_area = 1.0 / (static_cast<double>(cells) * cells);
    return k * cell_area * pairwise_sum(rows);
}

void validate_statistic_args(int n, int k, double beta) {
    if (k < 2 || k >= n) throw std::invalid_argument("test_statistic: k must satisfy 2 <= k < n");
    if (!(beta >= 0.0 && beta < 3.0))
        throw std::invalid_argument("test_statistic: beta must lie in [0, 3)");
}

double statistic_on_grid(const StdfEvaluator& ev, int k, double beta, int cells) {
    const AtomMeasure& measure = ev.measure();
    const int n = measure.n;

    // thresholds ceil(k x_i) - 1 per grid coordinate; never a tie since
    // k * (i + 1/2) / cells is not an integer once cells is k-aligned
    std::vector<int> thr(cells);
    for (int i = 0; i < cells; ++i) {
        const double x = (i + 0.5) / cells;
        thr[i] = static_cast<int>(std::ceil(k * x)) - 1;
    }

    // dominance-count table over the distinct thresholds
    const int stride = cells + 1;
    std::vector<int> cnt(static_cast<std::size_t>(stride) * stride, 0);
    for (int i = 0; i < n; ++i) {
        const int bx = static_cast<int>(
            std::lower_bound(thr.begin(), thr.end(), measure.px[i]) - thr.begin());
        const int by = static_cast<int>(
            std::lower_bound(thr.begin(), thr.end(), measure.qy[i]) - thr.begin());
        if (bx < cells && by < cells) ++cnt[static_cast<std::size_t>(bx + 1) * stride + by + 1];
    }
    for (int i = 1; i <= cells; ++i)
        for (int j = 1; j <= cells; ++j)
            cnt[static_cast<std::size_t>(i) * stride + j] +=
                cnt[static_cast<std::size_t>(i - 1) * stride + j] +
                cnt[static_cast<std::size_t>(i) * stride + j - 1] -
                cnt[static_cast<std::size_t>(i - 1) * stride + j - 1];

    return integrate_nodes(cells, k, beta, [&](int i, int j, double x, double y) {
        const int both = cnt[static_cast<std::size_t>(i + 1) * stride + j + 1];
        const double l2 = static_cast<double>(thr[i] + thr[j] - both) / k;
        return ev.l1(x, y) - l2;
    });
}

}  // namespace

double test_statistic(const RankData& ranks, int k, double beta, const QuadSpec& quad) {
    quad.validate();
    validate_statistic_args(ranks.n, k, beta);
    const StdfEvaluator ev(ranks, k);
    return statistic_on_grid(ev, k, beta, aligned_cells(quad.m, k));
}

RefinedStatistic test_statistic_refined(const RankData& ranks, int k, double beta,
                                        const QuadSpec& quad) {
    quad.validate();
    validate_statistic_args(ranks.n, k, beta);
    const StdfEvaluator ev(ranks, k);
    RefinedStatistic out;
    out.value = statistic_on_grid(ev, k, beta, aligned_cells(quad.m, k));
    out.refined = statistic_on_grid(ev, k, beta,
                                    aligned_cells(QuadSpec::refinement_factor * quad.m, k));
    return out;
}

std::string ScanCurve::to_csv() const {
    std::string out = "k,kLn,q95\n";
    char buf[96];
    for (const auto& e : entries) {
        if (e.quantile) {
            std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", e.k, e.kln, *e.quantile);
        } else {
            std::snprintf(buf, sizeof(buf), "%d,%.17g,\n", e.k, e.kln);
        }
        out += buf;
    }
    return out;
}

ScanCurve k_scan(const BivariateSample& sample, const std::vector<int>& k_values, double beta,
                 const QuadSpec& quad, const QuantileHook& hook) {
    if (k_values.empty()) throw std::invalid_argument("k_scan: empty k list");
    for (std::size_t i = 1; i < k_values.size(); ++i)
        if (k_values[i] <= k_values[i - 1])
            throw std::invalid_argument("k_scan: k values must be strictly increasing");
    const RankData ranks = compute_ranks(sample);
    ScanCurve curve;
    curve.entries.reserve(k_values.size());
    for (int k : k_values) {
        ScanEntry entry;
        entry.k = k;
        entry.kln = test_statistic(ranks, k, beta, quad);
        if (hook) entry.quantile = hook(k);
        curve.entries.push_back(entry);
    }
    return curve;
}

double weighted_discrepancy(const std::function<double(double, double)>& f,
                            const std::function<double(double, double)>& g, int k, double beta,
                            int cells) {
    if (cells < 1) throw std::invalid_argument("weighted_discrepancy: cells must be positive");
    return integrate_nodes(cells, k, beta,
                           [&](int, int, double x, double y) { return f(x, y) - g(x, y); });
}

}  // namespace evcond
