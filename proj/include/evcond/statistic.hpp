#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "evcond/estimators.hpp"
#include "evcond/sample.hpp"

namespace evcond {

/// Composite midpoint rule on (0,1]^2. Nodes are cell midpoints, so the
/// singular weight is only ever evaluated away from the axes.
struct QuadSpec {
    int m = 200;  ///< requested cells per axis, before jump alignment
    static constexpr int refinement_factor = 2;

    void validate() const;  ///< m >= 20
};

/// Cells per axis actually used: m rounded up to a multiple of k whenever
/// k <= m, so no cell interior straddles a 1/k jump line of the rank
/// estimate.
int aligned_cells(int m, int k);

/// k times the weighted squared discrepancy of the two tail dependence
/// estimates, integrated over (0,1]^2 with weight (x v y)^-beta.
double test_statistic(const RankData& ranks, int k, double beta, const QuadSpec& quad = {});

struct RefinedStatistic {
    double value = 0.0;    ///< at the requested grid
    double refined = 0.0;  ///< at twice the grid
};

RefinedStatistic test_statistic_refined(const RankData& ranks, int k, double beta,
                                        const QuadSpec& quad = {});

struct ScanEntry {
    int k = 0;
    double kln = 0.0;
    std::optional<double> quantile;
};

struct ScanCurve {
    std::vector<ScanEntry> entries;

    std::string to_csv() const;  ///< header "k,kLn,q95"; empty cells when absent
};

using QuantileHook = std::function<double(int k)>;

/// Statistic as a function of the tail fraction k, with ranks computed
/// once; the optional hook supplies a per-k critical value.
ScanCurve k_scan(const BivariateSample& sample, const std::vector<int>& k_values, double beta,
                 const QuadSpec& quad, const QuantileHook& hook = {});

/// Quadrature seam shared with the statistic: integrates
/// k (f - g)^2 (x v y)^-beta over the midpoint grid with `cells` per axis.
double weighted_discrepancy(const std::function<double(double, double)>& f,
                            const std::function<double(double, double)>& g, int k, double beta,
                            int cells);

}  // namespace evcond
