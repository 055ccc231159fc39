#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace evcond {

/// Raw bivariate observations. Everything downstream is rank-based; the
/// values themselves are kept for ingestion, generation and round-trips.
struct BivariateSample {
    std::vector<double> x;
    std::vector<double> y;

    int size() const { return static_cast<int>(x.size()); }
};

/// Throws std::invalid_argument on mismatched lengths or non-finite values.
void validate_sample(const BivariateSample& sample);

struct LoadOptions {
    bool skip_header = false;
    int min_rows = 4;
};

/// Parses two-column text: whitespace or comma delimited, '#' comments,
/// blank lines ignored. Errors carry the 1-based line number.
BivariateSample load_sample(std::istream& in, const LoadOptions& opts = {});
BivariateSample load_sample_file(const std::string& path, const LoadOptions& opts = {});

/// Writes the same two-column format with full round-trip precision.
void save_sample(std::ostream& out, const BivariateSample& sample,
                 const std::vector<std::string>& header_comments = {});
void save_sample_file(const std::string& path, const BivariateSample& sample,
                      const std::vector<std::string>& header_comments = {});

/// Marginal ranks in 1..n, ties broken by original index order. The tie
/// counters report how many adjacent equal values the ranking met, so a
/// caller can judge whether rank-based inference is trustworthy.
struct RankData {
    std::vector<int> rx;
    std::vector<int> ry;
    int n = 0;
    int ties_x = 0;
    int ties_y = 0;

    int tie_count() const { return ties_x + ties_y; }
};

RankData compute_ranks(const BivariateSample& sample);

/// Shared run configuration for the statistic and the limit simulation.
struct TestConfig {
    int k = 0;
    double beta = 2.0;
    double alpha = 0.05;
    int reps = 10000;
    int quad_cells = 200;
    int theta_cells = 200;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument when any field is out of contract for
    /// a sample of size n.
    void validate(int n) const;
};

}  // namespace evcond
