#include "evcond/sample.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace evcond {

void validate_sample(const BivariateSample& sample) {
    if (sample.x.size() != sample.y.size())
        throw std::invalid_argument("sample: x and y lengths differ");
    for (std::size_t i = 0; i < sample.x.size(); ++i) {
        if (!std::isfinite(sample.x[i]) || !std::isfinite(sample.y[i]))
            throw std::invalid_argument("sample: non-finite value at row " + std::to_string(i + 1));
    }
}

namespace {

bool parse_row(const std::string& line, double& a, double& b) {
    std::string cleaned = line;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream is(cleaned);
    std::string extra;
    if (!(is >> a >> b)) return false;
    if (is >> extra) return false;
    return true;
}

}  // namespace

BivariateSample load_sample(std::istream& in, const LoadOptions& opts) {
    BivariateSample sample;
    std::string line;
    int line_no = 0;
    bool header_pending = opts.skip_header;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const bool blank = line.find_first_not_of(" \t\r,") == std::string::npos;
        if (blank) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        double a = 0.0, b = 0.0;
        if (!parse_row(line, a, b))
            throw std::invalid_argument("line " + std::to_string(line_no) +
                                        ": expected exactly two numeric columns");
        if (!std::isfinite(a) || !std::isfinite(b))
            throw std::invalid_argument("line " + std::to_string(line_no) + ": non-finite value");
        sample.x.push_back(a);
        sample.y.push_back(b);
    }
    if (sample.size() < opts.min_rows)
        throw std::invalid_argument("sample has " + std::to_string(sample.size()) +
                                    " rows; at least " + std::to_string(opts.min_rows) +
                                    " required");
    return sample;
}

BivariateSample load_sample_file(const std::string& path, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open sample file: " + path);
    return load_sample(in, opts);
}

void save_sample(std::ostream& out, const BivariateSample& sample,
                 const std::vector<std::string>& header_comments) {
    for (const auto& comment : header_comments) out << "# " << comment << "\n";
    char buf[64];
    for (int i = 0; i < sample.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g", sample.x[i], sample.y[i]);
        out << buf << "\n";
    }
}

void save_sample_file(const std::string& path, const BivariateSample& sample,
                      const std::vector<std::string>& header_comments) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    save_sample(out, sample, header_comments);
}

namespace {

void rank_margin(const std::vector<double>& values, std::vector<int>& ranks, int& ties) {
    const int n = static_cast<int>(values.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (values[a] != values[b]) return values[a] < values[b];
        return a < b;
    });
    ranks.assign(n, 0);
    ties = 0;
    for (int r = 0; r < n; ++r) {
        ranks[order[r]] = r + 1;
        if (r > 0 && values[order[r]] == values[order[r - 1]]) ++ties;
    }
}

}  // namespace

RankData compute_ranks(const BivariateSample& sample) {
    validate_sample(sample);
    if (sample.size() < 1) throw std::invalid_argument("compute_ranks: empty sample");
    RankData ranks;
    ranks.n = sample.size();
    rank_margin(sample.x, ranks.rx, ranks.ties_x);
    rank_margin(sample.y, ranks.ry, ranks.ties_y);
    return ranks;
}

void TestConfig::validate(int n) const {
    if (n < 4) throw std::invalid_argument("config: sample size must be at least 4");
    if (k < 2 || k >= n)
        throw std::invalid_argument("config: k must satisfy 2 <= k < n (k=" + std::to_string(k) +
                                    ", n=" + std::to_string(n) + ")");
    if (!(beta >= 0.0 && beta < 3.0))
        throw std::invalid_argument("config: beta must lie in [0, 3)");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("config: alpha must lie in (0, 1)");
    if (reps < 100) throw std::invalid_argument("config: reps must be at least 100");
    if (quad_cells < 20) throw std::invalid_argument("config: quad_cells must be at least 20");
    if (theta_cells < 8) throw std::invalid_argument("config: theta_cells must be at least 8");
}

}  // namespace evcond
