#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evcond/limit_sim.hpp"
#include "evcond/models.hpp"
#include "evcond/report.hpp"

namespace {

using namespace evcond;

constexpr const char* kVersion = "evcond 0.1.0";

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoi(item));
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
}

std::vector<int> default_scan_ks(int n) {
    std::vector<int> ks;
    for (int k = 50; k <= 500; k += 50)
        if (k >= 2 && k < (n + 1) / 2) ks.push_back(k);
    if (ks.empty() && n > 4) ks.push_back(std::max(2, n / 4));
    return ks;
}

struct CommonOpts {
    double beta = 2.0;
    double alpha = 0.05;
    int reps = 10000;
    int grid = 200;
    int theta_grid = 200;
    std::uint64_t seed = 1;
    bool skip_header = false;
    std::string format = "json";
};

void add_sim_flags(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--beta", opts.beta, "weight exponent in [0, 3)");
    cmd->add_option("--alpha", opts.alpha, "test level in (0, 1)");
    cmd->add_option("--reps", opts.reps, "Monte-Carlo replicates for the critical value");
    cmd->add_option("--grid", opts.grid, "quadrature cells per axis");
    cmd->add_option("--theta-grid", opts.theta_grid, "angular grid cells");
    cmd->add_option("--seed", opts.seed, "master seed");
}

int cmd_run(const std::string& path, int k, const CommonOpts& opts, bool timing) {
    LoadOptions load;
    load.skip_header = opts.skip_header;
    const BivariateSample sample = load_sample_file(path, load);
    TestConfig config;
    config.k = k;
    config.beta = opts.beta;
    config.alpha = opts.alpha;
    config.reps = opts.reps;
    config.quad_cells = opts.grid;
    config.theta_cells = opts.theta_grid;
    config.seed = opts.seed;
    const TestReport report = run_test(sample, config);
    if (opts.format == "csv")
        std::cout << report.to_csv();
    else
        std::cout << report.to_json(timing) << "\n";
    return report.reject ? 1 : 0;
}

int cmd_scan(const std::string& path, std::string k_list, const CommonOpts& opts,
             const std::string& svg_path, bool no_quantiles, const std::string& out_path) {
    LoadOptions load;
    load.skip_header = opts.skip_header;
    const BivariateSample sample = load_sample_file(path, load);
    std::vector<int> ks = k_list.empty() ? default_scan_ks(sample.size()) : parse_int_list(k_list);
    if (ks.empty()) throw std::runtime_error("scan: no usable k values");

    const QuadSpec quad{opts.grid};
    const RankData ranks = compute_ranks(sample);
    QuantileHook hook;
    if (!no_quantiles) {
        hook = [&](int k) {
            const AtomMeasure atoms = exponent_measure(ranks, k);
            const ControlMeasure measure = control_from_atoms(atoms);
            const SmoothedFunctionals fn = SmoothedFunctionals::estimated(atoms);
            const double prob = 1.0 - opts.alpha;
            return limit_quantiles(measure, fn, opts.beta, opts.reps,
                                   std::span<const double>(&prob, 1), quad, opts.theta_grid,
                                   opts.seed)
                .at(prob);
        };
    }
    const ScanCurve curve = k_scan(sample, ks, opts.beta, quad, hook);
    write_output(out_path, curve.to_csv());
    if (!svg_path.empty()) write_output(svg_path, render_scan_svg(curve));
    return 0;
}

int cmd_gen(const std::string& model, int n, double theta, std::uint64_t seed,
            const std::string& out_path) {
    RngStream stream(seed, stream_ids::generator);
    BivariateSample sample;
    std::vector<std::string> header;
    char buf[128];
    if (model == "cauchy") {
        sample = sample_cauchy(n, stream);
        std::snprintf(buf, sizeof(buf), "model=cauchy n=%d seed=%llu", n,
                      static_cast<unsigned long long>(seed));
    } else if (model == "gumbel") {
        sample = sample_gumbel(n, theta, stream);
        std::snprintf(buf, sizeof(buf), "model=gumbel n=%d theta=%.17g seed=%llu", n, theta,
                      static_cast<unsigned long long>(seed));
    } else if (model == "alternative") {
        sample = sample_alternative(n, stream);
        std::snprintf(buf, sizeof(buf), "model=alternative n=%d seed=%llu", n,
                      static_cast<unsigned long long>(seed));
    } else {
        throw std::runtime_error("unknown model: " + model +
                                 " (expected cauchy, gumbel or alternative)");
    }
    header.emplace_back(buf);
    std::ostringstream os;
    save_sample(os, sample, header);
    write_output(out_path, os.str());
    return 0;
}

int cmd_table1(const std::string& betas_text, int reps, int cells, double strip_extent,
               const CommonOpts& opts, const std::string& out_path) {
    const std::vector<double> betas =
        betas_text.empty() ? std::vector<double>{0.0, 1.0, 2.0} : parse_double_list(betas_text);
    const std::vector<double> probs = {0.10, 0.25, 0.50, 0.75, 0.90, 0.95, 0.975, 0.99};
    if (reps < 100) throw std::runtime_error("table1: need at least 100 replicates");

    MeshSpec mesh;
    mesh.cells_per_unit = cells;
    mesh.strip_extent = strip_extent;
    const AnalyticMeasure cauchy = cauchy_analytic();
    const ControlMeasure measure = discretize_analytic(cauchy, mesh);
    const SmoothedFunctionals fn = SmoothedFunctionals::analytic(cauchy);

    const QuadSpec quad{opts.grid};
    const ReplicateEngine engine(measure, fn, betas, quad, opts.theta_grid);
    auto values = engine.run(reps, opts.seed);

    std::string out = "beta";
    char buf[64];
    for (double p : probs) {
        std::snprintf(buf, sizeof(buf), ",p%.3g", p);
        out += buf;
    }
    out += "\n";
    for (std::size_t b = 0; b < betas.size(); ++b) {
        std::sort(values[b].begin(), values[b].end());
        std::snprintf(buf, sizeof(buf), "%.17g", betas[b]);
        out += buf;
        for (double p : probs) {
            std::snprintf(buf, sizeof(buf), ",%.17g", empirical_quantile(values[b], p));
            out += buf;
        }
        out += "\n";
    }
    write_output(out_path, out);
    return 0;
}

int cmd_table2(int n, const std::string& k_list, double beta, int samples, int limit_reps,
               double q95_override, const CommonOpts& opts, const std::string& out_path) {
    if (samples < 1) throw std::runtime_error("table2: sample count must be positive");
    const std::vector<int> ks =
        k_list.empty() ? std::vector<int>{20, 40, 60, 80, 100, 125, 150, 175, 200, 300, 350, 400}
                       : parse_int_list(k_list);

    double q95 = q95_override;
    if (!(q95 > 0.0)) {
        const AnalyticMeasure cauchy = cauchy_analytic();
        const ControlMeasure measure = discretize_analytic(cauchy, MeshSpec{});
        const SmoothedFunctionals fn = SmoothedFunctionals::analytic(cauchy);
        const double prob = 0.95;
        q95 = limit_quantiles(measure, fn, beta, limit_reps, std::span<const double>(&prob, 1),
                              QuadSpec{opts.grid}, opts.theta_grid, opts.seed)
                  .at(prob);
    }

    // statistics across simulated samples, one stream per sample
    std::vector<std::vector<double>> stats(ks.size(), std::vector<double>(samples));
    const QuadSpec quad{opts.grid};
    for (int s = 0; s < samples; ++s) {
        RngStream stream(opts.seed, stream_ids::sample_batch + s);
        const BivariateSample sample = sample_cauchy(n, stream);
        const RankData ranks = compute_ranks(sample);
        for (std::size_t i = 0; i < ks.size(); ++i)
            stats[i][s] = test_statistic(ranks, ks[i], beta, quad);
    }

    std::string out = "k,alpha_hat,q95_emp,q50_emp,q95_ref\n";
    char buf[160];
    for (std::size_t i = 0; i < ks.size(); ++i) {
        auto& v = stats[i];
        int rejections = 0;
        for (double value : v)
            if (value >= q95) ++rejections;
        std::sort(v.begin(), v.end());
        const double alpha_hat = static_cast<double>(rejections) / samples;
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", ks[i], alpha_hat,
                      empirical_quantile(v, 0.95), empirical_quantile(v, 0.50), q95);
        out += buf;
    }
    write_output(out_path, out);
    return 0;
}

int cmd_quantiles(const std::string& path, int k, const std::string& probs_text,
                  const CommonOpts& opts, const std::string& out_path) {
    LoadOptions load;
    load.skip_header = opts.skip_header;
    const BivariateSample sample = load_sample_file(path, load);
    TestConfig config;
    config.k = k;
    config.beta = opts.beta;
    config.alpha = opts.alpha;
    config.reps = opts.reps;
    config.quad_cells = opts.grid;
    config.theta_cells = opts.theta_grid;
    config.seed = opts.seed;
    config.validate(sample.size());

    const std::vector<double> probs =
        probs_text.empty()
            ? std::vector<double>{0.10, 0.25, 0.50, 0.75, 0.90, 0.95, 0.975, 0.99}
            : parse_double_list(probs_text);

    const RankData ranks = compute_ranks(sample);
    const AtomMeasure atoms = exponent_measure(ranks, k);
    const ControlMeasure measure = control_from_atoms(atoms);
    const SmoothedFunctionals fn = SmoothedFunctionals::estimated(atoms);
    const QuantileTable table =
        limit_quantiles(measure, fn, opts.beta, opts.reps, probs, QuadSpec{opts.grid},
                        opts.theta_grid, opts.seed);
    write_output(out_path, opts.format == "json" ? table.to_json() + "\n" : table.to_csv());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bivariate extreme-value dependence test: compares a rank-count and a "
                 "spectral estimate of the stable tail dependence function and calibrates "
                 "the discrepancy against a simulated limit law."};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "full test on a two-column sample file");
    std::string run_path;
    int run_k = 0;
    bool run_timing = false;
    CommonOpts run_opts;
    run->add_option("sample", run_path, "sample file")->required();
    run->add_option("--k", run_k, "tail fraction (2 <= k < n)")->required();
    add_sim_flags(run, run_opts);
    run->add_flag("--skip-header", run_opts.skip_header, "skip the first data line");
    run->add_option("--format", run_opts.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    run->add_flag("--timing", run_timing, "include wall-clock timing in the report");

    // scan
    auto* scan = app.add_subcommand("scan", "statistic and critical value over a k range");
    std::string scan_path, scan_klist, scan_svg, scan_out;
    bool scan_noq = false;
    CommonOpts scan_opts;
    scan->add_option("sample", scan_path, "sample file")->required();
    scan->add_option("--k-list", scan_klist, "comma-separated k values (default 50,100,...)");
    add_sim_flags(scan, scan_opts);
    scan->add_flag("--skip-header", scan_opts.skip_header, "skip the first data line");
    scan->add_option("--svg", scan_svg, "also render an SVG plot to this path");
    scan->add_option("--out", scan_out, "CSV output path (default stdout)");
    scan->add_flag("--no-quantiles", scan_noq, "skip the per-k critical value simulation");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a reference sample");
    std::string gen_model, gen_out;
    int gen_n = 0;
    double gen_theta = 10.0;
    std::uint64_t gen_seed = 1;
    gen->add_option("model", gen_model, "cauchy, gumbel or alternative")->required();
    gen->add_option("n", gen_n, "sample size")->required();
    gen->add_option("--theta", gen_theta, "copula parameter (gumbel)");
    gen->add_option("--seed", gen_seed, "master seed");
    gen->add_option("--out,-o", gen_out, "output path (default stdout)");

    // table1
    auto* t1 = app.add_subcommand("table1", "limit-law quantiles under the analytic ground truth");
    std::string t1_betas, t1_out;
    int t1_reps = 20000;
    int t1_cells = 200;
    double t1_extent = 100.0;
    CommonOpts t1_opts;
    t1->add_option("--betas", t1_betas, "comma-separated weight exponents (default 0,1,2)");
    t1->add_option("--reps", t1_reps, "Monte-Carlo replicates");
    t1->add_option("--cells", t1_cells, "discretization cells per unit");
    t1->add_option("--strip-extent", t1_extent, "strip discretization extent");
    t1->add_option("--grid", t1_opts.grid, "quadrature cells per axis");
    t1->add_option("--theta-grid", t1_opts.theta_grid, "angular grid cells");
    t1->add_option("--seed", t1_opts.seed, "master seed");
    t1->add_option("--out", t1_out, "CSV output path (default stdout)");

    // table2
    auto* t2 = app.add_subcommand("table2", "type-I error of the test across simulated samples");
    std::string t2_klist, t2_out;
    int t2_n = 2000, t2_samples = 2000, t2_limit_reps = 20000;
    double t2_beta = 2.0, t2_q95 = 0.0;
    CommonOpts t2_opts;
    t2->add_option("--n", t2_n, "sample size");
    t2->add_option("--k-list", t2_klist, "comma-separated k values");
    t2->add_option("--beta", t2_beta, "weight exponent");
    t2->add_option("--reps", t2_samples, "number of simulated samples")->required();
    t2->add_option("--limit-reps", t2_limit_reps, "replicates for the reference quantile");
    t2->add_option("--q95", t2_q95, "reference 0.95 quantile (skips its simulation)");
    t2->add_option("--grid", t2_opts.grid, "quadrature cells per axis");
    t2->add_option("--theta-grid", t2_opts.theta_grid, "angular grid cells");
    t2->add_option("--seed", t2_opts.seed, "master seed");
    t2->add_option("--out", t2_out, "CSV output path (default stdout)");

    // quantiles
    auto* qs = app.add_subcommand("quantiles", "simulated limit quantiles for a sample");
    std::string qs_path, qs_probs, qs_out;
    int qs_k = 0;
    CommonOpts qs_opts;
    qs_opts.format = "csv";
    qs->add_option("sample", qs_path, "sample file")->required();
    qs->add_option("--k", qs_k, "tail fraction")->required();
    qs->add_option("--probs", qs_probs, "comma-separated probabilities");
    add_sim_flags(qs, qs_opts);
    qs->add_flag("--skip-header", qs_opts.skip_header, "skip the first data line");
    qs->add_option("--format", qs_opts.format, "csv or json")
        ->check(CLI::IsMember({"json", "csv"}));
    qs->add_option("--out", qs_out, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return cmd_run(run_path, run_k, run_opts, run_timing);
        if (scan->parsed())
            return cmd_scan(scan_path, scan_klist, scan_opts, scan_svg, scan_noq, scan_out);
        if (gen->parsed()) return cmd_gen(gen_model, gen_n, gen_theta, gen_seed, gen_out);
        if (t1->parsed()) return cmd_table1(t1_betas, t1_reps, t1_cells, t1_extent, t1_opts, t1_out);
        if (t2->parsed())
            return cmd_table2(t2_n, t2_klist, t2_beta, t2_samples, t2_limit_reps, t2_q95, t2_opts,
                              t2_out);
        if (qs->parsed()) return cmd_quantiles(qs_path, qs_k, qs_probs, qs_opts, qs_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
