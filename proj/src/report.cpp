#include "evcond/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace evcond {

std::string TestReport::to_json(bool include_timing) const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["n"] = n;
    j["k"] = k;
    j["beta"] = beta;
    j["alpha"] = alpha;
    j["kln"] = kln;
    j["quantile"] = quantile;
    j["reject"] = reject;
    j["reps"] = reps;
    j["quad_cells"] = quad_cells;
    j["theta_cells"] = theta_cells;
    j["seed"] = seed;
    j["ties"] = ties;
    if (include_timing) j["timing_ms"] = timing_ms;
    return j.dump(2);
}

TestReport TestReport::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    TestReport r;
    r.n = j.at("n").get<int>();
    r.k = j.at("k").get<int>();
    r.beta = j.at("beta").get<double>();
    r.alpha = j.at("alpha").get<double>();
    r.kln = j.at("kln").get<double>();
    r.quantile = j.at("quantile").get<double>();
    r.reject = j.at("reject").get<bool>();
    r.reps = j.at("reps").get<int>();
    r.quad_cells = j.at("quad_cells").get<int>();
    r.theta_cells = j.at("theta_cells").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.ties = j.at("ties").get<int>();
    if (j.contains("timing_ms")) r.timing_ms = j.at("timing_ms").get<double>();
    return r;
}

std::string TestReport::to_csv() const {
    std::string out = "n,k,beta,alpha,kln,quantile,reject,reps,seed\n";
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g,%.17g,%d,%d,%llu\n", n, k, beta,
                  alpha, kln, quantile, reject ? 1 : 0, reps,
                  static_cast<unsigned long long>(seed));
    return out + buf;
}

TestReport run_test(const BivariateSample& sample, const TestConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    config.validate(sample.size());

    const RankData ranks = compute_ranks(sample);
    const QuadSpec quad{config.quad_cells};

    TestReport report;
    report.n = sample.size();
    report.k = config.k;
    report.beta = config.beta;
    report.alpha = config.alpha;
    report.reps = config.reps;
    report.quad_cells = config.quad_cells;
    report.theta_cells = config.theta_cells;
    report.seed = config.seed;
    report.ties = ranks.tie_count();

    report.kln = test_statistic(ranks, config.k, config.beta, quad);

    const AtomMeasure atoms = exponent_measure(ranks, config.k);
    const ControlMeasure measure = control_from_atoms(atoms);
    const SmoothedFunctionals fn = SmoothedFunctionals::estimated(atoms);
    const double prob = 1.0 - config.alpha;
    const QuantileTable table = limit_quantiles(measure, fn, config.beta, config.reps,
                                                std::span<const double>(&prob, 1), quad,
                                                config.theta_cells, config.seed);
    report.quantile = table.at(prob);
    report.reject = report.kln >= report.quantile;

    report.timing_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    return report;
}

namespace {

void append_polyline(std::string& out, const std::vector<double>& px,
                     const std::vector<double>& py, const char* color) {
    out += "  <polyline fill=\"none\" stroke=\"";
    out += color;
    out += "\" stroke-width=\"1.5\" points=\"";
    char buf[64];
    for (std::size_t i = 0; i < px.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.6g,%.6g ", px[i], py[i]);
        out += buf;
    }
    out += "\"/>\n";
}

}  // namespace

std::string render_scan_svg(const ScanCurve& curve) {
    constexpr double width = 640, height = 480;
    constexpr double ml = 60, mr = 20, mt = 20, mb = 45;

    double kmin = 0, kmax = 1, vmax = 1e-12;
    if (!curve.entries.empty()) {
        kmin = curve.entries.front().k;
        kmax = std::max<double>(curve.entries.back().k, kmin + 1);
        for (const auto& e : curve.entries) {
            vmax = std::max(vmax, e.kln);
            if (e.quantile) vmax = std::max(vmax, *e.quantile);
        }
    }
    auto sx = [&](double k) { return ml + (k - kmin) / (kmax - kmin) * (width - ml - mr); };
    auto sy = [&](double v) { return height - mb - v / (1.08 * vmax) * (height - mt - mb); };

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                  "viewBox=\"0 0 %g %g\">\n",
                  width, height, width, height);
    out += buf;
    std::snprintf(buf, sizeof(buf),
                  "  <rect x=\"0\" y=\"0\" width=\"%g\" height=\"%g\" fill=\"white\"/>\n", width,
                  height);
    out += buf;
    std::snprintf(buf, sizeof(buf),
                  "  <line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", ml,
                  height - mb, width - mr, height - mb);
    out += buf;
    std::snprintf(buf, sizeof(buf),
                  "  <line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", ml, mt,
                  ml, height - mb);
    out += buf;

    std::vector<double> sx1, sy1, sx2, sy2;
    for (const auto& e : curve.entries) {
        sx1.push_back(sx(e.k));
        sy1.push_back(sy(e.kln));
        if (e.quantile) {
            sx2.push_back(sx(e.k));
            sy2.push_back(sy(*e.quantile));
        }
    }
    append_polyline(out, sx1, sy1, "#1f77b4");
    append_polyline(out, sx2, sy2, "#d62728");

    std::snprintf(buf, sizeof(buf),
                  "  <text x=\"%g\" y=\"%g\" font-size=\"13\">k</text>\n", (ml + width - mr) / 2,
                  height - 12.0);
    out += buf;
    out += "  <text x=\"14\" y=\"240\" font-size=\"13\" transform=\"rotate(-90 14 240)\">"
           "statistic / critical value</text>\n";
    out += "</svg>\n";
    return out;
}

}  // namespace evcond
