#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "evcond/limit_sim.hpp"
#include "evcond/parallel.hpp"

namespace evcond {

namespace {

constexpr double kHalfPi = 1.57079632679489661923;
constexpr double kQuarterPi = 0.78539816339744830962;
constexpr int kZInnerCells = 400;
constexpr double kInf = std::numeric_limits<double>::infinity();

double logint_axis_at(const std::vector<double>& cols, const std::vector<double>& prefix,
                      const std::vector<double>& cumlog, std::size_t idx, double c) {
    if (cols.empty() || c <= cols.front()) return 0.0;
    if (idx < cols.size() && cols[idx] == c) return cumlog[idx];
    if (idx == cols.size()) return cumlog.back() + prefix[idx] * std::log(c / cols.back());
    return cumlog[idx - 1] + prefix[idx] * std::log(c / cols[idx - 1]);
}

}  // namespace

struct ReplicateEngine::Impl {
    const ControlMeasure& measure;
    SmoothedFunctionals fn;
    std::vector<double> betas;
    int cells = 0;
    int tcells = 0;
    double delta = 0.0;

    std::vector<double> xs;
    std::vector<int> marg_u;  // prefix index of W1 at xs[i]
    std::vector<int> marg_v;
    std::vector<int> bucket_x;  // per atom, in [0, cells]
    std::vector<int> bucket_y;
    int w1_at_1 = 0;  // prefix index of W1(1), W2(1)
    int w2_at_1 = 0;

    // per node (j * cells + i): smoothed partials and the theta-integral
    // partial-cell factor
    std::vector<double> r1c, r2c;
    struct ANode {
        int cell;
        double pf;  // partial length / sin^2(mid) (or cos^2 below the diagonal)
    };
    std::vector<ANode> anodes;
    std::vector<double> weights;  // node-major, betas within node

    // theta-grid constants; index tcells holds theta = pi/2
    struct ZC {
        int branch = 0;  // 0: below pi/4, 1: above, 2: pi/2
        double t = 0.0;
        double inv_t = 0.0;
        double lam = 0.0;
        double tw2 = 0.0;  // coefficient of -W2(1)
        double tw1 = 0.0;  // coefficient of -W1(1)
        double c1 = 0.0;   // W1 log-integral limit
        double c2 = 0.0;   // W2 log-integral limit
        std::size_t i1 = 0, i2 = 0;
        std::vector<double> coef;  // analytic inner rule
        std::vector<int> iu, iv;
    };
    std::vector<ZC> zconsts;
    std::vector<int> sweep_split;

    Impl(const ControlMeasure& m, const SmoothedFunctionals& f, std::vector<double> bs,
         const QuadSpec& quad, int theta_cells)
        : measure(m), fn(f), betas(std::move(bs)) {
        quad.validate();
        if (betas.empty()) throw std::invalid_argument("replicate engine: no weight exponents");
        for (double beta : betas)
            if (!(beta >= 0.0 && beta < 3.0))
                throw std::invalid_argument("replicate engine: beta must lie in [0, 3)");
        if (measure.atom_count() == 0)
            throw std::invalid_argument("replicate engine: empty control measure");
        if (theta_cells < 8) throw std::invalid_argument("theta grid must have at least 8 cells");

        const bool estimated = measure.provenance == ControlMeasure::Provenance::estimated;
        cells = estimated ? aligned_cells(quad.m, measure.k) : quad.m;
        tcells = theta_cells + (theta_cells & 1);
        delta = kHalfPi / tcells;

        build_grid(estimated);
        build_theta();
    }

    void build_grid(bool estimated) {
        const int count = measure.atom_count();
        xs.resize(cells);
        marg_u.resize(cells);
        marg_v.resize(cells);
        for (int i = 0; i < cells; ++i) {
            xs[i] = (i + 0.5) / cells;
            marg_u[i] = measure.marg1_cols(xs[i]);
            marg_v[i] = measure.marg2_cols(xs[i]);
        }
        w1_at_1 = measure.marg1_cols(1.0);
        w2_at_1 = measure.marg2_cols(1.0);

        bucket_x.resize(count);
        bucket_y.resize(count);
        if (estimated) {
            std::vector<int> thr(cells);
            for (int i = 0; i < cells; ++i)
                thr[i] = static_cast<int>(std::ceil(measure.k * xs[i])) - 1;
            for (int a = 0; a < count; ++a) {
                bucket_x[a] = static_cast<int>(
                    std::lower_bound(thr.begin(), thr.end(), measure.pu[a]) - thr.begin());
                bucket_y[a] = static_cast<int>(
                    std::lower_bound(thr.begin(), thr.end(), measure.qv[a]) - thr.begin());
            }
        } else {
            for (int a = 0; a < count; ++a) {
                bucket_x[a] = static_cast<int>(
                    std::lower_bound(xs.begin(), xs.end(), measure.u[a]) - xs.begin());
                bucket_y[a] = static_cast<int>(
                    std::lower_bound(xs.begin(), xs.end(), measure.v[a]) - xs.begin());
            }
        }

        const std::size_t node_count = static_cast<std::size_t>(cells) * cells;
        r1c.resize(node_count);
        r2c.resize(node_count);
        anodes.resize(node_count);
        weights.resize(node_count * betas.size());
        const int half = tcells / 2;
        parallel_for(cells, [&](std::size_t jb, std::size_t je) {
            for (std::size_t j = jb; j < je; ++j) {
                const double y = xs[j];
                for (int i = 0; i < cells; ++i) {
                    const double x = xs[i];
                    const std::size_t node = j * cells + i;
                    r1c[node] = fn.r1(x, y);
                    r2c[node] = fn.r2(x, y);
                    for (std::size_t b = 0; b < betas.size(); ++b)
                        weights[node * betas.size() + b] =
                            betas[b] == 0.0 ? 1.0
                                            : std::exp(-betas[b] * std::log(std::max(x, y)));
                    ANode an{0, 0.0};
                    if (static_cast<int>(j) > i) {
                        const double phi = std::atan2(y, x);
                        int cell = std::min(static_cast<int>(phi / delta), tcells - 1);
                        cell = std::max(cell, half);
                        const double lo = cell * delta;
                        const double plen = std::max(0.0, phi - lo);
                        const double mid = lo + 0.5 * plen;
                        const double s = std::sin(mid);
                        an = {cell, plen / (s * s)};
                    } else if (static_cast<int>(j) < i) {
                        const double phi = std::atan2(y, x);
                        const int cell =
                            std::max(0, std::min(static_cast<int>(phi / delta), half - 1));
                        const double hi = (cell + 1) * delta;
                        const double plen = std::max(0.0, hi - phi);
                        const double mid = hi - 0.5 * plen;
                        const double c = std::cos(mid);
                        an = {cell, plen / (c * c)};
                    }
                    anodes[node] = an;
                }
            }
        });
    }

    void build_theta() {
        zconsts.resize(tcells + 1);
        sweep_split.resize(tcells + 1);
        const auto& angles = measure.sweep_angles;
        for (int c = 0; c <= tcells; ++c) {
            const double theta = c == tcells ? kHalfPi : (c + 0.5) * delta;
            sweep_split[c] = static_cast<int>(
                std::upper_bound(angles.begin(), angles.end(), theta) - angles.begin());
            zconsts[c] = make_zconsts(theta);
        }
    }

    ZC make_zconsts(double theta) const {
        ZC zc;
        if (theta >= kHalfPi) {
            zc.branch = 2;
            zc.tw2 = fn.tail_x(1.0);
            zc.tw1 = fn.tail_y(1.0);
            return zc;
        }
        zc.t = std::tan(theta);
        if (theta <= kQuarterPi) {
            zc.branch = 0;
            zc.c1 = zc.t > 0.0 ? 1.0 / zc.t : kInf;
            zc.c2 = 1.0;
            zc.tw2 = fn.tail_x(zc.c1);
            if (fn.is_estimated()) zc.lam = fn.lambda_1y(zc.t);
        } else {
            zc.branch = 1;
            zc.inv_t = 1.0 / zc.t;
            zc.c1 = 1.0;
            zc.c2 = zc.t;
            zc.tw2 = fn.tail_x(1.0);
            zc.tw1 = fn.tail_y(1.0) - fn.tail_y(zc.t);
            if (fn.is_estimated()) zc.lam = fn.lambda_x1(zc.inv_t);
        }
        if (fn.is_estimated()) {
            zc.i1 = std::lower_bound(measure.cols_u.begin(), measure.cols_u.end(), zc.c1) -
                    measure.cols_u.begin();
            zc.i2 = std::lower_bound(measure.cols_v.begin(), measure.cols_v.end(), zc.c2) -
                    measure.cols_v.begin();
        } else if (zc.t > 0.0) {
            const double range = zc.branch == 0 ? zc.c1 : 1.0;
            const double dx = range / kZInnerCells;
            zc.coef.resize(kZInnerCells);
            zc.iu.resize(kZInnerCells);
            zc.iv.resize(kZInnerCells);
            for (int c = 0; c < kZInnerCells; ++c) {
                const double xc = (c + 0.5) * dx;
                zc.coef[c] = fn.lambda_raw(xc, xc * zc.t) * dx;
                zc.iu[c] = measure.marg1_cols(xc);
                zc.iv[c] = measure.marg2_cols(xc * zc.t);
            }
        }
        return zc;
    }

    double z_eval(const GaussianFieldDraw& draw, const ZC& zc) const {
        const double w1_1 = draw.prefix_u[w1_at_1];
        const double w2_1 = draw.prefix_v[w2_at_1];
        if (zc.branch == 2) return -w2_1 * zc.tw2 - w1_1 * zc.tw1;

        double head = 0.0;
        if (fn.is_estimated()) {
            if (zc.branch == 0) {
                if (zc.t > 0.0)
                    head = zc.lam * zc.t *
                           logint_axis_at(measure.cols_u, draw.prefix_u, draw.cumlog_u, zc.i1,
                                          zc.c1);
                head -= zc.lam *
                        logint_axis_at(measure.cols_v, draw.prefix_v, draw.cumlog_v, zc.i2, zc.c2);
            } else {
                head = zc.lam * logint_axis_at(measure.cols_u, draw.prefix_u, draw.cumlog_u,
                                               zc.i1, zc.c1) -
                       zc.lam * zc.inv_t *
                           logint_axis_at(measure.cols_v, draw.prefix_v, draw.cumlog_v, zc.i2,
                                          zc.c2);
            }
        } else {
            for (std::size_t c = 0; c < zc.coef.size(); ++c)
                head += zc.coef[c] * (zc.t * draw.prefix_u[zc.iu[c]] - draw.prefix_v[zc.iv[c]]);
        }
        if (zc.branch == 0) return head - w2_1 * zc.tw2;
        return head - w2_1 * zc.tw2 - w1_1 * zc.tw1;
    }

    std::vector<double> eval(const GaussianFieldDraw& draw) const {
        const int half = tcells / 2;
        std::vector<double> g(tcells);
        for (int c = 0; c < tcells; ++c)
            g[c] = draw.prefix_sweep[sweep_split[c]] + z_eval(draw, zconsts[c]);
        const double g_pi2 = draw.prefix_sweep[sweep_split[tcells]] + z_eval(draw, zconsts[tcells]);

        std::vector<double> pref_sin(tcells + 1, 0.0);
        for (int j = half + 1; j <= tcells; ++j) {
            const double mid = (j - 0.5) * delta;
            const double s = std::sin(mid);
            pref_sin[j] = pref_sin[j - 1] + delta / (s * s) * g[j - 1];
        }
        std::vector<double> pref_cos(tcells + 1, 0.0);
        for (int j = half - 1; j >= 0; --j) {
            const double mid = (j + 0.5) * delta;
            const double c = std::cos(mid);
            pref_cos[j] = pref_cos[j + 1] + delta / (c * c) * g[j];
        }

        // box-sum table over the grid thresholds
        const int stride = cells + 1;
        std::vector<double> tbl(static_cast<std::size_t>(stride) * stride, 0.0);
        const int count = measure.atom_count();
        for (int a = 0; a < count; ++a) {
            if (bucket_x[a] < cells && bucket_y[a] < cells)
                tbl[static_cast<std::size_t>(bucket_x[a] + 1) * stride + bucket_y[a] + 1] +=
                    draw.w[a];
        }
        for (int i = 1; i <= cells; ++i)
            for (int j = 1; j <= cells; ++j)
                tbl[static_cast<std::size_t>(i) * stride + j] +=
                    tbl[static_cast<std::size_t>(i - 1) * stride + j] +
                    tbl[static_cast<std::size_t>(i) * stride + j - 1] -
                    tbl[static_cast<std::size_t>(i - 1) * stride + j - 1];

        std::vector<double> margu(cells), margv(cells);
        for (int i = 0; i < cells; ++i) {
            margu[i] = draw.prefix_u[marg_u[i]];
            margv[i] = draw.prefix_v[marg_v[i]];
        }

        const std::size_t nb = betas.size();
        std::vector<double> rows(static_cast<std::size_t>(cells) * nb, 0.0);
        std::vector<double> acc(nb);
        for (int j = 0; j < cells; ++j) {
            const double y = xs[j];
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int i = 0; i < cells; ++i) {
                const double x = xs[i];
                const std::size_t node = static_cast<std::size_t>(j) * cells + i;
                const double wr = tbl[static_cast<std::size_t>(i + 1) * stride + j + 1];
                const double bval = wr - r1c[node] * margu[i] - r2c[node] * margv[j];
                double aval;
                if (j > i) {
                    const ANode& an = anodes[node];
                    aval = x * g_pi2 + y * (pref_sin[an.cell] + an.pf * g[an.cell]);
                } else if (j < i) {
                    const ANode& an = anodes[node];
                    aval = x * g_pi2 - x * (pref_cos[an.cell + 1] + an.pf * g[an.cell]);
                } else {
                    aval = x * g_pi2;
                }
                const double d = aval + bval;
                const double d2 = d * d;
                const double* w = &weights[node * nb];
                for (std::size_t b = 0; b < nb; ++b) acc[b] += d2 * w[b];
            }
            for (std::size_t b = 0; b < nb; ++b) rows[b * cells + j] = acc[b];
        }

        std::vector<double> out(nb);
        const double cell_area = 1.0 / (static_cast<double>(cells) * cells);
        for (std::size_t b = 0; b < nb; ++b)
            out[b] = cell_area *
                     pairwise_sum(std::span<const double>(rows.data() + b * cells, cells));
        return out;
    }
};

ReplicateEngine::ReplicateEngine(const ControlMeasure& measure, const SmoothedFunctionals& fn,
                                 std::vector<double> betas, const QuadSpec& quad,
                                 int theta_cells)
    : impl_(std::make_unique<Impl>(measure, fn, std::move(betas), quad, theta_cells)) {}

ReplicateEngine::~ReplicateEngine() = default;

int ReplicateEngine::beta_count() const { return static_cast<int>(impl_->betas.size()); }

int ReplicateEngine::grid_cells() const { return impl_->cells; }

std::vector<double> ReplicateEngine::replicate(RngStream& stream) const {
    return impl_->eval(draw_field(impl_->measure, stream));
}

std::vector<double> ReplicateEngine::replicate_from_values(std::span<const double> xi) const {
    return impl_->eval(draw_from_values(impl_->measure, xi));
}

std::vector<std::vector<double>> ReplicateEngine::run(int reps, std::uint64_t seed) const {
    if (reps < 1) throw std::invalid_argument("replicate engine: reps must be positive");
    std::vector<std::vector<double>> values(impl_->betas.size());
    for (auto& v : values) v.resize(reps);
    parallel_for(static_cast<std::size_t>(reps), [&](std::size_t rb, std::size_t re) {
        for (std::size_t r = rb; r < re; ++r) {
            RngStream stream(seed, stream_ids::replicate_base + r);
            const std::vector<double> rep = replicate(stream);
            for (std::size_t b = 0; b < rep.size(); ++b) values[b][r] = rep[b];
        }
    });
    return values;
}

double limit_replicate(const ControlMeasure& measure, const SmoothedFunctionals& fn, double beta,
                       const QuadSpec& quad, int theta_cells, RngStream& stream) {
    const ReplicateEngine engine(measure, fn, {beta}, quad, theta_cells);
    return engine.replicate(stream)[0];
}

QuantileTable limit_quantiles(const ControlMeasure& measure, const SmoothedFunctionals& fn,
                              double beta, int reps, std::span<const double> probs,
                              const QuadSpec& quad, int theta_cells, std::uint64_t seed) {
    if (reps < 100) throw std::invalid_argument("limit_quantiles: need at least 100 replicates");
    if (probs.empty()) throw std::invalid_argument("limit_quantiles: no probabilities requested");
    for (double p : probs)
        if (!(p > 0.0 && p < 1.0))
            throw std::invalid_argument("limit_quantiles: probabilities must lie in (0, 1)");

    const ReplicateEngine engine(measure, fn, {beta}, quad, theta_cells);
    std::vector<double> values = engine.run(reps, seed)[0];
    std::sort(values.begin(), values.end());

    QuantileTable table;
    table.probs.assign(probs.begin(), probs.end());
    table.quantiles.reserve(probs.size());
    for (double p : probs) table.quantiles.push_back(empirical_quantile(values, p));
    table.reps = reps;
    table.k = measure.k;
    table.beta = beta;
    table.quad_cells = engine.grid_cells();
    table.theta_cells = theta_cells + (theta_cells & 1);
    table.seed = seed;
    return table;
}

}  // namespace evcond
