#include "evcond/limit_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace evcond {

namespace {

constexpr double kHalfPi = 1.57079632679489661923;
constexpr double kQuarterPi = 0.78539816339744830962;
constexpr int kZInnerCells = 400;
constexpr double kInf = std::numeric_limits<double>::infinity();

int strict_cols(double kx, int n) {
    const double t = std::ceil(kx) - 1.0;
    if (t <= 0.0) return 0;
    return t >= n ? n : static_cast<int>(t);
}

}  // namespace

// ---------------------------------------------------------------------------
// ControlMeasure

int ControlMeasure::marg1_cols(double x) const {
    if (provenance == Provenance::estimated) return strict_cols(k * x, atom_count());
    return static_cast<int>(std::upper_bound(cols_u.begin(), cols_u.end(), x) - cols_u.begin());
}

int ControlMeasure::marg2_cols(double y) const {
    if (provenance == Provenance::estimated) return strict_cols(k * y, atom_count());
    return static_cast<int>(std::upper_bound(cols_v.begin(), cols_v.end(), y) - cols_v.begin());
}

bool ControlMeasure::box_contains(int atom, double x, double y) const {
    if (provenance == Provenance::estimated)
        return pu[atom] < k * x && qv[atom] < k * y;
    return u[atom] <= x && v[atom] <= y;
}

bool ControlMeasure::cset_contains(int atom, double theta) const {
    double angle;
    if (provenance == Provenance::estimated) {
        if (std::min(pu[atom], qv[atom]) > k) return false;
        angle = std::atan2(static_cast<double>(qv[atom]), static_cast<double>(pu[atom]));
    } else {
        if (std::min(u[atom], v[atom]) > 1.0) return false;
        angle = std::atan2(v[atom], u[atom]);
    }
    return angle <= theta;
}

double ControlMeasure::set_mass_box(double x, double y) const {
    double acc = 0.0;
    for (int i = 0; i < atom_count(); ++i)
        if (box_contains(i, x, y)) acc += mass[i];
    return acc;
}

double ControlMeasure::set_mass_cset(double theta) const {
    double acc = 0.0;
    for (int i = 0; i < atom_count(); ++i)
        if (cset_contains(i, theta)) acc += mass[i];
    return acc;
}

void ControlMeasure::finalize() {
    const int count = atom_count();
    total = 0.0;
    for (double m : mass) total += m;

    col_of_u.resize(count);
    col_of_v.resize(count);
    if (provenance == Provenance::estimated) {
        // coordinates are a permutation of {1..n}/k; columns are j/k
        cols_u.resize(count);
        cols_v.resize(count);
        for (int j = 0; j < count; ++j) cols_u[j] = cols_v[j] = (j + 1) / static_cast<double>(k);
        for (int i = 0; i < count; ++i) {
            col_of_u[i] = pu[i] - 1;
            col_of_v[i] = qv[i] - 1;
        }
    } else {
        auto build = [count](const std::vector<double>& coords, std::vector<double>& cols,
                             std::vector<int>& col_of) {
            std::vector<int> order(count);
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(),
                      [&](int a, int b) { return coords[a] < coords[b]; });
            cols.clear();
            for (int i : order) {
                if (cols.empty() || coords[i] != cols.back()) cols.push_back(coords[i]);
                col_of[i] = static_cast<int>(cols.size()) - 1;
            }
        };
        build(u, cols_u, col_of_u);
        build(v, cols_v, col_of_v);
    }

    sweep_atoms.clear();
    sweep_angles.clear();
    std::vector<std::pair<double, int>> sweep;
    for (int i = 0; i < count; ++i) {
        double angle;
        if (provenance == Provenance::estimated) {
            if (std::min(pu[i], qv[i]) > k) continue;
            angle = std::atan2(static_cast<double>(qv[i]), static_cast<double>(pu[i]));
        } else {
            if (std::min(u[i], v[i]) > 1.0) continue;
            angle = std::atan2(v[i], u[i]);
        }
        sweep.emplace_back(angle, i);
    }
    std::sort(sweep.begin(), sweep.end());
    sweep_atoms.reserve(sweep.size());
    sweep_angles.reserve(sweep.size());
    for (const auto& [angle, atom] : sweep) {
        sweep_angles.push_back(angle);
        sweep_atoms.push_back(atom);
    }
}

ControlMeasure control_from_atoms(const AtomMeasure& measure) {
    ControlMeasure out;
    out.provenance = ControlMeasure::Provenance::estimated;
    out.k = measure.k;
    out.pu = measure.px;
    out.qv = measure.qy;
    out.u.resize(measure.n);
    out.v.resize(measure.n);
    out.mass.assign(measure.n, measure.mass_per_atom());
    for (int i = 0; i < measure.n; ++i) {
        out.u[i] = measure.u(i);
        out.v[i] = measure.v(i);
    }
    out.finalize();
    return out;
}

// ---------------------------------------------------------------------------
// Analytic discretization

void MeshSpec::validate() const {
    if (cells_per_unit < 50)
        throw std::invalid_argument("mesh too coarse: need at least 50 cells per unit");
    if (!(strip_extent > 2.0))
        throw std::invalid_argument("mesh: strip extent must exceed the unit square block");
    if (strip_cells < 10) throw std::invalid_argument("mesh: need at least 10 strip cells");
}

ControlMeasure discretize_analytic(const AnalyticMeasure& analytic, const MeshSpec& mesh) {
    mesh.validate();
    const int cpu = mesh.cells_per_unit;
    const int side = 2 * cpu;
    const double extent = mesh.strip_extent;
    const int sc = mesh.strip_cells;

    ControlMeasure out;
    out.provenance = ControlMeasure::Provenance::analytic_cells;
    const auto& R = analytic.R;
    auto cell_mass = [&R](double a, double b, double c, double d) {
        return R(b, d) - R(a, d) - R(b, c) + R(a, c);
    };
    auto push = [&out](double uc, double vc, double m) {
        out.u.push_back(uc);
        out.v.push_back(vc);
        out.mass.push_back(m);
    };

    // uniform cells on [0, 2]^2
    for (int i = 0; i < side; ++i) {
        const double a = static_cast<double>(i) / cpu;
        const double b = static_cast<double>(i + 1) / cpu;
        for (int j = 0; j < side; ++j) {
            const double c = static_cast<double>(j) / cpu;
            const double d = static_cast<double>(j + 1) / cpu;
            push((i + 0.5) / cpu, (j + 0.5) / cpu, cell_mass(a, b, c, d));
        }
    }

    // geometric cells along the strips, transverse resolution 1/cpu
    std::vector<double> geo(sc + 1);
    for (int s = 0; s <= sc; ++s)
        geo[s] = 2.0 * std::pow(extent / 2.0, static_cast<double>(s) / sc);
    for (int s = 0; s < sc; ++s) {
        const double a = geo[s];
        const double b = geo[s + 1];
        const double uc = 0.5 * (a + b);
        for (int j = 0; j < cpu; ++j) {
            const double c = static_cast<double>(j) / cpu;
            const double d = static_cast<double>(j + 1) / cpu;
            push(uc, (j + 0.5) / cpu, cell_mass(a, b, c, d));         // [a,b] x [c,d]
        }
    }
    for (int s = 0; s < sc; ++s) {
        const double a = geo[s];
        const double b = geo[s + 1];
        const double vc = 0.5 * (a + b);
        for (int i = 0; i < cpu; ++i) {
            const double c = static_cast<double>(i) / cpu;
            const double d = static_cast<double>(i + 1) / cpu;
            push((i + 0.5) / cpu, vc, cell_mass(c, d, a, b));
        }
    }

    // residual strip mass beyond the extent; margins are normalized, so
    // the limit of R(x, 1) as x grows is 1
    push(extent, 0.5, 1.0 - R(extent, 1.0));
    push(0.5, extent, 1.0 - R(1.0, extent));

    for (double& m : out.mass) {
        if (!(m >= -1e-9) || !std::isfinite(m))
            throw std::runtime_error("discretize_analytic: negative cell mass; R is not a valid box mass");
        if (m < 0.0) m = 0.0;
    }

    out.finalize();
    return out;
}

// ---------------------------------------------------------------------------
// Field draws

GaussianFieldDraw draw_from_values(const ControlMeasure& measure, std::span<const double> xi) {
    const int count = measure.atom_count();
    if (count == 0) throw std::invalid_argument("draw_field: empty control measure");
    if (static_cast<int>(xi.size()) != count)
        throw std::invalid_argument("draw_from_values: one innovation per atom required");

    GaussianFieldDraw draw;
    draw.measure = &measure;
    draw.w.resize(count);
    for (int i = 0; i < count; ++i) draw.w[i] = std::sqrt(measure.mass[i]) * xi[i];

    auto build_axis = [count](const std::vector<double>& cols, const std::vector<int>& col_of,
                              const std::vector<double>& w, std::vector<double>& prefix,
                              std::vector<double>& cumlog) {
        const std::size_t ncols = cols.size();
        std::vector<double> colsum(ncols, 0.0);
        for (int i = 0; i < count; ++i) colsum[col_of[i]] += w[i];
        prefix.assign(ncols + 1, 0.0);
        for (std::size_t j = 0; j < ncols; ++j) prefix[j + 1] = prefix[j] + colsum[j];
        cumlog.assign(ncols, 0.0);
        for (std::size_t j = 1; j < ncols; ++j)
            cumlog[j] = cumlog[j - 1] + prefix[j] * std::log(cols[j] / cols[j - 1]);
    };
    build_axis(measure.cols_u, measure.col_of_u, draw.w, draw.prefix_u, draw.cumlog_u);
    build_axis(measure.cols_v, measure.col_of_v, draw.w, draw.prefix_v, draw.cumlog_v);

    draw.prefix_sweep.assign(measure.sweep_atoms.size() + 1, 0.0);
    for (std::size_t s = 0; s < measure.sweep_atoms.size(); ++s)
        draw.prefix_sweep[s + 1] = draw.prefix_sweep[s] + draw.w[measure.sweep_atoms[s]];

    draw.total = draw.prefix_u.back();
    return draw;
}

GaussianFieldDraw draw_field(const ControlMeasure& measure, RngStream& stream) {
    std::vector<double> xi(measure.atom_count());
    for (double& value : xi) value = stream.next_normal();
    return draw_from_values(measure, xi);
}

double field_box(const GaussianFieldDraw& draw, double x, double y) {
    if (x < 0.0 || y < 0.0) throw std::invalid_argument("field_box: negative arguments");
    const ControlMeasure& m = *draw.measure;
    double acc = 0.0;
    if (m.provenance == ControlMeasure::Provenance::estimated) {
        const double kx = m.k * x;
        const double ky = m.k * y;
        for (int i = 0; i < m.atom_count(); ++i)
            if (m.pu[i] < kx && m.qv[i] < ky) acc += draw.w[i];
    } else {
        for (int i = 0; i < m.atom_count(); ++i)
            if (m.u[i] <= x && m.v[i] <= y) acc += draw.w[i];
    }
    return acc;
}

double field_marg1(const GaussianFieldDraw& draw, double x) {
    if (x < 0.0) throw std::invalid_argument("field_marg1: negative argument");
    return draw.prefix_u[draw.measure->marg1_cols(x)];
}

double field_marg2(const GaussianFieldDraw& draw, double y) {
    if (y < 0.0) throw std::invalid_argument("field_marg2: negative argument");
    return draw.prefix_v[draw.measure->marg2_cols(y)];
}

double field_cset(const GaussianFieldDraw& draw, double theta) {
    if (!(theta >= 0.0 && theta <= kHalfPi))
        throw std::invalid_argument("field_cset: theta outside [0, pi/2]");
    const auto& angles = draw.measure->sweep_angles;
    const std::size_t s = std::upper_bound(angles.begin(), angles.end(), theta) - angles.begin();
    return draw.prefix_sweep[s];
}

namespace {

// integral of the step-function marginal divided by the coordinate,
// using the per-draw prefix and cumulative-log caches
double logint_axis(const std::vector<double>& cols, const std::vector<double>& prefix,
                   const std::vector<double>& cumlog, double c) {
    if (cols.empty() || c <= cols.front()) return 0.0;
    const std::size_t idx = std::lower_bound(cols.begin(), cols.end(), c) - cols.begin();
    if (idx < cols.size() && cols[idx] == c) return cumlog[idx];
    if (idx == cols.size()) return cumlog.back() + prefix[idx] * std::log(c / cols.back());
    return cumlog[idx - 1] + prefix[idx] * std::log(c / cols[idx - 1]);
}

}  // namespace

double field_logint1(const GaussianFieldDraw& draw, double c) {
    if (!(c >= 0.0)) throw std::invalid_argument("field_logint1: negative limit");
    return logint_axis(draw.measure->cols_u, draw.prefix_u, draw.cumlog_u, c);
}

double field_logint2(const GaussianFieldDraw& draw, double c) {
    if (!(c >= 0.0)) throw std::invalid_argument("field_logint2: negative limit");
    return logint_axis(draw.measure->cols_v, draw.prefix_v, draw.cumlog_v, c);
}

// ---------------------------------------------------------------------------
// Smoothed functionals

namespace {

double tail_integral_impl(const AtomMeasure& measure, double c, Axis axis) {
    const int k = measure.k;
    const int n = measure.n;
    const double h = std::pow(k, -1.0 / 6.0);
    const double scale = 0.25 * std::pow(k, 1.0 / 3.0);
    // atoms inside the transverse window around the unit line
    const int lo = std::max(1, static_cast<int>(std::ceil(k * (1.0 - h))));
    const double hi_f = std::floor(k * (1.0 + h));
    const int hi = hi_f >= n ? n : static_cast<int>(hi_f);
    double acc = 0.0;
    for (int r = lo; r <= hi; ++r) {
        const int obs = axis == Axis::x ? measure.obs_with_qy[r] : measure.obs_with_px[r];
        const double coord = axis == Axis::x ? measure.u(obs) : measure.v(obs);
        const double from = std::max(c, coord - h);
        const double to = coord + h;
        if (to > from) acc += to - from;
    }
    return scale * acc / k;
}

}  // namespace

std::pair<double, double> smoothed_partials(const AtomMeasure& measure, double x, double y) {
    if (!(x > 0.0) || !(y > 0.0))
        throw std::invalid_argument("smoothed_partials: x and y must be positive");
    const double h = std::pow(measure.k, -0.2);
    const double scale = 0.5 * std::pow(measure.k, 0.2);
    return {scale * strip_mass(measure, x - h, x + h, 0.0, y),
            scale * strip_mass(measure, 0.0, x, y - h, y + h)};
}

double smoothed_density(const AtomMeasure& measure, double coord, Axis axis) {
    if (!(coord > 0.0)) throw std::invalid_argument("smoothed_density: coordinate must be positive");
    const double h = std::pow(measure.k, -1.0 / 6.0);
    const double scale = 0.25 * std::pow(measure.k, 1.0 / 3.0);
    if (axis == Axis::x)
        return scale * strip_mass(measure, coord - h, coord + h, 1.0 - h, 1.0 + h);
    return scale * strip_mass(measure, 1.0 - h, 1.0 + h, coord - h, coord + h);
}

double density_tail_integral(const AtomMeasure& measure, double c, Axis axis) {
    if (!(c >= 0.0)) throw std::invalid_argument("density_tail_integral: c must be nonnegative");
    return tail_integral_impl(measure, c, axis);
}

SmoothedFunctionals SmoothedFunctionals::estimated(const AtomMeasure& measure) {
    SmoothedFunctionals fn;
    fn.estimated_ = true;
    fn.atoms_ = measure;
    fn.h_partial_ = std::pow(measure.k, -0.2);
    fn.h_density_ = std::pow(measure.k, -1.0 / 6.0);
    fn.scale_partial_ = 0.5 * std::pow(measure.k, 0.2);
    fn.scale_density_ = 0.25 * std::pow(measure.k, 1.0 / 3.0);
    return fn;
}

SmoothedFunctionals SmoothedFunctionals::analytic(const AnalyticMeasure& measure) {
    SmoothedFunctionals fn;
    fn.estimated_ = false;
    fn.closed_ = measure;
    return fn;
}

double SmoothedFunctionals::r1(double x, double y) const {
    if (estimated_)
        return scale_partial_ * strip_mass(atoms_, x - h_partial_, x + h_partial_, 0.0, y);
    return closed_.r1(x, y);
}

double SmoothedFunctionals::r2(double x, double y) const {
    if (estimated_)
        return scale_partial_ * strip_mass(atoms_, 0.0, x, y - h_partial_, y + h_partial_);
    return closed_.r2(x, y);
}

double SmoothedFunctionals::lambda_x1(double x) const {
    if (estimated_)
        return scale_density_ *
               strip_mass(atoms_, x - h_density_, x + h_density_, 1.0 - h_density_, 1.0 + h_density_);
    return closed_.lambda(x, 1.0);
}

double SmoothedFunctionals::lambda_1y(double y) const {
    if (estimated_)
        return scale_density_ *
               strip_mass(atoms_, 1.0 - h_density_, 1.0 + h_density_, y - h_density_, y + h_density_);
    return closed_.lambda(1.0, y);
}

double SmoothedFunctionals::tail_x(double c) const {
    if (estimated_) return tail_integral_impl(atoms_, c, Axis::x);
    return c == kInf ? 0.0 : closed_.tail_x(c);
}

double SmoothedFunctionals::tail_y(double c) const {
    if (estimated_) return tail_integral_impl(atoms_, c, Axis::y);
    return c == kInf ? 0.0 : closed_.tail_y(c);
}

double SmoothedFunctionals::lambda_raw(double x, double y) const {
    if (estimated_)
        throw std::logic_error("lambda_raw is only available for analytic functionals");
    return closed_.lambda(x, y);
}

// ---------------------------------------------------------------------------
// Limit processes

double b_process(const GaussianFieldDraw& draw, const SmoothedFunctionals& fn, double x,
                 double y) {
    if (!(x > 0.0 && x <= 1.0 && y > 0.0 && y <= 1.0))
        throw std::invalid_argument("b_process: arguments must lie in (0, 1]");
    return field_box(draw, x, y) - fn.r1(x, y) * field_marg1(draw, x) -
           fn.r2(x, y) * field_marg2(draw, y);
}

double z_process(const GaussianFieldDraw& draw, const SmoothedFunctionals& fn, double theta) {
    if (!(theta >= 0.0 && theta <= kHalfPi))
        throw std::invalid_argument("z_process: theta outside [0, pi/2]");

    const double w1_1 = field_marg1(draw, 1.0);
    const double w2_1 = field_marg2(draw, 1.0);
    if (theta >= kHalfPi) return -w2_1 * fn.tail_x(1.0) - w1_1 * fn.tail_y(1.0);

    const double t = std::tan(theta);
    if (theta <= kQuarterPi) {
        const double cut = t > 0.0 ? 1.0 / t : kInf;
        double head;
        if (fn.is_estimated()) {
            const double lam = fn.lambda_1y(t);
            head = (t > 0.0 ? lam * t * field_logint1(draw, cut) : 0.0) -
                   lam * field_logint2(draw, 1.0);
        } else {
            head = 0.0;
            if (t > 0.0) {
                const double dx = cut / kZInnerCells;
                for (int c = 0; c < kZInnerCells; ++c) {
                    const double xc = (c + 0.5) * dx;
                    head += fn.lambda_raw(xc, xc * t) *
                            (t * field_marg1(draw, xc) - field_marg2(draw, xc * t));
                }
                head *= dx;
            }
        }
        return head - w2_1 * fn.tail_x(cut);
    }

    const double inv_t = 1.0 / t;
    double head;
    if (fn.is_estimated()) {
        const double lam = fn.lambda_x1(inv_t);
        head = lam * field_logint1(draw, 1.0) - lam * inv_t * field_logint2(draw, t);
    } else {
        head = 0.0;
        const double dx = 1.0 / kZInnerCells;
        for (int c = 0; c < kZInnerCells; ++c) {
            const double xc = (c + 0.5) * dx;
            head += fn.lambda_raw(xc, xc * t) *
                    (t * field_marg1(draw, xc) - field_marg2(draw, xc * t));
        }
        head *= dx;
    }
    return head - w2_1 * fn.tail_x(1.0) - w1_1 * (fn.tail_y(1.0) - fn.tail_y(t));
}

ThetaCache make_theta_cache(const GaussianFieldDraw& draw, const SmoothedFunctionals& fn,
                            int theta_cells) {
    if (theta_cells < 8) throw std::invalid_argument("theta grid must have at least 8 cells");
    ThetaCache cache;
    cache.cells = theta_cells + (theta_cells & 1);
    cache.delta = kHalfPi / cache.cells;
    cache.g.resize(cache.cells);
    for (int c = 0; c < cache.cells; ++c) {
        const double theta = (c + 0.5) * cache.delta;
        cache.g[c] = field_cset(draw, theta) + z_process(draw, fn, theta);
    }
    cache.g_pi2 = field_cset(draw, kHalfPi) + z_process(draw, fn, kHalfPi);

    const int half = cache.cells / 2;
    cache.pref_sin.assign(cache.cells + 1, 0.0);
    for (int j = half + 1; j <= cache.cells; ++j) {
        const double mid = (j - 0.5) * cache.delta;
        const double s = std::sin(mid);
        cache.pref_sin[j] = cache.pref_sin[j - 1] + cache.delta / (s * s) * cache.g[j - 1];
    }
    cache.pref_cos.assign(cache.cells + 1, 0.0);
    for (int j = half - 1; j >= 0; --j) {
        const double mid = (j + 0.5) * cache.delta;
        const double c = std::cos(mid);
        cache.pref_cos[j] = cache.pref_cos[j + 1] + cache.delta / (c * c) * cache.g[j];
    }
    return cache;
}

double a_process(const GaussianFieldDraw& draw, const ThetaCache& cache, double x, double y) {
    (void)draw;
    if (!(x > 0.0 && x <= 1.0 && y > 0.0 && y <= 1.0))
        throw std::invalid_argument("a_process: arguments must lie in (0, 1]");
    const double base = x * cache.g_pi2;
    if (y == x) return base;

    const double phi = std::atan2(y, x);
    const int half = cache.cells / 2;
    if (y > x) {
        int j = std::min(static_cast<int>(phi / cache.delta), cache.cells - 1);
        j = std::max(j, half);
        const double lo = j * cache.delta;
        const double plen = std::max(0.0, phi - lo);
        const double mid = lo + 0.5 * plen;
        const double s = std::sin(mid);
        return base + y * (cache.pref_sin[j] + plen / (s * s) * cache.g[j]);
    }
    int j = std::max(0, std::min(static_cast<int>(phi / cache.delta), half - 1));
    const double hi = (j + 1) * cache.delta;
    const double plen = std::max(0.0, hi - phi);
    const double mid = hi - 0.5 * plen;
    const double c = std::cos(mid);
    return base - x * (cache.pref_cos[j + 1] + plen / (c * c) * cache.g[j]);
}

// ---------------------------------------------------------------------------
// Quantiles

double empirical_quantile(std::span<const double> sorted_values, double p) {
    if (sorted_values.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("empirical_quantile: p outside (0, 1)");
    const double count = static_cast<double>(sorted_values.size());
    auto idx = static_cast<std::size_t>(std::ceil(count * p - 1e-9));
    idx = std::min(std::max<std::size_t>(idx, 1), sorted_values.size());
    return sorted_values[idx - 1];
}

double QuantileTable::at(double p) const {
    for (std::size_t i = 0; i < probs.size(); ++i)
        if (std::fabs(probs[i] - p) < 1e-12) return quantiles[i];
    throw std::invalid_argument("quantile table has no entry for the requested probability");
}

std::string QuantileTable::to_csv() const {
    std::string out = "p,q\n";
    char buf[80];
    for (std::size_t i = 0; i < probs.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", probs[i], quantiles[i]);
        out += buf;
    }
    return out;
}

std::string QuantileTable::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["probs"] = probs;
    j["quantiles"] = quantiles;
    j["reps"] = reps;
    j["k"] = k;
    j["beta"] = beta;
    j["quad_cells"] = quad_cells;
    j["theta_cells"] = theta_cells;
    j["seed"] = seed;
    return j.dump(2);
}

}  // namespace evcond
