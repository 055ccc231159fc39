#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evcond/estimators.hpp"
#include "evcond/models.hpp"
#include "evcond/rng.hpp"
#include "evcond/sample.hpp"
#include "evcond/statistic.hpp"

namespace evcond {

/// Atomic control measure for the set-indexed Gaussian field. Estimated
/// measures keep the integer rank grid so box queries reproduce the
/// estimator counting conventions exactly; discretized analytic measures
/// use closed membership on the atom (cell-center) coordinates.
struct ControlMeasure {
    enum class Provenance { estimated, analytic_cells };

    Provenance provenance = Provenance::estimated;
    int k = 0;                       ///< estimated mode: rank scale
    std::vector<double> u, v, mass;  ///< atom coordinates and masses
    std::vector<int> pu, qv;         ///< estimated mode: integer coordinates

    // query caches, built by finalize()
    std::vector<double> cols_u;  ///< distinct u coordinates, ascending
    std::vector<int> col_of_u;   ///< atom -> u-column
    std::vector<double> cols_v;
    std::vector<int> col_of_v;
    std::vector<int> sweep_atoms;      ///< atoms with min(u,v) <= 1, by angle
    std::vector<double> sweep_angles;  ///< matching angles, ascending
    double total = 0.0;

    int atom_count() const { return static_cast<int>(u.size()); }

    /// Number of u-columns inside [0, x] under this measure's convention.
    int marg1_cols(double x) const;
    int marg2_cols(double y) const;
    bool box_contains(int atom, double x, double y) const;
    bool cset_contains(int atom, double tan_theta) const;

    /// Measure of [0,x] x [0,y] (atom scan; used by oracles and checks).
    double set_mass_box(double x, double y) const;
    /// Measure of C_theta = { min(u,v) <= 1, v <= u tan(theta) }.
    double set_mass_cset(double theta) const;

    void finalize();
};

ControlMeasure control_from_atoms(const AtomMeasure& measure);

struct MeshSpec {
    int cells_per_unit = 200;    ///< resolution of the [0,2]^2 square
    double strip_extent = 100;   ///< strips discretized out to here
    int strip_cells = 100;       ///< geometric cells from 2 to strip_extent

    void validate() const;  ///< rejects fewer than 50 cells per unit
};

/// Cell discretization of an analytic measure: one atom per cell carrying
/// the cell's mass by inclusion-exclusion of R, uniform cells on [0,2]^2,
/// geometric cells along the two unit strips, and two tail atoms for the
/// strip mass beyond the extent.
ControlMeasure discretize_analytic(const AnalyticMeasure& analytic, const MeshSpec& mesh = {});

/// One realization of the field: an independent standard normal per atom,
/// with prefix caches for marginal, angular-sweep and log-weighted
/// integral queries.
struct GaussianFieldDraw {
    const ControlMeasure* measure = nullptr;
    std::vector<double> w;             ///< sqrt(mass) * xi per atom
    std::vector<double> prefix_u;      ///< by u-column, size cols+1
    std::vector<double> prefix_v;
    std::vector<double> prefix_sweep;  ///< by angle order, size sweep+1
    std::vector<double> cumlog_u;      ///< integral of W1(t)/t over (0, cols_u[i]]
    std::vector<double> cumlog_v;
    double total = 0.0;
};

GaussianFieldDraw draw_field(const ControlMeasure& measure, RngStream& stream);
/// Same construction from caller-provided innovations (testing hook).
GaussianFieldDraw draw_from_values(const ControlMeasure& measure, std::span<const double> xi);

double field_box(const GaussianFieldDraw& draw, double x, double y);
double field_marg1(const GaussianFieldDraw& draw, double x);
double field_marg2(const GaussianFieldDraw& draw, double y);
double field_cset(const GaussianFieldDraw& draw, double theta);

/// Exact integral of W1(t)/t (resp. W2) over (0, c]. The field marginal is
/// a step function of the atom coordinates and vanishes below the smallest
/// one, so the integral is a finite sum of level * log-ratio terms.
double field_logint1(const GaussianFieldDraw& draw, double c);
double field_logint2(const GaussianFieldDraw& draw, double c);

enum class Axis { x, y };

/// Kernel-style rectangle estimates of the partial derivatives of R at
/// bandwidth k^{-1/5}, computed from the empirical exponent measure.
std::pair<double, double> smoothed_partials(const AtomMeasure& measure, double x, double y);
/// Rectangle estimate of the density along the unit lines at bandwidth
/// k^{-1/6}: lambda(x, 1) for Axis::x, lambda(1, y) for Axis::y.
double smoothed_density(const AtomMeasure& measure, double coord, Axis axis);
/// Exact integral over [c, inf) of the piecewise-constant smoothed density
/// along the chosen unit line.
double density_tail_integral(const AtomMeasure& measure, double c, Axis axis);

/// Functional parameters of the limit processes: either smoothed rectangle
/// estimates from an empirical measure or closed forms.
class SmoothedFunctionals {
public:
    static SmoothedFunctionals estimated(const AtomMeasure& measure);
    static SmoothedFunctionals analytic(const AnalyticMeasure& measure);

    bool is_estimated() const { return estimated_; }
    double r1(double x, double y) const;
    double r2(double x, double y) const;
    double lambda_x1(double x) const;  ///< lambda(x, 1), x >= 0
    double lambda_1y(double y) const;  ///< lambda(1, y), y >= 0
    double tail_x(double c) const;     ///< integral of lambda(., 1) over [c, inf)
    double tail_y(double c) const;
    /// Closed-form density at an arbitrary point; analytic mode only.
    double lambda_raw(double x, double y) const;

private:
    SmoothedFunctionals() = default;

    bool estimated_ = false;
    AtomMeasure atoms_;  // estimated mode
    double h_partial_ = 0.0;
    double h_density_ = 0.0;
    double scale_partial_ = 0.0;
    double scale_density_ = 0.0;
    AnalyticMeasure closed_;  // analytic mode
};

/// Gaussian fluctuation process of the rank-count estimate:
/// W_R(x,y) - R1(x,y) W1(x) - R2(x,y) W2(y).
double b_process(const GaussianFieldDraw& draw, const SmoothedFunctionals& fn, double x,
                 double y);

/// Correction process entering the spectral limit; evaluated exactly from
/// the step-function marginals in estimated mode and by fixed-cell
/// midpoint quadrature of the density integral in analytic mode.
double z_process(const GaussianFieldDraw& draw, const SmoothedFunctionals& fn, double theta);

/// Midpoint cache of W(C_theta) + Z(theta) on a uniform theta grid, with
/// prefix tables for the two weighted integrals away from pi/4.
struct ThetaCache {
    int cells = 0;  ///< even
    double delta = 0.0;
    std::vector<double> g;  ///< values at cell midpoints
    double g_pi2 = 0.0;
    std::vector<double> pref_sin;  ///< integral over [pi/4, cell j start)
    std::vector<double> pref_cos;  ///< integral over [cell j start, pi/4)
};

ThetaCache make_theta_cache(const GaussianFieldDraw& draw, const SmoothedFunctionals& fn,
                            int theta_cells);

/// Gaussian fluctuation process of the spectral estimate, assembled from
/// the cached theta grid with exact partial-cell handling at arctan(y/x).
double a_process(const GaussianFieldDraw& draw, const ThetaCache& cache, double x, double y);

struct QuantileTable {
    std::vector<double> probs;
    std::vector<double> quantiles;
    int reps = 0;
    // config echo
    int k = 0;
    double beta = 0.0;
    int quad_cells = 0;
    int theta_cells = 0;
    std::uint64_t seed = 0;

    double at(double p) const;  ///< exact-prob lookup
    std::string to_csv() const;
    std::string to_json() const;
};

/// Order statistic at ceil(reps * p) of sorted replicate values.
double empirical_quantile(std::span<const double> sorted_values, double p);

/// One draw of the approximate limiting variable: field draw, theta cache,
/// then the weighted squared integral of A + B over the unit square.
double limit_replicate(const ControlMeasure& measure, const SmoothedFunctionals& fn,
                       double beta, const QuadSpec& quad, int theta_cells, RngStream& stream);

QuantileTable limit_quantiles(const ControlMeasure& measure, const SmoothedFunctionals& fn,
                              double beta, int reps, std::span<const double> probs,
                              const QuadSpec& quad, int theta_cells, std::uint64_t seed);

/// Precomputes every draw-independent quantity for one (measure,
/// functionals, grid) combination and evaluates replicates for several
/// weight exponents from shared draws. Replicates are deterministic
/// functions of (seed, replicate index).
class ReplicateEngine {
public:
    ReplicateEngine(const ControlMeasure& measure, const SmoothedFunctionals& fn,
                    std::vector<double> betas, const QuadSpec& quad, int theta_cells);
    ~ReplicateEngine();
    ReplicateEngine(const ReplicateEngine&) = delete;
    ReplicateEngine& operator=(const ReplicateEngine&) = delete;

    int beta_count() const;
    int grid_cells() const;

    /// Per-beta values of one replicate.
    std::vector<double> replicate(RngStream& stream) const;
    std::vector<double> replicate_from_values(std::span<const double> xi) const;

    /// values[b][r] for r = 0..reps-1, computed in parallel with one
    /// counter-based stream per replicate.
    std::vector<std::vector<double>> run(int reps, std::uint64_t seed) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace evcond
