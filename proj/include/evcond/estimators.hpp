#pragma once

#include <iosfwd>
#include <vector>

#include "evcond/sample.hpp"

namespace evcond {

/// Rank-based estimate of the spectral measure distribution function on
/// [0, pi/2]. One atom of mass 1/k per observation whose larger rank falls
/// in the top k; the c.d.f. is a right-continuous step function with total
/// mass in [1, 2].
struct SpectralCdf {
    std::vector<double> angles;    ///< atom angles, ascending
    std::vector<double> prefix_a;  ///< prefix sums of min(1, tan angle), size angles+1
    std::vector<double> prefix_b;  ///< prefix sums of min(1, cot angle), size angles+1
    int k = 0;
    int n = 0;

    /// Mass of [0, theta].
    double eval(double theta) const;
    double total() const;
    int atom_count() const { return static_cast<int>(angles.size()); }
};

SpectralCdf spectral_cdf(const RankData& ranks, int k);

/// Direct rank-count estimate of the stable tail dependence function:
/// the fraction (in units of 1/k) of observations whose x-rank exceeds
/// n+1-kx or whose y-rank exceeds n+1-ky.
double stdf_rank(const RankData& ranks, int k, double x, double y);

/// Spectral estimate of the stable tail dependence function, evaluated as
/// an exact finite sum over the atoms of phi. Positively homogeneous of
/// degree one by construction.
double stdf_spectral(const SpectralCdf& phi, double x, double y);

/// Empirical exponent measure: one atom per observation at the reversed
/// rank pair (n+1-rank)/k, each carrying mass 1/k. Integer coordinates are
/// kept so box and strip queries are exact counting.
struct AtomMeasure {
    std::vector<int> px;  ///< n+1 - x-rank, by observation
    std::vector<int> qy;  ///< n+1 - y-rank, by observation
    std::vector<int> obs_with_px;  ///< obs_with_px[p] = observation whose px == p (1-based)
    std::vector<int> obs_with_qy;
    int k = 0;
    int n = 0;

    double mass_per_atom() const { return 1.0 / k; }
    double total_mass() const { return static_cast<double>(n) / k; }
    double u(int i) const { return px[i] / static_cast<double>(k); }
    double v(int i) const { return qy[i] / static_cast<double>(k); }

    /// Atoms with px in [plo, phi] and qy in [qlo, qhi], inclusive.
    int count_rect(int plo, int phi_, int qlo, int qhi) const;
};

AtomMeasure exponent_measure(const RankData& ranks, int k);

/// Mass of [0,x] x [0,y]. An atom (p, q) counts iff p <= ceil(kx)-1 and
/// q <= ceil(ky)-1, which keeps k*l2 + k*box == ceil(kx)+ceil(ky)-2 exact.
double box_mass(const AtomMeasure& measure, double x, double y);

/// Mass of the closed rectangle [x_lo,x_hi] x [y_lo,y_hi]; negative lower
/// bounds are clamped to zero. Atoms sit on the 1/k grid, so all four
/// boundaries are counted as inside.
double strip_mass(const AtomMeasure& measure, double x_lo, double x_hi, double y_lo,
                  double y_hi);

/// Debug dump: one "p q mass" row per atom. Not a stability contract.
void save_atoms(std::ostream& out, const AtomMeasure& measure);

/// Batch evaluator for both tail dependence estimates. Setup is
/// O(n log n); l1 queries are O(log n) and l2 queries O(kx). Agrees with
/// stdf_rank exactly and with stdf_spectral to rounding.
class StdfEvaluator {
public:
    StdfEvaluator(const RankData& ranks, int k);

    double l1(double x, double y) const;
    double l2(double x, double y) const;

    const SpectralCdf& phi() const { return phi_; }
    const AtomMeasure& measure() const { return measure_; }

private:
    SpectralCdf phi_;
    AtomMeasure measure_;
};

}  // namespace evcond
