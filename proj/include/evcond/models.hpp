#pragma once

#include <functional>

#include "evcond/rng.hpp"
#include "evcond/sample.hpp"

namespace evcond {

/// Closed-form description of an exponent measure with a density: the
/// joint-tail mass R(x,y) on boxes, its density and partial derivatives,
/// the induced tail dependence function, and the tail integrals of the
/// density along the two unit lines.
struct AnalyticMeasure {
    std::function<double(double, double)> R;
    std::function<double(double, double)> lambda;
    std::function<double(double, double)> l;
    std::function<double(double, double)> r1;  ///< dR/dx
    std::function<double(double, double)> r2;  ///< dR/dy
    std::function<double(double)> tail_x;      ///< integral of lambda(., 1) over [c, inf)
    std::function<double(double)> tail_y;      ///< integral of lambda(1, .) over [c, inf)
};

/// First-quadrant bivariate Cauchy ground truth:
/// R(x,y) = x + y - sqrt(x^2+y^2), lambda(x,y) = xy (x^2+y^2)^{-3/2}.
AnalyticMeasure cauchy_analytic();

/// I.i.d. draws from the bivariate Cauchy density 2/pi (1+x^2+y^2)^{-3/2}
/// on the first quadrant, via the normal-ratio fold (|N1/N3|, |N2/N3|).
BivariateSample sample_cauchy(int n, RngStream& stream);

/// Pairs (U, 1-V) where (U, V) follows the Gumbel copula with parameter
/// theta >= 1, sampled exactly through positive-stable mixing.
BivariateSample sample_gumbel(int n, double theta, RngStream& stream);

/// A copula outside the extreme value domain of attraction: density 3/2 on
/// the dyadic rectangles [2^-(2m+1), 2^-2m] x [2^-(2r+1), 2^-2r] (total
/// mass 2/3) plus uniform mass 2^-(2m+2) on the diagonal segments from
/// (2^-(2m+2), 2^-(2m+2)) to (2^-(2m+1), 2^-(2m+1)).
BivariateSample sample_alternative(int n, RngStream& stream);

}  // namespace evcond
