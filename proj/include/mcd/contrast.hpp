#pragma once

#include <sstream>
#include <stdexcept>

//! Contrast algebra: the exact identities linking a joint density, its
//! marginals, the contrast value q, and the conditional density.  These are
//! pure value-level functions (no estimation), used both by the estimator
//! pipeline and as oracles in the test suite.
//!
//! The central object is the marginal contrast with ratio r,
//!
//!     q(x, y) = r·p_XY(x,y) / (r·p_XY(x,y) + (1−r)·p_X(x)·p_Y(y)),
//!
//! which a binary classifier can estimate from a labelled contrast dataset,
//! and which inverts to the conditional density via
//!
//!     p(y|x) = p_Y(y) · q/(1−q) · (1−r)/r.

namespace mcd {

//! Mixing ratio r ∈ (0, 1): the fraction (or Bernoulli parameter) of matched
//! pairs in a contrast dataset.  Construction rejects the boundary values,
//! where the contrast degenerates.
class Ratio
{
public:
    //! @param r value in the open interval (0, 1).
    explicit Ratio(double r)
        : r_(r)
    {
        if (!(r > 0.0) || !(r < 1.0)) {
            std::ostringstream msg;
            msg << "Ratio: r must lie strictly between 0 and 1, got " << r;
            throw std::invalid_argument(msg.str());
        }
    }

    double value() const { return r_; }

private:
    double r_;
};

//! A triple of density values at one point: joint p_XY(x,y) and the two
//! marginals p_X(x), p_Y(y).  All values must be nonnegative.
struct DensityTriple
{
    double p_xy;
    double p_x;
    double p_y;
};

//! Evaluates the marginal contrast q from exact density values.
//! @param d density values at the evaluation point.
//! @param r mixing ratio.
//! @return q ∈ [0, 1); strictly below 1 whenever p_x·p_y > 0.
//! @throw std::domain_error if the denominator r·p_xy + (1−r)·p_x·p_y is zero.
inline double marginal_contrast(const DensityTriple& d, const Ratio& r)
{
    const double num = r.value() * d.p_xy;
    const double den = num + (1.0 - r.value()) * d.p_x * d.p_y;
    if (den <= 0.0) {
        std::ostringstream msg;
        msg << "marginal_contrast: zero denominator (p_xy = " << d.p_xy
            << ", p_x = " << d.p_x << ", p_y = " << d.p_y
            << ", r = " << r.value() << ")";
        throw std::domain_error(msg.str());
    }
    return num / den;
}

//! Recovers the conditional density from a marginal density value and a
//! contrast value (the plug-in identity).
//! @param p_y marginal density value, ≥ 0.
//! @param q contrast value, must be < 1 (threshold before calling).
//! @param r mixing ratio.
//! @return p_y · q/(1−q) · (1−r)/r, always ≥ 0.
//! @throw std::domain_error if q ≥ 1.
inline double conditional_from_contrast(double p_y, double q, const Ratio& r)
{
    if (q >= 1.0) {
        std::ostringstream msg;
        msg << "conditional_from_contrast: q must be < 1, got " << q
            << " (apply thresholding first)";
        throw std::domain_error(msg.str());
    }
    return p_y * (q / (1.0 - q)) * ((1.0 - r.value()) / r.value());
}

//! Algebraic inverse of conditional_from_contrast: the contrast value implied
//! by a conditional and a marginal density value.  Composing the two maps is
//! the identity on the conditional, which makes this the roundtrip oracle of
//! the test suite.
//! @param p_cond conditional density value, ≥ 0.
//! @param p_y marginal density value, must be > 0.
//! @param r mixing ratio.
//! @return q ∈ [0, 1).
inline double contrast_from_conditional(double p_cond, double p_y, const Ratio& r)
{
    if (!(p_y > 0.0)) {
        std::ostringstream msg;
        msg << "contrast_from_conditional: p_y must be positive, got " << p_y;
        throw std::domain_error(msg.str());
    }
    const double num = r.value() * p_cond;
    return num / (num + (1.0 - r.value()) * p_y);
}

} // namespace mcd
