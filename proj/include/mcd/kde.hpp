#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

//! Univariate Gaussian kernel density estimator for the marginal target
//! density.  Fitting sorts the samples and fixes the normal-reference
//! bandwidth; evaluation is the direct O(n) kernel sum (exact, no binning
//! or FFT — at desk scale n stays in the thousands), so the fitted pdf is
//! an honest mixture of n Gaussians and integrates to one analytically.

namespace mcd {

namespace detail {

inline double normal_pdf(double t)
{
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * t * t);
}

inline double normal_cdf(double t)
{
    static const double inv_sqrt_2 = 0.7071067811865475244;
    return 0.5 * std::erfc(-t * inv_sqrt_2);
}

} // namespace detail

//! Fitted marginal density model: the equal-weight Gaussian mixture centred
//! at the training targets with a common bandwidth.
class MarginalDensityModel
{
public:
    //! Fits the estimator.  The bandwidth follows the normal-reference rule
    //! h = 1.06·σ̂·n^{−1/5} with σ̂ the sample standard deviation; when σ̂
    //! is zero (constant sample) the bandwidth falls back to
    //! 1e−3·max(1, |y_1|) so the model stays a proper density.
    //! @param y training targets, at least one finite value.
    explicit MarginalDensityModel(const Eigen::VectorXd& y)
    {
        if (y.size() < 1)
            throw std::invalid_argument(
                "MarginalDensityModel: need at least one sample");
        if (!y.allFinite())
            throw std::invalid_argument(
                "MarginalDensityModel: non-finite sample values");
        samples_ = y;
        std::sort(samples_.data(), samples_.data() + samples_.size());
        const auto n = static_cast<double>(samples_.size());
        double sd = 0.0;
        if (samples_.size() > 1) {
            const double mean = samples_.mean();
            sd = std::sqrt((samples_.array() - mean).square().sum() / (n - 1.0));
        }
        if (sd > 0.0)
            bandwidth_ = 1.06 * sd * std::pow(n, -0.2);
        else
            bandwidth_ = 1e-3 * std::max(1.0, std::abs(samples_(0)));
    }

    //! Density value (1/(n·h)) Σ_i φ((y − y_i)/h).
    double pdf(double y) const
    {
        const double h = bandwidth_;
        double acc = 0.0;
        for (Eigen::Index i = 0; i < samples_.size(); ++i)
            acc += detail::normal_pdf((y - samples_(i)) / h);
        return acc / (static_cast<double>(samples_.size()) * h);
    }

    //! Distribution function (1/n) Σ_i Φ((y − y_i)/h).
    double cdf(double y) const
    {
        const double h = bandwidth_;
        double acc = 0.0;
        for (Eigen::Index i = 0; i < samples_.size(); ++i)
            acc += detail::normal_cdf((y - samples_(i)) / h);
        return acc / static_cast<double>(samples_.size());
    }

    //! Quantile: the root of cdf(y*) = p, found by bisection to absolute
    //! tolerance 1e−9·(sample range + bandwidth).  The cdf is strictly
    //! increasing (positive mixture density everywhere) so the root is
    //! unique.
    //! @param p probability level, strictly inside (0, 1).
    double quantile(double p) const
    {
        if (!(p > 0.0) || !(p < 1.0)) {
            std::ostringstream msg;
            msg << "MarginalDensityModel::quantile: p must lie in (0,1), got "
                << p;
            throw std::invalid_argument(msg.str());
        }
        const double h = bandwidth_;
        const double lo_sample = samples_(0);
        const double hi_sample = samples_(samples_.size() - 1);
        double spread = 10.0 * h;
        double lo = lo_sample - spread;
        double hi = hi_sample + spread;
        // Widen until the bracket encloses p; the Gaussian tails saturate
        // the cdf to exactly 0/1 in floating point, so this terminates.
        while (cdf(lo) >= p)
            lo -= (spread *= 2.0);
        while (cdf(hi) <= p)
            hi += (spread *= 2.0);
        const double tol = 1e-9 * (hi_sample - lo_sample + h);
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            if (cdf(mid) < p)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }

    //! Density values over a whole grid (convenience wrapper around pdf).
    Eigen::VectorXd pdf_grid(const Eigen::VectorXd& grid) const
    {
        Eigen::VectorXd out(grid.size());
        for (Eigen::Index i = 0; i < grid.size(); ++i)
            out(i) = pdf(grid(i));
        return out;
    }

    //! Sorted training targets.
    const Eigen::VectorXd& samples() const { return samples_; }
    //! Normal-reference bandwidth (or the degenerate fallback).
    double bandwidth() const { return bandwidth_; }
    //! Number of training targets.
    Eigen::Index sample_count() const { return samples_.size(); }

private:
    Eigen::VectorXd samples_;
    double bandwidth_ = 0.0;
};

} // namespace mcd
