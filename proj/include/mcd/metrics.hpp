#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

//! Evaluation functionals for benchmark runs: the empirical KL divergence
//! over a shared prediction grid and the empirical negative log-likelihood
//! at held-out targets, both stabilized by clamping densities below at a
//! small delta.
//!
//! The empirical KL is an UNWEIGHTED double sum over test points and grid
//! points — no grid-spacing weight and no division by the number of test
//! points.  Its value therefore scales with both the grid resolution and
//! the test-set size, and it is not guaranteed to be nonnegative (the
//! clamped f is not renormalized).  A trapezoid-weighted variant is
//! provided under a distinct name for sanity checks against closed-form
//! divergences; benchmark tables use the unweighted sum.

namespace mcd {

//! One benchmark table cell.
struct EvaluationReport
{
    std::string method;  //!< estimator name (e.g. "mcd_mlp", "marginal_kde")
    std::string model;   //!< density model or dataset name
    std::string metric;  //!< "KL" or "NLL"
    double value = 0.0;  //!< metric value (finite)
    Eigen::Index n_test = 0;     //!< held-out observations evaluated
    Eigen::Index grid_size = 0;  //!< prediction grid length (0 for NLL)
    Eigen::Index contrast_n = 0; //!< realized contrast-set size N
    double ratio = 0.0;          //!< matched-pair ratio r used in training
    std::uint64_t seed = 0;      //!< seed that reproduces the cell
    double wall_time_seconds = 0.0;
};

namespace detail {

inline void check_same_shape(const Eigen::MatrixXd& f, const Eigen::MatrixXd& g)
{
    if (f.rows() != g.rows() || f.cols() != g.cols()) {
        std::ostringstream msg;
        msg << "empirical_kl: shape mismatch, true pdfs are " << f.rows()
            << "x" << f.cols() << " but predictions are " << g.rows() << "x"
            << g.cols();
        throw std::invalid_argument(msg.str());
    }
}

} // namespace detail

//! Unweighted empirical KL divergence: Σ over every (test point, grid
//! point) cell of  max(f, δ) · ln(max(f, δ) / max(g, δ)).
//! @param true_pdfs one row per test point, one column per grid point.
//! @param pred_pdfs same shape: the estimator's values on the same grid.
//! @param delta stability clamp, > 0.
inline double empirical_kl(const Eigen::MatrixXd& true_pdfs,
                           const Eigen::MatrixXd& pred_pdfs,
                           double delta = 1e-6)
{
    detail::check_same_shape(true_pdfs, pred_pdfs);
    if (!(delta > 0.0))
        throw std::invalid_argument("empirical_kl: delta must be positive");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < true_pdfs.rows(); ++i) {
        for (Eigen::Index j = 0; j < true_pdfs.cols(); ++j) {
            const double f = std::max(true_pdfs(i, j), delta);
            const double g = std::max(pred_pdfs(i, j), delta);
            sum += f * std::log(f / g);
        }
    }
    return sum;
}

//! Trapezoid-weighted KL divergence, averaged over test points: for each
//! row, Σ_j w_j · max(f,δ) · ln(max(f,δ)/max(g,δ)) with the trapezoid
//! quadrature weights of the grid, then the mean across rows.  This
//! approximates E_x[KL(f_x ‖ g_x)] and is the right scale for comparison
//! against closed-form divergences; it is NOT the benchmark functional.
inline double weighted_empirical_kl(const Eigen::MatrixXd& true_pdfs,
                                    const Eigen::MatrixXd& pred_pdfs,
                                    const Eigen::VectorXd& grid,
                                    double delta = 1e-6)
{
    detail::check_same_shape(true_pdfs, pred_pdfs);
    if (grid.size() != true_pdfs.cols())
        throw std::invalid_argument(
            "weighted_empirical_kl: grid length does not match the pdf "
            "columns");
    if (grid.size() < 2)
        throw std::invalid_argument(
            "weighted_empirical_kl: need at least 2 grid points");
    if (!(delta > 0.0))
        throw std::invalid_argument(
            "weighted_empirical_kl: delta must be positive");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(grid.size());
    for (Eigen::Index j = 0; j + 1 < grid.size(); ++j) {
        const double h = grid(j + 1) - grid(j);
        if (!(h > 0.0))
            throw std::invalid_argument(
                "weighted_empirical_kl: grid must be strictly increasing");
        w(j) += 0.5 * h;
        w(j + 1) += 0.5 * h;
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < true_pdfs.rows(); ++i) {
        double row = 0.0;
        for (Eigen::Index j = 0; j < true_pdfs.cols(); ++j) {
            const double f = std::max(true_pdfs(i, j), delta);
            const double g = std::max(pred_pdfs(i, j), delta);
            row += w(j) * f * std::log(f / g);
        }
        total += row;
    }
    return total / static_cast<double>(true_pdfs.rows());
}

//! Empirical negative log-likelihood: −Σ ln(max(g, δ)) over the predicted
//! densities at the held-out true targets.
inline double empirical_nll(const Eigen::VectorXd& pred_at_true_targets,
                            double delta = 1e-6)
{
    if (!(delta > 0.0))
        throw std::invalid_argument("empirical_nll: delta must be positive");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < pred_at_true_targets.size(); ++i)
        sum -= std::log(std::max(pred_at_true_targets(i), delta));
    return sum;
}

} // namespace mcd
