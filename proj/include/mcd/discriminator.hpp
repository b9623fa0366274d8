#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mcd/data.hpp"

//! Binary classifiers estimating the contrast q(w) = P[z = 1 | w] from a
//! contrast dataset, behind one interface so any probabilistic classifier
//! can serve as the discriminator.  Two implementations are built in:
//!
//!   - an elastic-net penalized logistic regression trained by full-batch
//!     gradient descent with backtracking line search, and
//!   - a two-hidden-layer rectified-linear perceptron with sigmoid output,
//!     trained by adaptive-moment stochastic gradient descent on the binary
//!     cross-entropy.
//!
//! Both standardize the input columns at fit time and replay the same
//! transform at prediction, and both are deterministic given the spec seed.
//! The training objectives are exposed as standalone loss/gradient
//! functions so the analytic gradients can be checked against finite
//! differences.

namespace mcd {

//! Per-column affine transform captured at fit time: subtract the column
//! mean, divide by the column standard deviation (constant columns keep
//! scale one so they map to exact zero).
struct Standardization
{
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;

    static Standardization fit(const Eigen::MatrixXd& w)
    {
        Standardization s;
        s.mean = w.colwise().mean();
        s.scale.resize(w.cols());
        const auto n = static_cast<double>(w.rows());
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            const double var =
                (w.col(c).array() - s.mean(c)).square().sum() / n;
            const double sd = std::sqrt(var);
            s.scale(c) = sd > 0.0 ? sd : 1.0;
        }
        return s;
    }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& w) const
    {
        return (w.rowwise() - mean).array().rowwise() / scale.array();
    }
};

//! Which classifier the spec requests.
enum class DiscriminatorKind { logistic_elasticnet, mlp };

//! Hyperparameters of the perceptron discriminator.
struct MlpHyperparams
{
    Eigen::Index hidden1 = 64;   //!< width of the first hidden layer
    Eigen::Index hidden2 = 64;   //!< width of the second hidden layer
    double learning_rate = 1e-3; //!< adaptive-moment step size
    int epochs = 200;            //!< passes over the contrast data
    Eigen::Index batch = 64;     //!< mini-batch size
};

//! Hyperparameters of the elastic-net logistic discriminator.
struct LogisticHyperparams
{
    double l1 = 1e-4;       //!< absolute-value penalty weight
    double l2 = 1e-4;       //!< squared-norm penalty weight
    int max_iters = 1000;   //!< full-batch descent iterations
    double grad_tol = 1e-8; //!< stop when the gradient norm drops below
};

//! Classifier request: the kind, its hyperparameters and the seed that
//! makes initialization and mini-batch order reproducible.
struct DiscriminatorSpec
{
    DiscriminatorKind kind = DiscriminatorKind::mlp;
    MlpHyperparams mlp;
    LogisticHyperparams logistic;
    std::uint64_t seed = 0;

    //! Eagerly rejects unusable settings (non-positive learning rate or
    //! batch, negative penalties or epoch counts).
    void validate() const
    {
        if (!(mlp.learning_rate > 0.0))
            throw std::invalid_argument(
                "DiscriminatorSpec: learning rate must be positive");
        if (mlp.epochs < 0)
            throw std::invalid_argument(
                "DiscriminatorSpec: epoch count cannot be negative");
        if (mlp.batch < 1 || mlp.hidden1 < 1 || mlp.hidden2 < 1)
            throw std::invalid_argument(
                "DiscriminatorSpec: batch size and hidden widths must be >= 1");
        if (logistic.l1 < 0.0 || logistic.l2 < 0.0)
            throw std::invalid_argument(
                "DiscriminatorSpec: penalty weights cannot be negative");
        if (logistic.max_iters < 1)
            throw std::invalid_argument(
                "DiscriminatorSpec: iteration budget must be >= 1");
    }
};

namespace detail {

inline double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

//! Numerically stable binary cross-entropy of one pre-activation:
//! softplus(s) − z·s = −[z·ln σ(s) + (1−z)·ln(1 − σ(s))].
inline double bce_from_logit(double s, double z)
{
    return std::max(s, 0.0) + std::log1p(std::exp(-std::abs(s))) - z * s;
}

} // namespace detail

//! A fitted classifier: immutable, thread-safe to query.  Predictions apply
//! the standardization captured at fit time and always land in [0, 1].
class Discriminator
{
public:
    virtual ~Discriminator() = default;

    //! Class-1 probability for every row of `w` (raw, unstandardized scale).
    //! @param w query rows, width must equal input_width().
    Eigen::VectorXd predict_proba_batch(const Eigen::MatrixXd& w) const
    {
        if (w.cols() != input_width_) {
            std::ostringstream msg;
            msg << "Discriminator: query width " << w.cols()
                << " does not match the fitted input width " << input_width_;
            throw std::invalid_argument(msg.str());
        }
        return predict_standardized(standardization_.apply(w));
    }

    //! Class-1 probability of a single (x, y) row.
    double predict_proba(const Eigen::RowVectorXd& w) const
    {
        return predict_proba_batch(w)(0);
    }

    DiscriminatorKind kind() const { return kind_; }
    Eigen::Index input_width() const { return input_width_; }
    const Standardization& standardization() const { return standardization_; }

protected:
    Discriminator(DiscriminatorKind kind, Eigen::Index width, Standardization s)
        : kind_(kind)
        , input_width_(width)
        , standardization_(std::move(s))
    {
    }

    //! Probability of class 1 on already-standardized rows.
    virtual Eigen::VectorXd
    predict_standardized(const Eigen::MatrixXd& w_std) const = 0;

private:
    DiscriminatorKind kind_;
    Eigen::Index input_width_;
    Standardization standardization_;
};

//! Objective of the elastic-net logistic discriminator: mean binary
//! cross-entropy plus l2·‖w‖² + l1·‖w‖₁ over the weights (the intercept is
//! not penalized).  `theta` stacks the weights first, intercept last.
//! Returns the loss and writes the (sub)gradient; at weight exactly zero
//! the absolute-value term contributes slope zero.
inline double logistic_loss_grad(const Eigen::VectorXd& theta,
                                 const Eigen::MatrixXd& w_std,
                                 const Eigen::VectorXd& z, double l1, double l2,
                                 Eigen::VectorXd& grad)
{
    const Eigen::Index n = w_std.rows();
    const Eigen::Index d = w_std.cols();
    const Eigen::VectorXd weights = theta.head(d);
    const double bias = theta(d);
    const Eigen::VectorXd s =
        (w_std * weights).array() + bias; // pre-activations
    double loss = 0.0;
    Eigen::VectorXd residual(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        loss += detail::bce_from_logit(s(i), z(i));
        residual(i) = detail::sigmoid(s(i)) - z(i);
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    loss *= inv_n;
    grad.resize(d + 1);
    grad.head(d) = (w_std.transpose() * residual) * inv_n;
    grad(d) = residual.sum() * inv_n;
    loss += l2 * weights.squaredNorm() + l1 * weights.lpNorm<1>();
    grad.head(d) += 2.0 * l2 * weights;
    for (Eigen::Index j = 0; j < d; ++j)
        grad(j) += l1 * (weights(j) > 0.0 ? 1.0 : (weights(j) < 0.0 ? -1.0 : 0.0));
    return loss;
}

//! Fitted elastic-net logistic discriminator.
class LogisticElasticNet : public Discriminator
{
public:
    LogisticElasticNet(Eigen::VectorXd weights, double bias, Standardization s,
                       DiscriminatorSpec spec)
        : Discriminator(DiscriminatorKind::logistic_elasticnet,
                        weights.size(), std::move(s))
        , weights_(std::move(weights))
        , bias_(bias)
        , spec_(std::move(spec))
    {
    }

    const Eigen::VectorXd& weights() const { return weights_; }
    double bias() const { return bias_; }
    const DiscriminatorSpec& spec() const { return spec_; }

protected:
    Eigen::VectorXd
    predict_standardized(const Eigen::MatrixXd& w_std) const override
    {
        Eigen::VectorXd s = (w_std * weights_).array() + bias_;
        for (Eigen::Index i = 0; i < s.size(); ++i)
            s(i) = detail::sigmoid(s(i));
        return s;
    }

private:
    Eigen::VectorXd weights_;
    double bias_;
    DiscriminatorSpec spec_;
};

//! Layer sizes of the perceptron; fixes the flat parameter layout used by
//! the optimizer and the finite-difference checks (column-major blocks in
//! the order W1, b1, W2, b2, w3, b3).
struct MlpShape
{
    Eigen::Index input = 0;
    Eigen::Index hidden1 = 64;
    Eigen::Index hidden2 = 64;

    Eigen::Index size() const
    {
        return input * hidden1 + hidden1 + hidden1 * hidden2 + hidden2
            + hidden2 + 1;
    }
};

namespace detail {

//! Read-only views of the flat parameter vector as layer matrices.
struct MlpView
{
    Eigen::Map<const Eigen::MatrixXd> w1;
    Eigen::Map<const Eigen::VectorXd> b1;
    Eigen::Map<const Eigen::MatrixXd> w2;
    Eigen::Map<const Eigen::VectorXd> b2;
    Eigen::Map<const Eigen::VectorXd> w3;
    const double* b3;

    explicit MlpView(const MlpShape& sh, const double* p)
        : w1(p, sh.input, sh.hidden1)
        , b1(p + sh.input * sh.hidden1, sh.hidden1)
        , w2(p + sh.input * sh.hidden1 + sh.hidden1, sh.hidden1, sh.hidden2)
        , b2(p + sh.input * sh.hidden1 + sh.hidden1 + sh.hidden1 * sh.hidden2,
             sh.hidden2)
        , w3(p + sh.input * sh.hidden1 + sh.hidden1 + sh.hidden1 * sh.hidden2
                 + sh.hidden2,
             sh.hidden2)
        , b3(p + sh.input * sh.hidden1 + sh.hidden1 + sh.hidden1 * sh.hidden2
             + 2 * sh.hidden2)
    {
    }
};

//! Mutable counterpart of MlpView.
struct MlpViewMut
{
    Eigen::Map<Eigen::MatrixXd> w1;
    Eigen::Map<Eigen::VectorXd> b1;
    Eigen::Map<Eigen::MatrixXd> w2;
    Eigen::Map<Eigen::VectorXd> b2;
    Eigen::Map<Eigen::VectorXd> w3;
    double* b3;

    explicit MlpViewMut(const MlpShape& sh, double* p)
        : w1(p, sh.input, sh.hidden1)
        , b1(p + sh.input * sh.hidden1, sh.hidden1)
        , w2(p + sh.input * sh.hidden1 + sh.hidden1, sh.hidden1, sh.hidden2)
        , b2(p + sh.input * sh.hidden1 + sh.hidden1 + sh.hidden1 * sh.hidden2,
             sh.hidden2)
        , w3(p + sh.input * sh.hidden1 + sh.hidden1 + sh.hidden1 * sh.hidden2
                 + sh.hidden2,
             sh.hidden2)
        , b3(p + sh.input * sh.hidden1 + sh.hidden1 + sh.hidden1 * sh.hidden2
             + 2 * sh.hidden2)
    {
    }
};

//! Forward pass to pre-activation logits.
inline Eigen::VectorXd mlp_logits(const MlpShape& sh,
                                  const Eigen::VectorXd& params,
                                  const Eigen::MatrixXd& w_std)
{
    const MlpView v(sh, params.data());
    const Eigen::MatrixXd a1 =
        ((w_std * v.w1).rowwise() + v.b1.transpose()).cwiseMax(0.0);
    const Eigen::MatrixXd a2 =
        ((a1 * v.w2).rowwise() + v.b2.transpose()).cwiseMax(0.0);
    return (a2 * v.w3).array() + *v.b3;
}

} // namespace detail

//! Objective of the perceptron discriminator: mean binary cross-entropy of
//! the sigmoid output over the given rows.  Returns the loss and writes the
//! analytic gradient in the flat layout of MlpShape.
inline double mlp_loss_grad(const MlpShape& sh, const Eigen::VectorXd& params,
                            const Eigen::MatrixXd& w_std,
                            const Eigen::VectorXd& z, Eigen::VectorXd& grad)
{
    const Eigen::Index n = w_std.rows();
    const detail::MlpView v(sh, params.data());

    const Eigen::MatrixXd a1 =
        ((w_std * v.w1).rowwise() + v.b1.transpose()).cwiseMax(0.0);
    const Eigen::MatrixXd a2 =
        ((a1 * v.w2).rowwise() + v.b2.transpose()).cwiseMax(0.0);
    const Eigen::VectorXd s = (a2 * v.w3).array() + *v.b3;

    double loss = 0.0;
    Eigen::VectorXd ds(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        loss += detail::bce_from_logit(s(i), z(i));
        ds(i) = (detail::sigmoid(s(i)) - z(i)) * inv_n;
    }
    loss *= inv_n;

    grad.setZero(sh.size());
    detail::MlpViewMut g(sh, grad.data());
    g.w3 = a2.transpose() * ds;
    *g.b3 = ds.sum();
    Eigen::MatrixXd da2 = ds * v.w3.transpose();
    da2 = (a2.array() > 0.0).select(da2, 0.0);
    g.w2 = a1.transpose() * da2;
    g.b2 = da2.colwise().sum();
    Eigen::MatrixXd da1 = da2 * v.w2.transpose();
    da1 = (a1.array() > 0.0).select(da1, 0.0);
    g.w1 = w_std.transpose() * da1;
    g.b1 = da1.colwise().sum();
    return loss;
}

//! Fitted perceptron discriminator.
class MlpClassifier : public Discriminator
{
public:
    MlpClassifier(MlpShape shape, Eigen::VectorXd params, Standardization s,
                  DiscriminatorSpec spec)
        : Discriminator(DiscriminatorKind::mlp, shape.input, std::move(s))
        , shape_(shape)
        , params_(std::move(params))
        , spec_(std::move(spec))
    {
    }

    const MlpShape& shape() const { return shape_; }
    const Eigen::VectorXd& params() const { return params_; }
    const DiscriminatorSpec& spec() const { return spec_; }

protected:
    Eigen::VectorXd
    predict_standardized(const Eigen::MatrixXd& w_std) const override
    {
        Eigen::VectorXd s = detail::mlp_logits(shape_, params_, w_std);
        for (Eigen::Index i = 0; i < s.size(); ++i)
            s(i) = detail::sigmoid(s(i));
        return s;
    }

private:
    MlpShape shape_;
    Eigen::VectorXd params_;
    DiscriminatorSpec spec_;
};

namespace detail {

inline std::shared_ptr<const Discriminator>
fit_logistic(const DiscriminatorSpec& spec, const Eigen::MatrixXd& w_std,
             const Eigen::VectorXd& z, Standardization std_rec)
{
    const Eigen::Index d = w_std.cols();
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
    Eigen::VectorXd grad;
    double loss = logistic_loss_grad(theta, w_std, z, spec.logistic.l1,
                                     spec.logistic.l2, grad);
    for (int it = 0; it < spec.logistic.max_iters; ++it) {
        if (grad.norm() < spec.logistic.grad_tol)
            break;
        // Backtracking line search along the negative gradient.
        double step = 1.0;
        const double slope = grad.squaredNorm();
        Eigen::VectorXd trial_grad;
        for (int shrink = 0; shrink < 60; ++shrink) {
            const Eigen::VectorXd trial = theta - step * grad;
            const double trial_loss =
                logistic_loss_grad(trial, w_std, z, spec.logistic.l1,
                                   spec.logistic.l2, trial_grad);
            if (trial_loss <= loss - 1e-4 * step * slope) {
                theta = trial;
                loss = trial_loss;
                grad = trial_grad;
                break;
            }
            step *= 0.5;
        }
    }
    return std::make_shared<LogisticElasticNet>(theta.head(d), theta(d),
                                                std::move(std_rec), spec);
}

inline std::shared_ptr<const Discriminator>
fit_mlp(const DiscriminatorSpec& spec, const Eigen::MatrixXd& w_std,
        const Eigen::VectorXd& z, Standardization std_rec)
{
    const Eigen::Index n = w_std.rows();
    MlpShape shape;
    shape.input = w_std.cols();
    shape.hidden1 = spec.mlp.hidden1;
    shape.hidden2 = spec.mlp.hidden2;

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd params = Eigen::VectorXd::Zero(shape.size());
    {
        // Hidden layers draw from N(0, 2/fan_in); the output layer starts
        // at zero so the untrained network predicts exactly one half.
        MlpViewMut v(shape, params.data());
        const double s1 = std::sqrt(2.0 / static_cast<double>(shape.input));
        for (Eigen::Index c = 0; c < v.w1.cols(); ++c)
            for (Eigen::Index r = 0; r < v.w1.rows(); ++r)
                v.w1(r, c) = s1 * gauss(rng);
        const double s2 = std::sqrt(2.0 / static_cast<double>(shape.hidden1));
        for (Eigen::Index c = 0; c < v.w2.cols(); ++c)
            for (Eigen::Index r = 0; r < v.w2.rows(); ++r)
                v.w2(r, c) = s2 * gauss(rng);
    }

    // Adaptive-moment descent on mini-batches.
    const double beta1 = 0.9;
    const double beta2 = 0.999;
    const double adam_eps = 1e-8;
    Eigen::VectorXd m = Eigen::VectorXd::Zero(shape.size());
    Eigen::VectorXd vmom = Eigen::VectorXd::Zero(shape.size());
    Eigen::VectorXd grad(shape.size());
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    long step_count = 0;
    for (int epoch = 0; epoch < spec.mlp.epochs; ++epoch) {
        for (Eigen::Index i = n - 1; i > 0; --i) {
            std::uniform_int_distribution<Eigen::Index> pick(0, i);
            std::swap(order[static_cast<std::size_t>(i)],
                      order[static_cast<std::size_t>(pick(rng))]);
        }
        for (Eigen::Index start = 0; start < n; start += spec.mlp.batch) {
            const Eigen::Index len = std::min(spec.mlp.batch, n - start);
            Eigen::MatrixXd xb(len, shape.input);
            Eigen::VectorXd zb(len);
            for (Eigen::Index i = 0; i < len; ++i) {
                xb.row(i) = w_std.row(order[static_cast<std::size_t>(start + i)]);
                zb(i) = z(order[static_cast<std::size_t>(start + i)]);
            }
            mlp_loss_grad(shape, params, xb, zb, grad);
            ++step_count;
            const double corr1 =
                1.0 - std::pow(beta1, static_cast<double>(step_count));
            const double corr2 =
                1.0 - std::pow(beta2, static_cast<double>(step_count));
            m = beta1 * m + (1.0 - beta1) * grad;
            vmom = beta2 * vmom.array() + (1.0 - beta2) * grad.array().square();
            params.array() -= spec.mlp.learning_rate * (m.array() / corr1)
                / ((vmom.array() / corr2).sqrt() + adam_eps);
        }
    }
    return std::make_shared<MlpClassifier>(shape, std::move(params),
                                           std::move(std_rec), spec);
}

} // namespace detail

//! Trains the requested discriminator on a contrast dataset.
//! @param spec classifier kind, hyperparameters and seed.
//! @param data contrast rows with both labels present.
//! @return an immutable fitted classifier.
//! @throw std::invalid_argument on a degenerate (single-class) dataset.
inline std::shared_ptr<const Discriminator> fit(const DiscriminatorSpec& spec,
                                                const ContrastDataset& data)
{
    spec.validate();
    if (data.n_joint == 0 || data.n_marg == 0)
        throw std::invalid_argument(
            "fit: degenerate contrast dataset (all labels identical); a "
            "classifier needs both matched and mismatched samples");
    Standardization std_rec = Standardization::fit(data.W);
    const Eigen::MatrixXd w_std = std_rec.apply(data.W);
    Eigen::VectorXd z(data.size());
    for (Eigen::Index i = 0; i < data.size(); ++i)
        z(i) = static_cast<double>(data.z[static_cast<std::size_t>(i)]);
    if (spec.kind == DiscriminatorKind::logistic_elasticnet)
        return detail::fit_logistic(spec, w_std, z, std::move(std_rec));
    return detail::fit_mlp(spec, w_std, z, std::move(std_rec));
}

} // namespace mcd
