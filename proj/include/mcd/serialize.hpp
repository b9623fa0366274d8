#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "mcd/discriminator.hpp"
#include "mcd/estimator.hpp"
#include "mcd/kde.hpp"

//! JSON save/load of fitted estimators.  Doubles are written in shortest
//! round-trip form, so a reloaded estimator reproduces the original's
//! predictions bit for bit.

namespace mcd {

namespace detail {

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v)
{
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        arr.push_back(v(i));
    return arr;
}

inline nlohmann::json rowvector_to_json(const Eigen::RowVectorXd& v)
{
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        arr.push_back(v(i));
    return arr;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& arr)
{
    if (!arr.is_array())
        throw std::runtime_error("estimator file: expected an array of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    Eigen::Index at = 0;
    for (const auto& x : arr)
        v(at++) = x.get<double>();
    return v;
}

inline Eigen::RowVectorXd rowvector_from_json(const nlohmann::json& arr)
{
    return vector_from_json(arr).transpose();
}

} // namespace detail

//! Serializes a fitted estimator (marginal sample, discriminator
//! parameters, standardization, ratio, threshold) to a JSON object.
inline nlohmann::json estimator_to_json(const McdEstimator& est)
{
    nlohmann::json j;
    j["format"] = 1;
    j["ratio"] = est.ratio();
    j["epsilon"] = est.epsilon();
    j["contrast_size"] = est.contrast_size();
    j["contrast_joint"] = est.contrast_joint();
    j["marginal"] = {{"samples", detail::vector_to_json(est.marginal().samples())}};

    const Discriminator& disc = est.discriminator();
    nlohmann::json d;
    d["standardization"] = {
        {"mean", detail::rowvector_to_json(disc.standardization().mean)},
        {"scale", detail::rowvector_to_json(disc.standardization().scale)}};
    if (const auto* mlp = dynamic_cast<const MlpClassifier*>(&disc)) {
        d["kind"] = "mlp";
        d["shape"] = {{"input", mlp->shape().input},
                      {"hidden1", mlp->shape().hidden1},
                      {"hidden2", mlp->shape().hidden2}};
        d["params"] = detail::vector_to_json(mlp->params());
    } else if (const auto* lin = dynamic_cast<const LogisticElasticNet*>(&disc)) {
        d["kind"] = "logistic_elasticnet";
        d["weights"] = detail::vector_to_json(lin->weights());
        d["bias"] = lin->bias();
    } else {
        throw std::runtime_error(
            "estimator_to_json: unknown discriminator type");
    }
    j["discriminator"] = std::move(d);
    return j;
}

//! Rebuilds an estimator from the JSON produced by estimator_to_json.
//! @throw std::runtime_error on missing fields or an unknown kind.
inline McdEstimator estimator_from_json(const nlohmann::json& j)
{
    if (!j.contains("format") || j["format"].get<int>() != 1)
        throw std::runtime_error("estimator file: unsupported format");
    const double ratio = j.at("ratio").get<double>();
    const double epsilon = j.at("epsilon").get<double>();
    MarginalDensityModel marginal(
        detail::vector_from_json(j.at("marginal").at("samples")));

    const nlohmann::json& d = j.at("discriminator");
    Standardization s;
    s.mean = detail::rowvector_from_json(d.at("standardization").at("mean"));
    s.scale = detail::rowvector_from_json(d.at("standardization").at("scale"));
    const std::string kind = d.at("kind").get<std::string>();
    std::shared_ptr<const Discriminator> disc;
    if (kind == "mlp") {
        MlpShape shape;
        shape.input = d.at("shape").at("input").get<Eigen::Index>();
        shape.hidden1 = d.at("shape").at("hidden1").get<Eigen::Index>();
        shape.hidden2 = d.at("shape").at("hidden2").get<Eigen::Index>();
        Eigen::VectorXd params = detail::vector_from_json(d.at("params"));
        if (params.size() != shape.size())
            throw std::runtime_error(
                "estimator file: parameter count does not match the shape");
        DiscriminatorSpec spec;
        spec.kind = DiscriminatorKind::mlp;
        disc = std::make_shared<MlpClassifier>(shape, std::move(params),
                                               std::move(s), spec);
    } else if (kind == "logistic_elasticnet") {
        DiscriminatorSpec spec;
        spec.kind = DiscriminatorKind::logistic_elasticnet;
        disc = std::make_shared<LogisticElasticNet>(
            detail::vector_from_json(d.at("weights")),
            d.at("bias").get<double>(), std::move(s), spec);
    } else {
        throw std::runtime_error("estimator file: unknown discriminator kind '"
                                 + kind + "'");
    }

    McdEstimator est(std::move(marginal), std::move(disc), Ratio(ratio),
                     epsilon);
    est.record_contrast_counts(
        j.value("contrast_size", static_cast<Eigen::Index>(0)),
        j.value("contrast_joint", static_cast<Eigen::Index>(0)));
    return est;
}

//! Writes an estimator to a JSON file.
//! @throw std::runtime_error when the path cannot be written.
inline void save_estimator(const std::string& path, const McdEstimator& est)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("save_estimator: cannot write '" + path + "'");
    out << estimator_to_json(est).dump(2) << '\n';
    if (!out)
        throw std::runtime_error("save_estimator: failed writing '" + path
                                 + "'");
}

//! Reads an estimator from a JSON file.
//! @throw std::runtime_error on I/O or parse failure.
inline McdEstimator load_estimator(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("load_estimator: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_estimator: '" + path
                                 + "' is not valid JSON: " + e.what());
    }
    return estimator_from_json(j);
}

} // namespace mcd
