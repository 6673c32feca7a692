// Supervised probing of the frozen semantic latent space: standardization,
// logistic and linear-SVM probes (G0 vs G2/G3), and the canonical decision
// hyperplane with signed distances.
#pragma once

#include <Eigen/Dense>

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vfg/common.hpp"

namespace vfg {

using LatentVec = Eigen::VectorXd;

struct LatentStandardizer {
    LatentVec mu;
    LatentVec sigma;  // sigma[d] > 0; near-constant dimensions pinned to 1

    LatentVec apply(const LatentVec& z) const {
        check(z.size() == mu.size(), "dimension-mismatch", "latent dimension mismatch");
        return (z - mu).cwiseQuotient(sigma);
    }
    LatentVec invert(const LatentVec& zs) const {
        check(zs.size() == mu.size(), "dimension-mismatch", "latent dimension mismatch");
        return zs.cwiseProduct(sigma) + mu;
    }
};

// Sample statistics (n-1 denominator).
inline LatentStandardizer fit_standardizer(const std::vector<LatentVec>& latents) {
    check(latents.size() >= 2, "empty-input", "fit_standardizer needs >= 2 latents");
    const Eigen::Index d = latents.front().size();
    LatentVec mu = LatentVec::Zero(d);
    for (const auto& z : latents) {
        check(z.size() == d, "dimension-mismatch", "inconsistent latent dimensions");
        mu += z;
    }
    mu /= static_cast<double>(latents.size());
    LatentVec var = LatentVec::Zero(d);
    for (const auto& z : latents) var += (z - mu).cwiseAbs2();
    var /= static_cast<double>(latents.size() - 1);
    LatentVec sigma = var.cwiseSqrt();
    for (Eigen::Index i = 0; i < d; ++i)
        if (sigma[i] < 1e-8) sigma[i] = 1.0;
    return {mu, sigma};
}

// n.dot(standardize(z)) + b with ||n|| = 1; distance > 0 means fractured.
struct Hyperplane {
    LatentVec n;
    double b = 0.0;
    std::string probe_kind;  // "linear" | "svm"
    std::string train_hash;
};

inline Hyperplane canonicalize(const LatentVec& w, double b, std::string probe_kind,
                               std::string train_hash = {}) {
    double norm = w.norm();
    check(norm > 1e-30, "degenerate-hyperplane", "zero weight vector");
    return {w / norm, b / norm, std::move(probe_kind), std::move(train_hash)};
}

struct ProbeConfig {
    int epochs = 2000;
    double lr = 0.5;
    double l2 = 0.0;            // logistic weight decay (not applied to bias)
    bool class_weight = false;  // inverse-frequency weights for the logistic probe
    double svm_lambda = 1e-4;   // soft-margin strength
};

namespace detail {

struct ProbeData {
    Eigen::MatrixXd x;  // [n_samples, D], already standardized
    Eigen::VectorXd y;  // labels
};

inline ProbeData pack_probe_data(const std::vector<LatentVec>& latents,
                                 const std::vector<int>& labels) {
    check(latents.size() == labels.size() && !latents.empty(), "invalid-input",
          "latents/labels mismatch");
    int pos = 0, neg = 0;
    for (int l : labels) (l ? pos : neg)++;
    check(pos > 0 && neg > 0, "degenerate-labels", "probe training needs both classes");
    ProbeData d;
    d.x.resize(static_cast<Eigen::Index>(latents.size()), latents.front().size());
    d.y.resize(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < latents.size(); ++i) {
        check(latents[i].size() == latents.front().size(), "dimension-mismatch",
              "inconsistent latent dimensions");
        d.x.row(static_cast<Eigen::Index>(i)) = latents[i].transpose();
        d.y[static_cast<Eigen::Index>(i)] = labels[i];
    }
    return d;
}

inline std::string probe_train_hash(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    std::uint64_t h = fnv1a64(x.data(), sizeof(double) * static_cast<std::size_t>(x.size()));
    h = fnv1a64(y.data(), sizeof(double) * static_cast<std::size_t>(y.size()), h);
    return to_hex(h);
}

}  // namespace detail

struct ProbeFit {
    LatentVec w_raw;  // pre-canonical weights, exposed for regularization tests
    double b_raw = 0.0;
    Hyperplane plane;
};

// Logistic regression, full-batch gradient descent on standardized latents.
// labels: 0 = healthy, 1 = fractured. Caller admits only G0/G2/G3 samples.
inline ProbeFit train_linear_probe_fit(const std::vector<LatentVec>& latents,
                                       const std::vector<int>& labels,
                                       const ProbeConfig& cfg = {}) {
    auto d = detail::pack_probe_data(latents, labels);
    const auto n = d.x.rows();
    Eigen::VectorXd sample_w = Eigen::VectorXd::Ones(n);
    if (cfg.class_weight) {
        double pos = d.y.sum(), neg = static_cast<double>(n) - pos;
        for (Eigen::Index i = 0; i < n; ++i)
            sample_w[i] = d.y[i] > 0.5 ? n / (2.0 * pos) : n / (2.0 * neg);
    }
    double wsum = sample_w.sum();

    LatentVec w = LatentVec::Zero(d.x.cols());
    double b = 0.0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Eigen::VectorXd f = d.x * w;
        f.array() += b;
        Eigen::VectorXd p = (1.0 + (-f.array()).exp()).inverse();
        Eigen::VectorXd residual = (p - d.y).cwiseProduct(sample_w) / wsum;
        LatentVec gw = d.x.transpose() * residual + cfg.l2 * w;
        double gb = residual.sum();
        w -= cfg.lr * gw;
        b -= cfg.lr * gb;
    }
    return {w, b, canonicalize(w, b, "linear", detail::probe_train_hash(d.x, d.y))};
}

// Soft-margin linear SVM in the primal: lambda ||w||^2 / 2 + mean hinge loss,
// full-batch subgradient descent with a 1/t step decay and tail-iterate
// averaging (a constant step limit-cycles around the optimum). Full-batch
// keeps the fit exactly invariant to sample duplication.
inline ProbeFit train_svm_fit(const std::vector<LatentVec>& latents,
                              const std::vector<int>& labels, const ProbeConfig& cfg = {}) {
    auto d = detail::pack_probe_data(latents, labels);
    const auto n = d.x.rows();
    Eigen::VectorXd y = d.y.unaryExpr([](double v) { return v > 0.5 ? 1.0 : -1.0; });

    LatentVec w = LatentVec::Zero(d.x.cols());
    double b = 0.0;
    LatentVec w_sum = LatentVec::Zero(d.x.cols());
    double b_sum = 0.0;
    const int tail_from = cfg.epochs / 2;
    int tail = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double lr = cfg.lr / (1.0 + cfg.lr * cfg.svm_lambda * epoch);
        Eigen::VectorXd margin = y.cwiseProduct(d.x * w + Eigen::VectorXd::Constant(n, b));
        Eigen::VectorXd viol = (margin.array() < 1.0).select(y, Eigen::VectorXd::Zero(n));
        LatentVec gw = cfg.svm_lambda * w - d.x.transpose() * viol / static_cast<double>(n);
        double gb = -viol.sum() / static_cast<double>(n);
        w -= lr * gw;
        b -= lr * gb;
        if (epoch >= tail_from) {
            w_sum += w;
            b_sum += b;
            ++tail;
        }
    }
    w = w_sum / tail;
    b = b_sum / tail;
    return {w, b, canonicalize(w, b, "svm", detail::probe_train_hash(d.x, d.y))};
}

inline Hyperplane train_linear_probe(const std::vector<LatentVec>& latents,
                                     const std::vector<int>& labels,
                                     const ProbeConfig& cfg = {}) {
    return train_linear_probe_fit(latents, labels, cfg).plane;
}

inline Hyperplane train_svm(const std::vector<LatentVec>& latents,
                            const std::vector<int>& labels, const ProbeConfig& cfg = {}) {
    return train_svm_fit(latents, labels, cfg).plane;
}

// Signed Euclidean distance to the plane in standardized space.
inline double distance(const LatentVec& z, const Hyperplane& h, const LatentStandardizer& std_) {
    check(z.size() == h.n.size(), "dimension-mismatch", "latent/hyperplane dimension mismatch");
    return h.n.dot(std_.apply(z)) + h.b;
}

struct Detection {
    bool fractured = false;
    double score = 0.0;  // signed distance; monotone in fracture probability
};

inline Detection detect(const LatentVec& z, const Hyperplane& h, const LatentStandardizer& std_) {
    double d = distance(z, h, std_);
    return {d > 0.0, d};
}

// ---------------------------------------------------------------------------
// Persistence: probe file = standardizer + hyperplane, one JSON document.

inline nlohmann::json probe_to_json(const Hyperplane& h, const LatentStandardizer& std_) {
    nlohmann::json j;
    j["version"] = 1;
    j["probe_kind"] = h.probe_kind;
    j["d"] = h.n.size();
    j["mu"] = std::vector<double>(std_.mu.data(), std_.mu.data() + std_.mu.size());
    j["sigma"] = std::vector<double>(std_.sigma.data(), std_.sigma.data() + std_.sigma.size());
    j["n"] = std::vector<double>(h.n.data(), h.n.data() + h.n.size());
    j["b"] = h.b;
    j["train_hash"] = h.train_hash;
    return j;
}

inline void probe_from_json(const nlohmann::json& j, Hyperplane& h, LatentStandardizer& std_) {
    check(j.at("version").get<int>() == 1, "bad-format", "unknown probe file version");
    auto as_vec = [](const nlohmann::json& a) {
        auto v = a.get<std::vector<double>>();
        return Eigen::Map<const LatentVec>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
    };
    std_.mu = as_vec(j.at("mu"));
    std_.sigma = as_vec(j.at("sigma"));
    h.n = as_vec(j.at("n"));
    h.b = j.at("b").get<double>();
    h.probe_kind = j.at("probe_kind").get<std::string>();
    h.train_hash = j.at("train_hash").get<std::string>();
    auto d = j.at("d").get<Eigen::Index>();
    check(h.n.size() == d && std_.mu.size() == d && std_.sigma.size() == d, "bad-format",
          "probe file dimension mismatch");
}

inline void save_probe(const std::string& path, const Hyperplane& h,
                       const LatentStandardizer& std_) {
    std::ofstream f(path, std::ios::binary);
    check(f.good(), "io-error", "cannot write probe file: " + path);
    f << probe_to_json(h, std_).dump(2) << '\n';
}

inline void load_probe(const std::string& path, Hyperplane& h, LatentStandardizer& std_) {
    std::ifstream f(path);
    check(f.good(), "io-error", "cannot read probe file: " + path);
    nlohmann::json j;
    f >> j;
    probe_from_json(j, h, std_);
}

}  // namespace vfg
