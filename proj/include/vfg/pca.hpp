// Two-component PCA for latent scatter plots (t-SNE substitute).
#pragma once

#include <Eigen/Dense>

#include <vector>

#include "vfg/common.hpp"

namespace vfg {

struct Pca2 {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;        // [D, 2]
    Eigen::Vector2d explained_variance;

    Eigen::Vector2d project(const Eigen::VectorXd& z) const {
        return components.transpose() * (z - mean);
    }
};

// Power iteration with deflation; deterministic start vectors. Sign fixed so
// the largest-magnitude loading is positive.
inline Pca2 fit_pca2(const std::vector<Eigen::VectorXd>& latents) {
    check(latents.size() >= 3, "invalid-input", "pca needs >= 3 samples");
    const Eigen::Index d = latents.front().size();
    Pca2 out;
    out.mean = Eigen::VectorXd::Zero(d);
    for (const auto& z : latents) out.mean += z;
    out.mean /= static_cast<double>(latents.size());

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& z : latents) {
        Eigen::VectorXd c = z - out.mean;
        cov.noalias() += c * c.transpose();
    }
    cov /= static_cast<double>(latents.size() - 1);

    out.components.resize(d, 2);
    Rng rng(0x9CA5EEDULL);
    for (int comp = 0; comp < 2; ++comp) {
        Eigen::VectorXd v(d);
        for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.normal();
        v.normalize();
        double lambda = 0.0;
        for (int it = 0; it < 500; ++it) {
            Eigen::VectorXd nv = cov * v;
            lambda = nv.norm();
            if (lambda < 1e-30) break;
            nv /= lambda;
            if ((nv - v).norm() < 1e-12) {
                v = nv;
                break;
            }
            v = nv;
        }
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v[imax] < 0.0) v = -v;
        out.components.col(comp) = v;
        out.explained_variance[comp] = lambda;
        cov -= lambda * v * v.transpose();  // deflate
    }
    return out;
}

}  // namespace vfg
