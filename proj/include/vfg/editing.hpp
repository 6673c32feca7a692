// Counterfactual generation: invert the grade calibration to a target
// distance, move the semantic latent along the hyperplane normal to that
// distance (minimum-norm edit in standardized space), and decode with the
// original stochastic latent held fixed.
#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "vfg/common.hpp"
#include "vfg/dae.hpp"
#include "vfg/grading.hpp"
#include "vfg/latent.hpp"
#include "vfg/synth.hpp"

namespace vfg {

// d such that continuous_grade(d) = g_t; only the two-point linear map has a
// well-posed inverse (a cubic fit may be non-monotone).
inline double target_distance(double g_t, const Calibration& cal) {
    if (cal.kind != Calibration::Kind::TwoPointLinear)
        fail("unsupported-inversion",
             "grade inversion requires two_point_linear calibration; refit with kind=two_point");
    return cal.d0 + (g_t / 3.0) * (cal.d3 - cal.d0);
}

// z' = z_std + (target_d - distance(z)) n, de-standardized. distance(z') hits
// target_d exactly and the standardized change is orthogonal to the plane.
inline LatentVec edit_latent(const LatentVec& z, const Hyperplane& h,
                             const LatentStandardizer& std_, double target_d) {
    double d = distance(z, h, std_);
    LatentVec zs = std_.apply(z) + (target_d - d) * h.n;
    return std_.invert(zs);
}

namespace detail {

inline nn::Mat<float> to_model_latent(const LatentVec& z) {
    nn::Mat<float> out(z.size(), 1);
    for (Eigen::Index i = 0; i < z.size(); ++i) out(i, 0) = static_cast<float>(z[i]);
    return out;
}

inline LatentVec to_probe_latent(const std::vector<double>& z) {
    return Eigen::Map<const LatentVec>(z.data(), static_cast<Eigen::Index>(z.size()));
}

}  // namespace detail

// Encode, retarget the grade, decode. The stochastic latent of the source
// image conditions the output, so identity is preserved up to the edit.
inline Image counterfactual(Dae& model, const Hyperplane& h, const LatentStandardizer& std_,
                            const Calibration& cal, const Image& x0, double g_t,
                            const StepSchedule& eval_steps, const StepSchedule& gen_steps) {
    auto x = model.pack({&x0});
    nn::Mat<float> z = model.enc.forward(x, 1);
    nn::Mat<float> xT = model.encode_stochastic_batch(x, z, eval_steps);

    LatentVec zd(z.rows());
    for (Eigen::Index i = 0; i < z.rows(); ++i) zd[i] = z(i, 0);
    LatentVec edited = edit_latent(zd, h, std_, target_distance(g_t, cal));
    return model.unpack(model.decode_batch(xT, detail::to_model_latent(edited), gen_steps), 0);
}

struct SweepRow {
    double target_grade = 0.0;
    double target_dist = 0.0;
    double measured_reduction = std::numeric_limits<double>::quiet_NaN();  // NaN: oracle miss
};

struct SweepResult {
    std::vector<Image> images;  // one per requested grade, source order
    std::vector<SweepRow> rows;
    Image strip;  // left-to-right concatenation
};

inline SweepResult grade_sweep(Dae& model, const Hyperplane& h, const LatentStandardizer& std_,
                               const Calibration& cal, const Image& x0,
                               const std::vector<double>& grades, const StepSchedule& eval_steps,
                               const StepSchedule& gen_steps, const GeneratorConfig& gen_cfg) {
    check(!grades.empty(), "empty-input", "sweep needs at least one grade");
    auto x = model.pack({&x0});
    nn::Mat<float> z = model.enc.forward(x, 1);
    nn::Mat<float> xT = model.encode_stochastic_batch(x, z, eval_steps);
    LatentVec zd(z.rows());
    for (Eigen::Index i = 0; i < z.rows(); ++i) zd[i] = z(i, 0);

    SweepResult out;
    for (double g : grades) {
        SweepRow row;
        row.target_grade = g;
        row.target_dist = target_distance(g, cal);
        LatentVec edited = edit_latent(zd, h, std_, row.target_dist);
        Image img =
            model.unpack(model.decode_batch(xT, detail::to_model_latent(edited), gen_steps), 0);
        try {
            row.measured_reduction = measure_height_reduction(img, gen_cfg);
        } catch (const Error&) {
            // oracle miss stays NaN
        }
        out.images.push_back(std::move(img));
        out.rows.push_back(row);
    }

    const int s = model.cfg.image_size;
    out.strip = Image(s, s * static_cast<int>(out.images.size()));
    for (std::size_t i = 0; i < out.images.size(); ++i)
        for (int r = 0; r < s; ++r)
            for (int c = 0; c < s; ++c)
                out.strip.at(r, static_cast<int>(i) * s + c) = out.images[i].at(r, c);
    return out;
}

inline void save_sweep(const std::string& stem, const SweepResult& sweep) {
    write_png_gray8(stem + "_sweep.png", sweep.strip);
    std::ofstream csv(stem + "_sweep.csv", std::ios::binary);
    check(csv.good(), "io-error", "cannot write sweep csv");
    csv << "target_grade,target_distance,measured_reduction\n";
    char buf[128];
    for (const auto& r : sweep.rows) {
        std::snprintf(buf, sizeof(buf), "%g,%g,%g", r.target_grade, r.target_dist,
                      r.measured_reduction);
        csv << buf << '\n';
    }
}

}  // namespace vfg
