// The diffusion autoencoder: a semantic encoder z = Enc(x0), a conditional
// denoiser eps(x_t, t, z), joint training on the eps-prediction objective,
// deterministic DDIM encode/decode, and checkpoint persistence.
#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vfg/common.hpp"
#include "vfg/diffusion.hpp"
#include "vfg/image.hpp"
#include "vfg/nn.hpp"

namespace vfg {

struct DaeConfig {
    int image_size = 32;
    int d = 64;                       // semantic latent dimension
    int base_width = 32;
    std::vector<int> mult = {1, 2};   // channel multiplier per resolution
    int time_embed_dim = 128;
    int sin_dim = 64;                 // sinusoidal source dimension
    int groups = 8;
    int train_t = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    std::string loss = "mse";  // mse | l1
    double lr = 1e-3;
    int batch_size = 64;
    long long total_samples = 100000;
    std::uint64_t seed = 7;

    int levels() const { return static_cast<int>(mult.size()); }
    int width(int level) const { return base_width * mult[static_cast<std::size_t>(level)]; }

    void validate() const {
        check(image_size >= 4 && d >= 1 && base_width >= 1, "invalid-config",
              "image size / latent dim / width must be positive");
        check(!mult.empty(), "invalid-config", "need at least one channel multiplier");
        check(time_embed_dim >= 2 && sin_dim >= 2 && sin_dim % 2 == 0, "invalid-config",
              "bad embedding dimensions");
        check(train_t >= 1 && batch_size >= 1 && total_samples >= 1, "invalid-config",
              "bad training parameters");
        check(loss == "mse" || loss == "l1", "invalid-config", "loss must be mse or l1");
        int down = 1 << (levels() - 1);
        check(image_size % down == 0, "invalid-config",
              "image size must be divisible by 2^(levels-1)");
        for (int l = 0; l < levels(); ++l)
            check(width(l) % groups == 0, "invalid-config",
                  "group count must divide every channel width");
    }

    // Named presets. "desk" trains on CPU in well under an hour; "paper"
    // mirrors the source-scale hyperparameters and is not meant for CPU runs.
    static DaeConfig desk() { return DaeConfig{}; }
    static DaeConfig paper() {
        DaeConfig c;
        c.image_size = 96;
        c.d = 512;
        c.base_width = 64;
        c.mult = {1, 2, 4};
        c.lr = 1e-4;
        c.total_samples = 12000000;
        return c;
    }
};

inline void to_json(nlohmann::json& j, const DaeConfig& c) {
    j = nlohmann::json{{"image_size", c.image_size},
                       {"d", c.d},
                       {"base_width", c.base_width},
                       {"mult", c.mult},
                       {"time_embed_dim", c.time_embed_dim},
                       {"sin_dim", c.sin_dim},
                       {"groups", c.groups},
                       {"train_t", c.train_t},
                       {"beta_start", c.beta_start},
                       {"beta_end", c.beta_end},
                       {"loss", c.loss},
                       {"lr", c.lr},
                       {"batch_size", c.batch_size},
                       {"total_samples", c.total_samples},
                       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, DaeConfig& c) {
    j.at("image_size").get_to(c.image_size);
    j.at("d").get_to(c.d);
    j.at("base_width").get_to(c.base_width);
    j.at("mult").get_to(c.mult);
    j.at("time_embed_dim").get_to(c.time_embed_dim);
    j.at("sin_dim").get_to(c.sin_dim);
    j.at("groups").get_to(c.groups);
    j.at("train_t").get_to(c.train_t);
    j.at("beta_start").get_to(c.beta_start);
    j.at("beta_end").get_to(c.beta_end);
    j.at("loss").get_to(c.loss);
    j.at("lr").get_to(c.lr);
    j.at("batch_size").get_to(c.batch_size);
    j.at("total_samples").get_to(c.total_samples);
    j.at("seed").get_to(c.seed);
}

// ---------------------------------------------------------------------------

// Semantic encoder: conv downsampling stack -> global average pool -> linear.
template <class T>
struct Encoder {
    nn::Conv2d<T> c0, c1, c2, c3;
    nn::SiLU<T> a0, a1, a2, a3;
    nn::GlobalAvgPool<T> gap;
    nn::Dense<T> fc;
    int size = 0;

    void init(const DaeConfig& cfg, Rng& rng) {
        size = cfg.image_size;
        int w0 = cfg.base_width, w1 = 2 * cfg.base_width;
        c0.init(1, w0, 3, 1, rng);
        c0.need_dx = false;  // nothing upstream of the pixels
        c1.init(w0, w0, 3, 2, rng);
        c2.init(w0, w1, 3, 2, rng);
        // stride 1: pooling at /4 keeps sub-pixel height changes readable
        c3.init(w1, w1, 3, 1, rng);
        fc.init(w1, cfg.d, rng);
    }

    // x: [1, B*S*S] in [-1, 1]; returns z: [D, B]
    nn::Mat<T> forward(const nn::Mat<T>& x, int B) {
        int s = size;
        nn::Mat<T> h = a0.forward(c0.forward(x, B, s, s));
        h = a1.forward(c1.forward(h, B, s, s));
        s = (s + 1) / 2;
        h = a2.forward(c2.forward(h, B, s, s));
        s = (s + 1) / 2;
        h = a3.forward(c3.forward(h, B, s, s));
        return fc.forward(gap.forward(h, B, s * s));
    }

    void backward(const nn::Mat<T>& dz) {
        nn::Mat<T> dh = gap.backward(fc.backward(dz));
        dh = c3.backward(a3.backward(dh));
        dh = c2.backward(a2.backward(dh));
        dh = c1.backward(a1.backward(dh));
        c0.backward(a0.backward(dh));  // input gradient unused
    }

    void params(nn::ParamList<T>& out) {
        c0.params("enc.c0", out);
        c1.params("enc.c1", out);
        c2.params("enc.c2", out);
        c3.params("enc.c3", out);
        fc.params("enc.fc", out);
    }
};

// ---------------------------------------------------------------------------

// Conditional denoiser: small U-Net over cfg.mult resolutions, sinusoidal
// time embedding plus a linear projection of z_sem feeding every residual
// block's affine modulation.
template <class T>
struct Denoiser {
    DaeConfig cfg;
    nn::Dense<T> t_mlp1, t_mlp2, z_proj;
    nn::SiLU<T> t_act, cond_act;
    nn::Conv2d<T> stem;
    std::vector<nn::ResBlock<T>> down;
    std::vector<nn::Conv2d<T>> downsample;
    nn::ResBlock<T> mid;
    std::vector<nn::ResBlock<T>> up;
    std::vector<nn::Upsample2x<T>> up_nn;
    std::vector<nn::Conv2d<T>> up_conv;
    nn::GroupNorm<T> head_gn;
    nn::SiLU<T> head_act;
    nn::Conv2d<T> head;

    // per-forward caches
    std::vector<nn::Mat<T>> skips;
    std::vector<std::pair<int, int>> level_size;
    int bsz = 0;

    void init(const DaeConfig& c, Rng& rng) {
        cfg = c;
        const int L = c.levels(), E = c.time_embed_dim;
        t_mlp1.init(c.sin_dim, E, rng);
        t_mlp2.init(E, E, rng);
        z_proj.init(c.d, E, rng);
        stem.init(1, c.width(0), 3, 1, rng);
        stem.need_dx = false;  // x_t carries no parameters upstream
        down.resize(static_cast<std::size_t>(L));
        downsample.resize(static_cast<std::size_t>(L > 0 ? L - 1 : 0));
        up.resize(static_cast<std::size_t>(L));
        up_nn.resize(static_cast<std::size_t>(L));
        up_conv.resize(static_cast<std::size_t>(L));
        for (int i = 0; i < L; ++i) {
            int cin = i == 0 ? c.width(0) : c.width(i - 1);
            down[static_cast<std::size_t>(i)].init(cin, c.width(i), E, c.groups, rng);
            if (i < L - 1)
                downsample[static_cast<std::size_t>(i)].init(c.width(i), c.width(i), 3, 2, rng);
            up[static_cast<std::size_t>(i)].init(2 * c.width(i), c.width(i), E, c.groups, rng);
            if (i > 0) up_conv[static_cast<std::size_t>(i)].init(c.width(i), c.width(i - 1), 3, 1, rng);
        }
        mid.init(c.width(L - 1), c.width(L - 1), E, c.groups, rng);
        head_gn.init(c.width(0), c.groups);
        head.init(c.width(0), 1, 3, 1, rng, /*zero=*/true);
    }

    // x: [1, B*S*S], t: one timestep per batch element, z: [D, B]
    nn::Mat<T> forward(const nn::Mat<T>& x, const std::vector<int>& t, const nn::Mat<T>& z,
                       int B) {
        check(static_cast<int>(t.size()) == B && z.cols() == B, "shape-mismatch",
              "denoiser batch size mismatch");
        bsz = B;
        const int L = cfg.levels();
        nn::Mat<T> cond = cond_act.forward(
            t_mlp2.forward(t_act.forward(t_mlp1.forward(nn::time_embedding<T>(t, cfg.sin_dim)))) +
            z_proj.forward(z));

        skips.assign(static_cast<std::size_t>(L), {});
        level_size.assign(static_cast<std::size_t>(L), {0, 0});
        int s = cfg.image_size;
        nn::Mat<T> h = stem.forward(x, B, s, s);
        for (int i = 0; i < L; ++i) {
            level_size[static_cast<std::size_t>(i)] = {s, s};
            h = down[static_cast<std::size_t>(i)].forward(h, cond, B, s, s);
            skips[static_cast<std::size_t>(i)] = h;
            if (i < L - 1) {
                h = downsample[static_cast<std::size_t>(i)].forward(h, B, s, s);
                s /= 2;
            }
        }
        h = mid.forward(h, cond, B, s, s);
        for (int i = L - 1; i >= 0; --i) {
            auto [hh, ww] = level_size[static_cast<std::size_t>(i)];
            nn::Mat<T> cat(h.rows() + skips[static_cast<std::size_t>(i)].rows(), h.cols());
            cat.topRows(h.rows()) = h;
            cat.bottomRows(skips[static_cast<std::size_t>(i)].rows()) =
                skips[static_cast<std::size_t>(i)];
            h = up[static_cast<std::size_t>(i)].forward(cat, cond, B, hh, ww);
            if (i > 0) {
                h = up_nn[static_cast<std::size_t>(i)].forward(h, B, hh, ww);
                auto [ph, pw] = level_size[static_cast<std::size_t>(i - 1)];
                h = up_conv[static_cast<std::size_t>(i)].forward(h, B, ph, pw);
            }
        }
        return head.forward(head_act.forward(head_gn.forward(h, B, cfg.image_size * cfg.image_size)),
                            B, cfg.image_size, cfg.image_size);
    }

    // Returns dz; parameter gradients accumulate. The input-image gradient is
    // discarded (nothing upstream of x_t carries parameters).
    nn::Mat<T> backward(const nn::Mat<T>& dout) {
        const int L = cfg.levels();
        nn::Mat<T> dcond = nn::Mat<T>::Zero(cfg.time_embed_dim, bsz);
        nn::Mat<T> dh = head_gn.backward(head_act.backward(head.backward(dout)));

        std::vector<nn::Mat<T>> dskip(static_cast<std::size_t>(L));
        for (int i = 0; i < L; ++i) {
            if (i > 0) {
                dh = up_conv[static_cast<std::size_t>(i)].backward(dh);
                dh = up_nn[static_cast<std::size_t>(i)].backward(dh);
            }
            nn::Mat<T> dcat = up[static_cast<std::size_t>(i)].backward(dh, dcond);
            int w = cfg.width(i);
            dh = dcat.topRows(w);
            dskip[static_cast<std::size_t>(i)] = dcat.bottomRows(w);
        }
        dh = mid.backward(dh, dcond);
        for (int i = L - 1; i >= 0; --i) {
            if (i < L - 1) dh = downsample[static_cast<std::size_t>(i)].backward(dh);
            dh += dskip[static_cast<std::size_t>(i)];
            dh = down[static_cast<std::size_t>(i)].backward(dh, dcond);
        }
        stem.backward(dh);

        nn::Mat<T> dpre = cond_act.backward(dcond);
        t_mlp1.backward(t_act.backward(t_mlp2.backward(dpre)));
        return z_proj.backward(dpre);
    }

    void params(nn::ParamList<T>& out) {
        t_mlp1.params("unet.t_mlp1", out);
        t_mlp2.params("unet.t_mlp2", out);
        z_proj.params("unet.z_proj", out);
        stem.params("unet.stem", out);
        for (std::size_t i = 0; i < down.size(); ++i)
            down[i].params("unet.down" + std::to_string(i), out);
        for (std::size_t i = 0; i < downsample.size(); ++i)
            downsample[i].params("unet.downsample" + std::to_string(i), out);
        mid.params("unet.mid", out);
        for (std::size_t i = 0; i < up.size(); ++i)
            up[i].params("unet.up" + std::to_string(i), out);
        for (std::size_t i = 1; i < up_conv.size(); ++i)
            up_conv[i].params("unet.up_conv" + std::to_string(i), out);
        head_gn.params("unet.head_gn", out);
        head.params("unet.head", out);
    }
};

// ---------------------------------------------------------------------------

struct TrainMilestone {
    long long samples = 0;
    double val_mse = 0.0;
};

template <class T>
struct DaeModel {
    DaeConfig cfg;
    NoiseSchedule sched;
    Encoder<T> enc;
    Denoiser<T> unet;
    nn::ParamList<T> param_list;

    long long samples_seen = 0;
    std::vector<TrainMilestone> milestones;

    using MatT = nn::Mat<T>;

    void build(const DaeConfig& c) {
        c.validate();
        cfg = c;
        sched = linear_beta_schedule(c.train_t, c.beta_start, c.beta_end);
        Rng rng(mix_seed(c.seed, 0xDAE));
        enc.init(c, rng);
        unet.init(c, rng);
        param_list.clear();
        enc.params(param_list);
        unet.params(param_list);
    }

    // [0,1] images packed to a [1, B*S*S] map in [-1,1]
    MatT pack(const std::vector<const Image*>& batch) const {
        const int s = cfg.image_size;
        MatT x(1, static_cast<Eigen::Index>(batch.size()) * s * s);
        for (std::size_t bi = 0; bi < batch.size(); ++bi) {
            check(batch[bi]->h == s && batch[bi]->w == s, "shape-mismatch",
                  "image does not match model size");
            for (int i = 0; i < s * s; ++i)
                x(0, static_cast<Eigen::Index>(bi) * s * s + i) =
                    static_cast<T>(2.0 * batch[bi]->px[static_cast<std::size_t>(i)] - 1.0);
        }
        return x;
    }

    Image unpack(const MatT& x, int bi) const {
        const int s = cfg.image_size;
        Image img(s, s);
        for (int i = 0; i < s * s; ++i) {
            double v = 0.5 * (static_cast<double>(x(0, static_cast<Eigen::Index>(bi) * s * s + i)) + 1.0);
            img.px[static_cast<std::size_t>(i)] = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
        return img;
    }

    // --- inference -----------------------------------------------------

    MatT encode_semantic_batch(const std::vector<const Image*>& batch) {
        return enc.forward(pack(batch), static_cast<int>(batch.size()));
    }

    std::vector<double> encode_semantic(const Image& img) {
        MatT z = encode_semantic_batch({&img});
        std::vector<double> out(static_cast<std::size_t>(z.rows()));
        for (Eigen::Index i = 0; i < z.rows(); ++i) out[static_cast<std::size_t>(i)] = z(i, 0);
        return out;
    }

    // DDIM inversion: t = 0 upward along the schedule, eps predicted at the
    // current lower-noise state.
    MatT encode_stochastic_batch(const MatT& x0, const MatT& z, const StepSchedule& steps) {
        const int B = static_cast<int>(z.cols());
        MatT x = x0;
        for (int k = 0; k + 1 < static_cast<int>(steps.t.size()); ++k) {
            int t_prev = steps.t[static_cast<std::size_t>(k)];
            int t = steps.t[static_cast<std::size_t>(k) + 1];
            std::vector<int> tt(static_cast<std::size_t>(B), t_prev);
            MatT eps = unet.forward(x, tt, z, B);
            x = ddim_invert_step(x, eps, t_prev, t, sched);
        }
        return x;
    }

    MatT decode_batch(const MatT& xT, const MatT& z, const StepSchedule& steps) {
        const int B = static_cast<int>(z.cols());
        MatT x = xT;
        for (int k = static_cast<int>(steps.t.size()) - 1; k >= 1; --k) {
            int t = steps.t[static_cast<std::size_t>(k)];
            int t_prev = steps.t[static_cast<std::size_t>(k) - 1];
            std::vector<int> tt(static_cast<std::size_t>(B), t);
            MatT eps = unet.forward(x, tt, z, B);
            x = ddim_step(x, eps, t, t_prev, sched);
        }
        return x;
    }

    Image reconstruct(const Image& img, const StepSchedule& steps) {
        MatT x0 = pack({&img});
        MatT z = enc.forward(x0, 1);
        MatT xT = encode_stochastic_batch(x0, z, steps);
        return unpack(decode_batch(xT, z, steps), 0);
    }

    double reconstruction_mse(const std::vector<const Image*>& images, const StepSchedule& steps) {
        check(!images.empty(), "empty-input", "no images for reconstruction");
        double total = 0.0;
        MatT x0 = pack(images);
        MatT z = enc.forward(x0, static_cast<int>(images.size()));
        MatT xT = encode_stochastic_batch(x0, z, steps);
        MatT xr = decode_batch(xT, z, steps);
        for (std::size_t i = 0; i < images.size(); ++i)
            total += mse(unpack(xr, static_cast<int>(i)), *images[i]);
        return total / static_cast<double>(images.size());
    }

    // --- training ------------------------------------------------------

    // One eps-prediction loss evaluation with gradient accumulation.
    double loss_and_grad(const MatT& x0, const std::vector<int>& t, const MatT& eps) {
        const int B = static_cast<int>(t.size());
        const int ss = cfg.image_size * cfg.image_size;
        MatT z = enc.forward(x0, B);
        MatT xt(1, x0.cols());
        for (int bi = 0; bi < B; ++bi) {
            double ab = sched.alpha_bar_at(t[static_cast<std::size_t>(bi)]);
            xt.middleCols(static_cast<Eigen::Index>(bi) * ss, ss) =
                static_cast<T>(std::sqrt(ab)) * x0.middleCols(static_cast<Eigen::Index>(bi) * ss, ss) +
                static_cast<T>(std::sqrt(1.0 - ab)) *
                    eps.middleCols(static_cast<Eigen::Index>(bi) * ss, ss);
        }
        MatT pred = unet.forward(xt, t, z, B);
        MatT diff = pred - eps;
        const double n = static_cast<double>(diff.size());
        double loss;
        MatT dpred;
        if (cfg.loss == "l1") {
            loss = diff.template cast<double>().cwiseAbs().sum() / n;
            dpred = diff.unaryExpr([](T v) { return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0)); }) /
                    static_cast<T>(n);
        } else {
            loss = diff.template cast<double>().squaredNorm() / n;
            dpred = (T(2) / static_cast<T>(n)) * diff;
        }
        MatT dz = unet.backward(dpred);
        enc.backward(dz);
        return loss;
    }
};

using Dae = DaeModel<float>;

// ---------------------------------------------------------------------------
// Checkpoint format: "DAECKPT1" magic, u32 little-endian JSON length, JSON
// metadata (config, schedule, progress, tensor directory), then raw
// little-endian f32 tensor payloads in directory order.

namespace detail {
constexpr char kCkptMagic[8] = {'D', 'A', 'E', 'C', 'K', 'P', 'T', '1'};
}

inline void save_checkpoint(const std::string& path, Dae& model) {
    nlohmann::json meta;
    meta["format_version"] = 1;
    meta["config"] = model.cfg;
    meta["schedule"] = {{"t", model.sched.T},
                        {"beta_start", model.cfg.beta_start},
                        {"beta_end", model.cfg.beta_end}};
    nlohmann::json progress;
    progress["samples_seen"] = model.samples_seen;
    nlohmann::json ms = nlohmann::json::array();
    for (const auto& m : model.milestones)
        ms.push_back({{"samples", m.samples}, {"val_mse", m.val_mse}});
    progress["milestones"] = ms;
    meta["progress"] = progress;

    nlohmann::json dir = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const auto& p : model.param_list) {
        dir.push_back({{"name", p.name},
                       {"dtype", "f32"},
                       {"shape", {p.value->rows(), p.value->cols()}},
                       {"offset", offset}});
        offset += sizeof(float) * static_cast<std::uint64_t>(p.value->size());
    }
    meta["tensors"] = dir;

    std::string js = meta.dump();
    std::ofstream f(path, std::ios::binary);
    check(f.good(), "io-error", "cannot write checkpoint: " + path);
    f.write(detail::kCkptMagic, 8);
    std::uint32_t len = static_cast<std::uint32_t>(js.size());
    unsigned char lb[4] = {static_cast<unsigned char>(len & 0xff),
                           static_cast<unsigned char>((len >> 8) & 0xff),
                           static_cast<unsigned char>((len >> 16) & 0xff),
                           static_cast<unsigned char>((len >> 24) & 0xff)};
    f.write(reinterpret_cast<const char*>(lb), 4);
    f.write(js.data(), static_cast<std::streamsize>(js.size()));
    for (const auto& p : model.param_list)
        f.write(reinterpret_cast<const char*>(p.value->data()),
                static_cast<std::streamsize>(sizeof(float) * p.value->size()));
    check(f.good(), "io-error", "checkpoint write failed: " + path);
}

inline Dae load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    check(f.good(), "io-error", "cannot read checkpoint: " + path);
    char magic[8];
    f.read(magic, 8);
    check(f.good() && std::memcmp(magic, detail::kCkptMagic, 8) == 0, "bad-format",
          "not a DAE checkpoint: " + path);
    unsigned char lb[4];
    f.read(reinterpret_cast<char*>(lb), 4);
    std::uint32_t len = static_cast<std::uint32_t>(lb[0]) | (static_cast<std::uint32_t>(lb[1]) << 8) |
                        (static_cast<std::uint32_t>(lb[2]) << 16) |
                        (static_cast<std::uint32_t>(lb[3]) << 24);
    std::string js(len, '\0');
    f.read(js.data(), len);
    check(f.good(), "bad-format", "truncated checkpoint metadata");
    nlohmann::json meta = nlohmann::json::parse(js);
    check(meta.at("format_version").get<int>() == 1, "bad-format",
          "unknown checkpoint format version");

    Dae model;
    model.build(meta.at("config").get<DaeConfig>());
    model.samples_seen = meta.at("progress").at("samples_seen").get<long long>();
    for (const auto& m : meta.at("progress").at("milestones"))
        model.milestones.push_back(
            {m.at("samples").get<long long>(), m.at("val_mse").get<double>()});

    const auto& dir = meta.at("tensors");
    check(dir.size() == model.param_list.size(), "checkpoint-shape-mismatch",
          "tensor directory does not match model");
    for (std::size_t i = 0; i < model.param_list.size(); ++i) {
        const auto& e = dir[i];
        auto& p = model.param_list[i];
        check(e.at("name").get<std::string>() == p.name, "checkpoint-shape-mismatch",
              "tensor name mismatch at index " + std::to_string(i));
        auto shape = e.at("shape").get<std::vector<Eigen::Index>>();
        check(shape.size() == 2 && shape[0] == p.value->rows() && shape[1] == p.value->cols(),
              "checkpoint-shape-mismatch", "tensor shape mismatch for " + p.name);
        f.read(reinterpret_cast<char*>(p.value->data()),
               static_cast<std::streamsize>(sizeof(float) * p.value->size()));
    }
    check(f.good(), "bad-format", "truncated checkpoint payload");
    return model;
}

// ---------------------------------------------------------------------------

struct TrainOptions {
    std::string loss_csv;         // per-step "step,loss" rows when nonempty
    std::string checkpoint_path;  // final checkpoint (and milestones) when nonempty
    long long checkpoint_every = 0;  // extra checkpoint cadence in samples, 0 = off
    long long milestone_every = 25000;
    int val_batch = 32;           // held-out images per milestone evaluation
    int eval_steps = 20;
};

// Joint unsupervised training of encoder + denoiser on the eps objective.
// Labels are never read. Deterministic for a fixed config seed.
inline Dae train_dae(const std::vector<Image>& train_images, const DaeConfig& cfg,
                     const std::vector<Image>& val_images = {}, const TrainOptions& opt = {}) {
    check(!train_images.empty(), "empty-input", "training set is empty");
    Dae model;
    model.build(cfg);

    nn::Adam<float> adam;
    adam.init(model.param_list, cfg.lr);
    Rng rng(mix_seed(cfg.seed, 0x7124));

    std::ofstream loss_csv;
    if (!opt.loss_csv.empty()) {
        loss_csv.open(opt.loss_csv, std::ios::binary);
        check(loss_csv.good(), "io-error", "cannot write loss curve: " + opt.loss_csv);
        loss_csv << "step,loss\n";
    }

    const int B = cfg.batch_size;
    const int ss = cfg.image_size * cfg.image_size;
    const long long steps = std::max<long long>(1, cfg.total_samples / B);
    StepSchedule eval_steps = make_step_schedule(cfg.train_t, opt.eval_steps);

    std::vector<const Image*> val_ptrs;
    for (const auto& v : val_images) {
        val_ptrs.push_back(&v);
        if (static_cast<int>(val_ptrs.size()) >= opt.val_batch) break;
    }

    long long next_milestone = opt.milestone_every;
    long long next_checkpoint = opt.checkpoint_every;
    nn::Mat<float> x0(1, static_cast<Eigen::Index>(B) * ss);
    for (long long step = 1; step <= steps; ++step) {
        std::vector<int> t(static_cast<std::size_t>(B));
        for (int bi = 0; bi < B; ++bi) {
            const Image& img = train_images[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(train_images.size()) - 1))];
            check(static_cast<int>(img.px.size()) == ss, "shape-mismatch",
                  "training image does not match model size");
            for (int i = 0; i < ss; ++i)
                x0(0, static_cast<Eigen::Index>(bi) * ss + i) = 2.f * img.px[static_cast<std::size_t>(i)] - 1.f;
            t[static_cast<std::size_t>(bi)] = static_cast<int>(rng.uniform_int(1, cfg.train_t));
        }
        nn::Mat<float> eps(1, x0.cols());
        for (Eigen::Index i = 0; i < eps.size(); ++i)
            eps.data()[i] = static_cast<float>(rng.normal());

        nn::zero_grads(model.param_list);
        double loss = model.loss_and_grad(x0, t, eps);
        check(std::isfinite(loss), "diverged", "training loss is not finite");
        adam.step(model.param_list);
        model.samples_seen += B;

        if (loss_csv.is_open()) loss_csv << step << ',' << loss << '\n';

        if (!val_ptrs.empty() && model.samples_seen >= next_milestone) {
            next_milestone += opt.milestone_every;
            double vm = model.reconstruction_mse(val_ptrs, eval_steps);
            model.milestones.push_back({model.samples_seen, vm});
        }
        if (opt.checkpoint_every > 0 && !opt.checkpoint_path.empty() &&
            model.samples_seen >= next_checkpoint) {
            next_checkpoint += opt.checkpoint_every;
            save_checkpoint(opt.checkpoint_path + "." + std::to_string(model.samples_seen),
                            model);
        }
    }

    if (!val_ptrs.empty() &&
        (model.milestones.empty() || model.milestones.back().samples < model.samples_seen)) {
        double vm = model.reconstruction_mse(val_ptrs, eval_steps);
        model.milestones.push_back({model.samples_seen, vm});
    }
    if (!opt.checkpoint_path.empty()) save_checkpoint(opt.checkpoint_path, model);
    return model;
}

}  // namespace vfg
