// Minimal trainable NN stack for the diffusion autoencoder. Feature maps are
// column-major matrices [C, B*H*W] with column index (b*H + y)*W + x, so that
// im2col gathers and channel vectors stay contiguous. Every layer caches what
// its backward pass needs; backward accumulates parameter gradients and
// returns the input gradient. All parameters (biases included) are matrices,
// giving the optimizer and checkpoint writer one uniform registry.
#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "vfg/common.hpp"

namespace vfg::nn {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

template <class T>
struct ParamRef {
    std::string name;
    Mat<T>* value;
    Mat<T>* grad;
};

template <class T>
using ParamList = std::vector<ParamRef<T>>;

template <class T>
inline void he_init(Mat<T>& w, double fan_in, Rng& rng) {
    T scale = static_cast<T>(std::sqrt(2.0 / fan_in));
    for (Eigen::Index i = 0; i < w.size(); ++i)
        w.data()[i] = static_cast<T>(rng.normal()) * scale;
}

// ---------------------------------------------------------------------------

template <class T>
struct Dense {
    Mat<T> w, gw;  // [out, in]
    Mat<T> b, gb;  // [out, 1]
    Mat<T> x_cache;

    void init(int in, int out, Rng& rng, bool zero = false) {
        w.setZero(out, in);
        b.setZero(out, 1);
        if (!zero) he_init(w, in, rng);
        gw.setZero(out, in);
        gb.setZero(out, 1);
    }

    Mat<T> forward(const Mat<T>& x) {
        x_cache = x;
        Mat<T> y = w * x;
        y.colwise() += b.col(0);
        return y;
    }

    Mat<T> backward(const Mat<T>& dy) {
        gw.noalias() += dy * x_cache.transpose();
        gb.col(0).noalias() += dy.rowwise().sum();
        return w.transpose() * dy;
    }

    void params(const std::string& prefix, ParamList<T>& out) {
        out.push_back({prefix + ".w", &w, &gw});
        out.push_back({prefix + ".b", &b, &gb});
    }
};

// ---------------------------------------------------------------------------

// k x k convolution, zero padding, stride 1 or 2. Weights are
// [cout, k*k*cin] with row index (ky*k + kx)*cin + ci, matching im2col.
// The unfolded input is cached for the backward pass; recomputing it would
// cost another gather per step.
template <class T>
struct Conv2d {
    int cin = 0, cout = 0, k = 3, stride = 1, pad = 1;
    bool need_dx = true;  // leaf convs skip the input-gradient GEMM
    Mat<T> w, gw;
    Mat<T> b, gb;

    Mat<T> col_cache;
    int bsz = 0, h_in = 0, w_in = 0;

    void init(int cin_, int cout_, int k_, int stride_, Rng& rng, bool zero = false) {
        cin = cin_;
        cout = cout_;
        k = k_;
        stride = stride_;
        pad = (k - 1) / 2;
        w.setZero(cout, k * k * cin);
        b.setZero(cout, 1);
        if (!zero) he_init(w, static_cast<double>(k) * k * cin, rng);
        gw.setZero(cout, k * k * cin);
        gb.setZero(cout, 1);
    }

    int out_h() const { return (h_in + 2 * pad - k) / stride + 1; }
    int out_w() const { return (w_in + 2 * pad - k) / stride + 1; }

    void im2col(const Mat<T>& x, Mat<T>& col) const {
        const int ho = out_h(), wo = out_w();
        const Eigen::Index rows = static_cast<Eigen::Index>(k) * k * cin;
        col.resize(rows, static_cast<Eigen::Index>(bsz) * ho * wo);
        const T* xd = x.data();
        T* cd = col.data();
        for (int bi = 0; bi < bsz; ++bi) {
            for (int oy = 0; oy < ho; ++oy) {
                for (int ox = 0; ox < wo; ++ox) {
                    T* dst = cd;
                    for (int ky = 0; ky < k; ++ky) {
                        int y = oy * stride + ky - pad;
                        for (int kx = 0; kx < k; ++kx) {
                            int xx = ox * stride + kx - pad;
                            if (y < 0 || y >= h_in || xx < 0 || xx >= w_in) {
                                std::memset(dst, 0, sizeof(T) * cin);
                            } else {
                                const T* src =
                                    xd + (static_cast<std::size_t>(bi) * h_in + y) * w_in * cin +
                                    static_cast<std::size_t>(xx) * cin;
                                std::memcpy(dst, src, sizeof(T) * cin);
                            }
                            dst += cin;
                        }
                    }
                    cd += rows;
                }
            }
        }
    }

    void col2im(const Mat<T>& col, Mat<T>& dx) const {
        const int ho = out_h(), wo = out_w();
        dx.setZero(cin, static_cast<Eigen::Index>(bsz) * h_in * w_in);
        T* xd = dx.data();
        const T* cd = col.data();
        const Eigen::Index rows = col.rows();
        for (int bi = 0; bi < bsz; ++bi) {
            for (int oy = 0; oy < ho; ++oy) {
                for (int ox = 0; ox < wo; ++ox) {
                    const T* src = cd;
                    for (int ky = 0; ky < k; ++ky) {
                        int y = oy * stride + ky - pad;
                        for (int kx = 0; kx < k; ++kx) {
                            int xx = ox * stride + kx - pad;
                            if (y >= 0 && y < h_in && xx >= 0 && xx < w_in) {
                                T* dst =
                                    xd + (static_cast<std::size_t>(bi) * h_in + y) * w_in * cin +
                                    static_cast<std::size_t>(xx) * cin;
                                for (int ci = 0; ci < cin; ++ci) dst[ci] += src[ci];
                            }
                            src += cin;
                        }
                    }
                    cd += rows;
                }
            }
        }
    }

    Mat<T> forward(const Mat<T>& x, int B, int H, int W) {
        check(x.rows() == cin && x.cols() == static_cast<Eigen::Index>(B) * H * W,
              "shape-mismatch", "conv input shape");
        bsz = B;
        h_in = H;
        w_in = W;
        im2col(x, col_cache);
        Mat<T> y = w * col_cache;
        y.colwise() += b.col(0);
        return y;
    }

    Mat<T> backward(const Mat<T>& dy) {
        gw.noalias() += dy * col_cache.transpose();
        gb.col(0).noalias() += dy.rowwise().sum();
        if (!need_dx) return Mat<T>();
        Mat<T> dcol = w.transpose() * dy;
        Mat<T> dx;
        col2im(dcol, dx);
        return dx;
    }

    void params(const std::string& prefix, ParamList<T>& out) {
        out.push_back({prefix + ".w", &w, &gw});
        out.push_back({prefix + ".b", &b, &gb});
    }
};

// ---------------------------------------------------------------------------

template <class T>
struct GroupNorm {
    int c = 0, groups = 1;
    T eps = static_cast<T>(1e-5);
    Mat<T> gamma, ggamma;  // [c, 1]
    Mat<T> beta, gbeta;

    Mat<T> xhat;
    std::vector<T> inv_std;  // per (b, group)
    int bsz = 0, hw = 0;

    void init(int c_, int groups_) {
        check(groups_ >= 1 && c_ % groups_ == 0, "invalid-config",
              "groups must divide channel count");
        c = c_;
        groups = groups_;
        gamma.setOnes(c, 1);
        beta.setZero(c, 1);
        ggamma.setZero(c, 1);
        gbeta.setZero(c, 1);
    }

    Mat<T> forward(const Mat<T>& x, int B, int HW) {
        check(x.rows() == c && x.cols() == static_cast<Eigen::Index>(B) * HW,
              "shape-mismatch", "groupnorm input shape");
        bsz = B;
        hw = HW;
        const int cg = c / groups;
        xhat.resize(c, x.cols());
        inv_std.assign(static_cast<std::size_t>(B) * groups, T(0));
        for (int bi = 0; bi < B; ++bi) {
            for (int g = 0; g < groups; ++g) {
                auto blk = x.block(g * cg, static_cast<Eigen::Index>(bi) * HW, cg, HW);
                T mean = blk.mean();
                T var = (blk.array() - mean).square().mean();
                T is = T(1) / std::sqrt(var + eps);
                inv_std[static_cast<std::size_t>(bi) * groups + g] = is;
                xhat.block(g * cg, static_cast<Eigen::Index>(bi) * HW, cg, HW) =
                    (blk.array() - mean) * is;
            }
        }
        Mat<T> y = xhat.array().colwise() * gamma.col(0).array();
        y.array().colwise() += beta.col(0).array();
        return y;
    }

    Mat<T> backward(const Mat<T>& dy) {
        const int cg = c / groups;
        ggamma.col(0).noalias() += dy.cwiseProduct(xhat).rowwise().sum();
        gbeta.col(0).noalias() += dy.rowwise().sum();
        Mat<T> dxhat = dy.array().colwise() * gamma.col(0).array();
        Mat<T> dx(c, dy.cols());
        for (int bi = 0; bi < bsz; ++bi) {
            for (int g = 0; g < groups; ++g) {
                auto dxh = dxhat.block(g * cg, static_cast<Eigen::Index>(bi) * hw, cg, hw);
                auto xh = xhat.block(g * cg, static_cast<Eigen::Index>(bi) * hw, cg, hw);
                T is = inv_std[static_cast<std::size_t>(bi) * groups + g];
                T m1 = dxh.mean();
                T m2 = dxh.cwiseProduct(xh).mean();
                dx.block(g * cg, static_cast<Eigen::Index>(bi) * hw, cg, hw) =
                    ((dxh.array() - m1) - xh.array() * m2) * is;
            }
        }
        return dx;
    }

    void params(const std::string& prefix, ParamList<T>& out) {
        out.push_back({prefix + ".gamma", &gamma, &ggamma});
        out.push_back({prefix + ".beta", &beta, &gbeta});
    }
};

// ---------------------------------------------------------------------------

template <class T>
struct SiLU {
    Mat<T> x_cache, sig;

    Mat<T> forward(const Mat<T>& x) {
        x_cache = x;
        sig = ((-x.array()).exp() + T(1)).inverse();
        return x.cwiseProduct(sig);
    }

    Mat<T> backward(const Mat<T>& dy) {
        // d(x*s)/dx = s + x s (1 - s)
        Mat<T> g =
            sig.array() * (T(1) + x_cache.array() * (T(1) - sig.array()));
        return dy.cwiseProduct(g);
    }
};

// ---------------------------------------------------------------------------

// Nearest-neighbor 2x upsample.
template <class T>
struct Upsample2x {
    int bsz = 0, h = 0, w = 0;

    Mat<T> forward(const Mat<T>& x, int B, int H, int W) {
        bsz = B;
        h = H;
        w = W;
        Mat<T> y(x.rows(), static_cast<Eigen::Index>(B) * 4 * H * W);
        for (int bi = 0; bi < B; ++bi)
            for (int yy = 0; yy < 2 * H; ++yy)
                for (int xx = 0; xx < 2 * W; ++xx)
                    y.col((static_cast<Eigen::Index>(bi) * 2 * H + yy) * 2 * W + xx) =
                        x.col((static_cast<Eigen::Index>(bi) * H + yy / 2) * W + xx / 2);
        return y;
    }

    Mat<T> backward(const Mat<T>& dy) {
        Mat<T> dx;
        dx.setZero(dy.rows(), static_cast<Eigen::Index>(bsz) * h * w);
        for (int bi = 0; bi < bsz; ++bi)
            for (int yy = 0; yy < 2 * h; ++yy)
                for (int xx = 0; xx < 2 * w; ++xx)
                    dx.col((static_cast<Eigen::Index>(bi) * h + yy / 2) * w + xx / 2) +=
                        dy.col((static_cast<Eigen::Index>(bi) * 2 * h + yy) * 2 * w + xx);
        return dx;
    }
};

// Global average pool over the spatial extent: [C, B*HW] -> [C, B].
template <class T>
struct GlobalAvgPool {
    int hw = 0;

    Mat<T> forward(const Mat<T>& x, int B, int HW) {
        hw = HW;
        Mat<T> y(x.rows(), B);
        for (int bi = 0; bi < B; ++bi)
            y.col(bi) = x.middleCols(static_cast<Eigen::Index>(bi) * HW, HW).rowwise().mean();
        return y;
    }

    Mat<T> backward(const Mat<T>& dy) {
        Mat<T> dx(dy.rows(), dy.cols() * hw);
        T inv = T(1) / static_cast<T>(hw);
        for (Eigen::Index bi = 0; bi < dy.cols(); ++bi)
            dx.middleCols(bi * hw, hw).colwise() = dy.col(bi) * inv;
        return dx;
    }
};

// ---------------------------------------------------------------------------

// Sinusoidal timestep embedding, [dim, B]. No parameters.
template <class T>
inline Mat<T> time_embedding(const std::vector<int>& t, int dim) {
    const int half = dim / 2;
    Mat<T> e(dim, static_cast<Eigen::Index>(t.size()));
    for (std::size_t bi = 0; bi < t.size(); ++bi) {
        for (int i = 0; i < half; ++i) {
            double freq = std::exp(-std::log(10000.0) * i / (half > 1 ? half - 1 : 1));
            double arg = static_cast<double>(t[bi]) * freq;
            e(i, static_cast<Eigen::Index>(bi)) = static_cast<T>(std::sin(arg));
            e(half + i, static_cast<Eigen::Index>(bi)) = static_cast<T>(std::cos(arg));
        }
    }
    return e;
}

// ---------------------------------------------------------------------------

// Residual block with conditioning: GN -> SiLU -> conv, then a feature-wise
// affine (scale, shift) from the cond vector on the second GN, SiLU -> conv,
// plus identity / 1x1 skip. Second conv starts at zero so the block begins
// as an identity.
template <class T>
struct ResBlock {
    int cin = 0, cout = 0;
    GroupNorm<T> gn1, gn2;
    SiLU<T> act1, act2;
    Conv2d<T> conv1, conv2;
    Dense<T> affine;  // cond -> [2*cout]
    Conv2d<T> skip;
    bool has_skip = false;

    Mat<T> gn2_out, scale;  // caches for the modulation backward
    int bsz = 0, hw = 0;

    void init(int cin_, int cout_, int cond_dim, int groups, Rng& rng) {
        cin = cin_;
        cout = cout_;
        gn1.init(cin, groups);
        conv1.init(cin, cout, 3, 1, rng);
        // live conditioning from the first step; the zero-init conv2 keeps
        // the residual path stable regardless
        affine.init(cond_dim, 2 * cout, rng);
        gn2.init(cout, groups);
        conv2.init(cout, cout, 3, 1, rng, /*zero=*/true);
        has_skip = cin != cout;
        if (has_skip) skip.init(cin, cout, 1, 1, rng);
    }

    Mat<T> forward(const Mat<T>& x, const Mat<T>& cond, int B, int H, int W) {
        bsz = B;
        hw = H * W;
        Mat<T> h = act1.forward(gn1.forward(x, B, hw));
        h = conv1.forward(h, B, H, W);
        Mat<T> sb = affine.forward(cond);  // [2*cout, B]
        scale = sb.topRows(cout);
        Mat<T> shift = sb.bottomRows(cout);
        gn2_out = gn2.forward(h, B, hw);
        Mat<T> mod(cout, h.cols());
        for (int bi = 0; bi < B; ++bi) {
            mod.middleCols(static_cast<Eigen::Index>(bi) * hw, hw) =
                (gn2_out.middleCols(static_cast<Eigen::Index>(bi) * hw, hw).array().colwise() *
                 (T(1) + scale.col(bi).array()))
                    .colwise() +
                shift.col(bi).array();
        }
        Mat<T> out = conv2.forward(act2.forward(mod), B, H, W);
        if (has_skip)
            out += skip.forward(x, B, H, W);
        else
            out += x;
        return out;
    }

    // Accumulates the conditioning gradient into dcond.
    Mat<T> backward(const Mat<T>& dy, Mat<T>& dcond) {
        Mat<T> dmod = act2.backward(conv2.backward(dy));
        Mat<T> dg(cout, dmod.cols());
        Mat<T> dsb(2 * cout, bsz);
        for (int bi = 0; bi < bsz; ++bi) {
            auto dm = dmod.middleCols(static_cast<Eigen::Index>(bi) * hw, hw);
            auto g = gn2_out.middleCols(static_cast<Eigen::Index>(bi) * hw, hw);
            dg.middleCols(static_cast<Eigen::Index>(bi) * hw, hw) =
                dm.array().colwise() * (T(1) + scale.col(bi).array());
            dsb.col(bi).head(cout) = dm.cwiseProduct(g).rowwise().sum();
            dsb.col(bi).tail(cout) = dm.rowwise().sum();
        }
        dcond += affine.backward(dsb);
        Mat<T> dx = gn1.backward(act1.backward(conv1.backward(gn2.backward(dg))));
        if (has_skip)
            dx += skip.backward(dy);
        else
            dx += dy;
        return dx;
    }

    void params(const std::string& prefix, ParamList<T>& out) {
        gn1.params(prefix + ".gn1", out);
        conv1.params(prefix + ".conv1", out);
        affine.params(prefix + ".affine", out);
        gn2.params(prefix + ".gn2", out);
        conv2.params(prefix + ".conv2", out);
        if (has_skip) skip.params(prefix + ".skip", out);
    }
};

// ---------------------------------------------------------------------------

template <class T>
struct Adam {
    double lr = 1e-4, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long long t = 0;
    std::vector<Mat<T>> m, v;

    void init(const ParamList<T>& params, double lr_) {
        lr = lr_;
        t = 0;
        m.clear();
        v.clear();
        for (const auto& p : params) {
            m.push_back(Mat<T>::Zero(p.value->rows(), p.value->cols()));
            v.push_back(Mat<T>::Zero(p.value->rows(), p.value->cols()));
        }
    }

    void step(const ParamList<T>& params) {
        ++t;
        const T b1 = static_cast<T>(beta1), b2 = static_cast<T>(beta2);
        const T corr1 = static_cast<T>(1.0 - std::pow(beta1, t));
        const T corr2 = static_cast<T>(1.0 - std::pow(beta2, t));
        const T a = static_cast<T>(lr);
        const T e = static_cast<T>(eps);
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto& g = *params[i].grad;
            m[i] = b1 * m[i] + (T(1) - b1) * g;
            v[i] = b2 * v[i].array() + (T(1) - b2) * g.array().square();
            params[i].value->array() -=
                a * (m[i].array() / corr1) / ((v[i].array() / corr2).sqrt() + e);
        }
    }
};

template <class T>
inline void zero_grads(const ParamList<T>& params) {
    for (const auto& p : params) p.grad->setZero();
}

template <class T>
inline std::size_t param_count(const ParamList<T>& params) {
    std::size_t n = 0;
    for (const auto& p : params) n += static_cast<std::size_t>(p.value->size());
    return n;
}

}  // namespace vfg::nn
