#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "logogan/core/tensor.hpp"
#include "logogan/nn/param.hpp"

namespace logogan {

using MatX = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<MatX>;
using ConstMapMat = Eigen::Map<const MatX>;

constexpr double kLeakySlope = 0.2;
constexpr double kNormEps = 1e-8;

// ---------------------------------------------------------------------------
// stateless ops

inline Tensor upsample2x(const Tensor& x) {
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    Tensor y({n, c, 2 * h, 2 * w});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j)
            for (int yy = 0; yy < h; ++yy)
                for (int xx = 0; xx < w; ++xx) {
                    const double v = x.at4(i, j, yy, xx);
                    y.at4(i, j, 2 * yy, 2 * xx) = v;
                    y.at4(i, j, 2 * yy, 2 * xx + 1) = v;
                    y.at4(i, j, 2 * yy + 1, 2 * xx) = v;
                    y.at4(i, j, 2 * yy + 1, 2 * xx + 1) = v;
                }
    return y;
}

inline Tensor upsample2x_backward(const Tensor& dy) {
    const int n = dy.dim(0), c = dy.dim(1), h = dy.dim(2) / 2, w = dy.dim(3) / 2;
    Tensor dx({n, c, h, w});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j)
            for (int yy = 0; yy < h; ++yy)
                for (int xx = 0; xx < w; ++xx)
                    dx.at4(i, j, yy, xx) =
                        dy.at4(i, j, 2 * yy, 2 * xx) + dy.at4(i, j, 2 * yy, 2 * xx + 1) +
                        dy.at4(i, j, 2 * yy + 1, 2 * xx) + dy.at4(i, j, 2 * yy + 1, 2 * xx + 1);
    return dx;
}

inline Tensor avgpool2x(const Tensor& x) {
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2) / 2, w = x.dim(3) / 2;
    Tensor y({n, c, h, w});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j)
            for (int yy = 0; yy < h; ++yy)
                for (int xx = 0; xx < w; ++xx)
                    y.at4(i, j, yy, xx) =
                        0.25 * (x.at4(i, j, 2 * yy, 2 * xx) + x.at4(i, j, 2 * yy, 2 * xx + 1) +
                                x.at4(i, j, 2 * yy + 1, 2 * xx) + x.at4(i, j, 2 * yy + 1, 2 * xx + 1));
    return y;
}

inline Tensor avgpool2x_backward(const Tensor& dy) {
    const int n = dy.dim(0), c = dy.dim(1), h = dy.dim(2) * 2, w = dy.dim(3) * 2;
    Tensor dx({n, c, h, w});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j)
            for (int yy = 0; yy < h; ++yy)
                for (int xx = 0; xx < w; ++xx)
                    dx.at4(i, j, yy, xx) = 0.25 * dy.at4(i, j, yy / 2, xx / 2);
    return dx;
}

// (1-alpha)*low + alpha*high, exact at the endpoints
inline Tensor progressive_blend(const Tensor& low, const Tensor& high, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha outside [0,1]");
    if (!low.same_shape(high)) throw std::invalid_argument("blend shape mismatch");
    if (alpha == 0.0) return low;
    if (alpha == 1.0) return high;
    Tensor out(low.shape);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data[i] = (1.0 - alpha) * low.data[i] + alpha * high.data[i];
    return out;
}

// x + scale_c * noise, noise shared across channels
inline Tensor apply_noise(const Tensor& x, const Tensor& noise, const std::vector<double>& scale) {
    if (noise.dim(0) != x.dim(0) || noise.dim(1) != 1 || noise.dim(2) != x.dim(2) ||
        noise.dim(3) != x.dim(3))
        throw std::invalid_argument("noise shape mismatch");
    if (static_cast<int>(scale.size()) != x.dim(1))
        throw std::invalid_argument("noise scale count mismatch");
    Tensor y(x.shape);
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j)
            for (int yy = 0; yy < h; ++yy)
                for (int xx = 0; xx < w; ++xx)
                    y.at4(i, j, yy, xx) = x.at4(i, j, yy, xx) + scale[j] * noise.at4(i, 0, yy, xx);
    return y;
}

// AdaIN: per (sample, channel) spatial normalization restyled with (s, b).
// Statistics use the biased variance with an epsilon floor under the root.
struct AdaINCache {
    Tensor xhat;
    std::vector<double> inv_sigma; // n*c
};

inline Tensor adain_forward(const Tensor& x, const Tensor& s, const Tensor& b, AdaINCache* cache) {
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (s.dim(0) != n || s.dim(1) != c || !s.same_shape(b))
        throw std::invalid_argument("adain style shape mismatch");
    const int spatial = h * w;
    Tensor y(x.shape);
    if (cache) {
        cache->xhat = Tensor(x.shape);
        cache->inv_sigma.assign(static_cast<std::size_t>(n) * c, 0.0);
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) {
            double mean = 0.0;
            for (int p = 0; p < spatial; ++p) mean += x.data[(static_cast<std::size_t>(i) * c + j) * spatial + p];
            mean /= spatial;
            double var = 0.0;
            for (int p = 0; p < spatial; ++p) {
                const double d = x.data[(static_cast<std::size_t>(i) * c + j) * spatial + p] - mean;
                var += d * d;
            }
            var /= spatial;
            const double inv_sigma = 1.0 / std::sqrt(var + kNormEps);
            const double sc = s.at2(i, j), bi = b.at2(i, j);
            for (int p = 0; p < spatial; ++p) {
                const std::size_t idx = (static_cast<std::size_t>(i) * c + j) * spatial + p;
                const double xh = (x.data[idx] - mean) * inv_sigma;
                y.data[idx] = sc * xh + bi;
                if (cache) cache->xhat.data[idx] = xh;
            }
            if (cache) cache->inv_sigma[static_cast<std::size_t>(i) * c + j] = inv_sigma;
        }
    return y;
}

// returns dx; fills ds, db (same shape as s)
inline Tensor adain_backward(const Tensor& dy, const Tensor& s, const AdaINCache& cache,
                             Tensor& ds, Tensor& db) {
    const int n = dy.dim(0), c = dy.dim(1), spatial = dy.dim(2) * dy.dim(3);
    Tensor dx(dy.shape);
    ds = Tensor({n, c});
    db = Tensor({n, c});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) {
            const std::size_t base = (static_cast<std::size_t>(i) * c + j) * spatial;
            const double sc = s.at2(i, j);
            double sum_dy = 0.0, sum_dy_xhat = 0.0;
            for (int p = 0; p < spatial; ++p) {
                sum_dy += dy.data[base + p];
                sum_dy_xhat += dy.data[base + p] * cache.xhat.data[base + p];
            }
            ds.at2(i, j) = sum_dy_xhat;
            db.at2(i, j) = sum_dy;
            const double inv_sigma = cache.inv_sigma[static_cast<std::size_t>(i) * c + j];
            const double mean_dxhat = sc * sum_dy / spatial;
            const double mean_dxhat_xhat = sc * sum_dy_xhat / spatial;
            for (int p = 0; p < spatial; ++p) {
                const double dxhat = sc * dy.data[base + p];
                dx.data[base + p] =
                    inv_sigma * (dxhat - mean_dxhat - cache.xhat.data[base + p] * mean_dxhat_xhat);
            }
        }
    return dx;
}

// ---------------------------------------------------------------------------
// layers with parameters; forward caches what backward needs, single stream

class LeakyReLU {
public:
    Tensor forward(const Tensor& x) {
        x_ = x;
        Tensor y(x.shape);
        for (std::size_t i = 0; i < x.size(); ++i)
            y.data[i] = x.data[i] > 0.0 ? x.data[i] : kLeakySlope * x.data[i];
        return y;
    }
    Tensor backward(const Tensor& dy) const {
        Tensor dx(dy.shape);
        for (std::size_t i = 0; i < dy.size(); ++i)
            dx.data[i] = x_.data[i] > 0.0 ? dy.data[i] : kLeakySlope * dy.data[i];
        return dx;
    }

private:
    Tensor x_;
};

class Tanh {
public:
    Tensor forward(const Tensor& x) {
        y_ = Tensor(x.shape);
        for (std::size_t i = 0; i < x.size(); ++i) y_.data[i] = std::tanh(x.data[i]);
        return y_;
    }
    Tensor backward(const Tensor& dy) const {
        Tensor dx(dy.shape);
        for (std::size_t i = 0; i < dy.size(); ++i)
            dx.data[i] = dy.data[i] * (1.0 - y_.data[i] * y_.data[i]);
        return dx;
    }

private:
    Tensor y_;
};

// Row-wise feature normalization: x / sqrt(mean(x^2) + eps)
class PixelNorm {
public:
    Tensor forward(const Tensor& x) {
        x_ = x;
        const int n = x.dim(0), d = x.dim(1);
        inv_norm_.assign(n, 0.0);
        Tensor y(x.shape);
        for (int i = 0; i < n; ++i) {
            double ms = 0.0;
            for (int j = 0; j < d; ++j) ms += x.at2(i, j) * x.at2(i, j);
            ms = ms / d + kNormEps;
            inv_norm_[i] = 1.0 / std::sqrt(ms);
            for (int j = 0; j < d; ++j) y.at2(i, j) = x.at2(i, j) * inv_norm_[i];
        }
        return y;
    }
    Tensor backward(const Tensor& dy) const {
        const int n = dy.dim(0), d = dy.dim(1);
        Tensor dx(dy.shape);
        for (int i = 0; i < n; ++i) {
            double dot = 0.0;
            for (int j = 0; j < d; ++j) dot += dy.at2(i, j) * x_.at2(i, j);
            const double inv = inv_norm_[i];
            const double k = dot * inv * inv * inv / d;
            for (int j = 0; j < d; ++j) dx.at2(i, j) = dy.at2(i, j) * inv - x_.at2(i, j) * k;
        }
        return dx;
    }

private:
    Tensor x_;
    std::vector<double> inv_norm_;
};

// Fully connected layer with optional equalized learning-rate scaling:
// weights are stored N(0,1) and multiplied by gain/sqrt(fan_in) at runtime.
class Dense {
public:
    void init(const std::string& name, int in, int out, std::uint64_t seed, bool equalized,
              double gain = std::numbers::sqrt2) {
        in_ = in;
        out_ = out;
        weight.init(name + ".weight", {out, in});
        bias.init(name + ".bias", {out});
        weight.fill_normal(seed);
        scale_ = gain / std::sqrt(static_cast<double>(in));
        if (!equalized) {
            for (auto& v : weight.value) v *= scale_;
            scale_ = 1.0;
        }
    }

    // after init: set bias, used by the style affine to start at identity
    void set_bias(const std::vector<double>& b) { bias.value = b; }

    Tensor forward(const Tensor& x) {
        x_ = x;
        const int n = x.dim(0);
        Tensor y({n, out_});
        ConstMapMat xm(x.data.data(), n, in_);
        ConstMapMat wm(weight.value.data(), out_, in_);
        MapMat ym(y.data.data(), n, out_);
        ym.noalias() = xm * wm.transpose() * scale_;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < out_; ++j) y.at2(i, j) += bias.value[j];
        return y;
    }

    Tensor backward(const Tensor& dy, bool accumulate = true) {
        const int n = dy.dim(0);
        Tensor dx({n, in_});
        ConstMapMat dym(dy.data.data(), n, out_);
        ConstMapMat wm(weight.value.data(), out_, in_);
        MapMat dxm(dx.data.data(), n, in_);
        dxm.noalias() = dym * wm * scale_;
        if (accumulate) {
            ConstMapMat xm(x_.data.data(), n, in_);
            MapMat dwm(weight.grad.data(), out_, in_);
            dwm.noalias() += dym.transpose() * xm * scale_;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < out_; ++j) bias.grad[j] += dy.at2(i, j);
        }
        return dx;
    }

    void collect(ParamList& out) {
        out.push_back(&weight);
        out.push_back(&bias);
    }

    int in_dim() const { return in_; }
    int out_dim() const { return out_; }

    Param weight, bias;

private:
    int in_ = 0, out_ = 0;
    double scale_ = 1.0;
    Tensor x_;
};

// kxk convolution, stride 1, zero padding k/2, via im2col + GEMM.
class Conv2D {
public:
    void init(const std::string& name, int in_ch, int out_ch, int k, std::uint64_t seed,
              bool equalized, double gain = std::numbers::sqrt2) {
        in_ch_ = in_ch;
        out_ch_ = out_ch;
        k_ = k;
        weight.init(name + ".weight", {out_ch, in_ch * k * k});
        bias.init(name + ".bias", {out_ch});
        weight.fill_normal(seed);
        scale_ = gain / std::sqrt(static_cast<double>(in_ch * k * k));
        if (!equalized) {
            for (auto& v : weight.value) v *= scale_;
            scale_ = 1.0;
        }
    }

    Tensor forward(const Tensor& x) {
        const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
        if (x.dim(1) != in_ch_) throw std::invalid_argument("conv channel mismatch");
        h_ = h;
        w_ = w;
        n_ = n;
        im2col(x);
        Tensor y({n, out_ch_, h, w});
        const int cols = n * h * w;
        ConstMapMat wm(weight.value.data(), out_ch_, in_ch_ * k_ * k_);
        // cols_ is (in*k*k) x (n*h*w); output channel-major per sample needs care:
        // we lay columns out as sample-major [n][h*w]
        MatX ym = wm * cols_ * scale_; // out_ch x (n*h*w)
        for (int i = 0; i < n; ++i)
            for (int oc = 0; oc < out_ch_; ++oc)
                for (int p = 0; p < h * w; ++p)
                    y.data[(static_cast<std::size_t>(i) * out_ch_ + oc) * h * w + p] =
                        ym(oc, static_cast<std::ptrdiff_t>(i) * h * w + p) + bias.value[oc];
        return y;
    }

    Tensor backward(const Tensor& dy, bool accumulate = true) {
        const int n = n_, h = h_, w = w_;
        MatX dym(out_ch_, static_cast<std::ptrdiff_t>(n) * h * w);
        for (int i = 0; i < n; ++i)
            for (int oc = 0; oc < out_ch_; ++oc)
                for (int p = 0; p < h * w; ++p)
                    dym(oc, static_cast<std::ptrdiff_t>(i) * h * w + p) =
                        dy.data[(static_cast<std::size_t>(i) * out_ch_ + oc) * h * w + p];
        if (accumulate) {
            MapMat dwm(weight.grad.data(), out_ch_, in_ch_ * k_ * k_);
            dwm.noalias() += dym * cols_.transpose() * scale_;
            for (int oc = 0; oc < out_ch_; ++oc) bias.grad[oc] += dym.row(oc).sum();
        }
        ConstMapMat wm(weight.value.data(), out_ch_, in_ch_ * k_ * k_);
        MatX dcols = wm.transpose() * dym * scale_; // (in*k*k) x (n*h*w)
        return col2im(dcols);
    }

    void collect(ParamList& out) {
        out.push_back(&weight);
        out.push_back(&bias);
    }

    Param weight, bias;

private:
    void im2col(const Tensor& x) {
        const int pad = k_ / 2, h = h_, w = w_;
        cols_ = MatX::Zero(in_ch_ * k_ * k_, static_cast<std::ptrdiff_t>(n_) * h * w);
        for (int i = 0; i < n_; ++i)
            for (int ci = 0; ci < in_ch_; ++ci)
                for (int ky = 0; ky < k_; ++ky)
                    for (int kx = 0; kx < k_; ++kx) {
                        const int row = (ci * k_ + ky) * k_ + kx;
                        for (int yy = 0; yy < h; ++yy) {
                            const int sy = yy + ky - pad;
                            if (sy < 0 || sy >= h) continue;
                            for (int xx = 0; xx < w; ++xx) {
                                const int sx = xx + kx - pad;
                                if (sx < 0 || sx >= w) continue;
                                cols_(row, static_cast<std::ptrdiff_t>(i) * h * w + yy * w + xx) =
                                    x.at4(i, ci, sy, sx);
                            }
                        }
                    }
    }

    Tensor col2im(const MatX& dcols) const {
        const int pad = k_ / 2, h = h_, w = w_;
        Tensor dx({n_, in_ch_, h, w});
        for (int i = 0; i < n_; ++i)
            for (int ci = 0; ci < in_ch_; ++ci)
                for (int ky = 0; ky < k_; ++ky)
                    for (int kx = 0; kx < k_; ++kx) {
                        const int row = (ci * k_ + ky) * k_ + kx;
                        for (int yy = 0; yy < h; ++yy) {
                            const int sy = yy + ky - pad;
                            if (sy < 0 || sy >= h) continue;
                            for (int xx = 0; xx < w; ++xx) {
                                const int sx = xx + kx - pad;
                                if (sx < 0 || sx >= w) continue;
                                dx.at4(i, ci, sy, sx) +=
                                    dcols(row, static_cast<std::ptrdiff_t>(i) * h * w + yy * w + xx);
                            }
                        }
                    }
        return dx;
    }

    int in_ch_ = 0, out_ch_ = 0, k_ = 3;
    int n_ = 0, h_ = 0, w_ = 0;
    double scale_ = 1.0;
    MatX cols_;
};

// Learned per-channel noise strength around the shared noise plane.
class NoiseInject {
public:
    void init(const std::string& name, int channels) {
        scale.init(name + ".noise_scale", {channels});
    }

    Tensor forward(const Tensor& x, const Tensor& noise) {
        noise_ = noise;
        std::vector<double> s(scale.value.begin(), scale.value.end());
        return apply_noise(x, noise, s);
    }

    Tensor backward(const Tensor& dy, bool accumulate = true) {
        if (accumulate) {
            const int n = dy.dim(0), c = dy.dim(1), h = dy.dim(2), w = dy.dim(3);
            for (int j = 0; j < c; ++j) {
                double g = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int yy = 0; yy < h; ++yy)
                        for (int xx = 0; xx < w; ++xx)
                            g += dy.at4(i, j, yy, xx) * noise_.at4(i, 0, yy, xx);
                scale.grad[j] += g;
            }
        }
        return dy; // dx = dy
    }

    void collect(ParamList& out) { out.push_back(&scale); }

    Param scale;

private:
    Tensor noise_;
};

// AdaIN site: learned affine W -> (s, b), then adain_forward.
// The scale half of the affine bias starts at 1 so the site is initially
// close to plain instance normalization.
class StyleAdaIN {
public:
    void init(const std::string& name, int latent_dim, int channels, std::uint64_t seed,
              bool equalized) {
        channels_ = channels;
        affine_.init(name + ".style", latent_dim, 2 * channels, seed, equalized, 1.0);
        std::vector<double> b(2 * channels, 0.0);
        for (int j = 0; j < channels; ++j) b[j] = 1.0;
        affine_.set_bias(b);
    }

    Tensor forward(const Tensor& x, const Tensor& w_latent) {
        style_ = affine_.forward(w_latent);
        const int n = x.dim(0);
        s_ = Tensor({n, channels_});
        b_ = Tensor({n, channels_});
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < channels_; ++j) {
                s_.at2(i, j) = style_.at2(i, j);
                b_.at2(i, j) = style_.at2(i, channels_ + j);
            }
        return adain_forward(x, s_, b_, &cache_);
    }

    // returns dx; adds the latent gradient into dw
    Tensor backward(const Tensor& dy, Tensor& dw, bool accumulate = true) {
        Tensor ds, db;
        Tensor dx = adain_backward(dy, s_, cache_, ds, db);
        const int n = dy.dim(0);
        Tensor dstyle({n, 2 * channels_});
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < channels_; ++j) {
                dstyle.at2(i, j) = ds.at2(i, j);
                dstyle.at2(i, channels_ + j) = db.at2(i, j);
            }
        Tensor dwl = affine_.backward(dstyle, accumulate);
        for (std::size_t i = 0; i < dw.size(); ++i) dw.data[i] += dwl.data[i];
        return dx;
    }

    void collect(ParamList& out) { affine_.collect(out); }

private:
    int channels_ = 0;
    Dense affine_;
    Tensor style_, s_, b_;
    AdaINCache cache_;
};

} // namespace logogan
