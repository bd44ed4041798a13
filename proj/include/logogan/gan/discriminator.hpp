#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "logogan/gan/config.hpp"
#include "logogan/gan/latent.hpp"
#include "logogan/nn/layers.hpp"

namespace logogan {

namespace detail {

// One discriminator resolution: two convs then average-pool down.
struct DiscBlock {
    int res = 8;
    Conv2D conv0, conv1;
    LeakyReLU act0, act1;

    void init(const GeneratorConfig& cfg, int res_, std::uint64_t seed) {
        res = res_;
        const std::string base = "d.block" + std::to_string(res);
        const int ch = cfg.channels_at(res);
        const int ch_down = cfg.channels_at(res / 2);
        conv0.init(base + ".conv0", ch, ch, 3, seed, cfg.equalized_lr);
        conv1.init(base + ".conv1", ch, ch_down, 3, seed, cfg.equalized_lr);
    }

    Tensor forward(const Tensor& x) {
        Tensor t = act0.forward(conv0.forward(x));
        t = act1.forward(conv1.forward(t));
        return avgpool2x(t);
    }

    Tensor backward(const Tensor& dout, bool accumulate) {
        Tensor d = avgpool2x_backward(dout);
        d = conv1.backward(act1.backward(d), accumulate);
        return conv0.backward(act0.backward(d), accumulate);
    }

    void collect(ParamList& out) {
        conv0.collect(out);
        conv1.collect(out);
    }
};

} // namespace detail

// Progressive critic. Class conditions enter as c constant feature maps
// concatenated to the image channels at the fromRGB input.
class Discriminator {
public:
    void init(const GeneratorConfig& cfg, std::uint64_t seed) {
        cfg.validate();
        cfg_ = cfg;
        const int phases = cfg.num_phases();
        from_rgb_.resize(phases);
        from_rgb_act_.resize(phases);
        blocks_.resize(phases); // blocks_[0] unused
        for (int p = 0; p < phases; ++p) {
            const int res = GeneratorConfig::phase_resolution(p);
            from_rgb_[p].init("d.fromrgb" + std::to_string(res), 3 + cfg.num_classes,
                              cfg.channels_at(res), 1, seed, cfg.equalized_lr);
            if (p > 0) blocks_[p].init(cfg, res, seed);
        }
        const int c4 = cfg.channels_at(4);
        final_conv_.init("d.final.conv", c4, c4, 3, seed, cfg.equalized_lr);
        final_dense_.init("d.final.dense", c4 * 16, c4, seed, cfg.equalized_lr);
        score_.init("d.final.score", c4, 1, seed, cfg.equalized_lr, 1.0);
    }

    const GeneratorConfig& config() const { return cfg_; }

    // images n x 3 x res x res at res = 4 * 2^phase; returns n critic scores
    Tensor forward(const Tensor& images, const Tensor& y, int phase, double alpha) {
        if (phase < 0 || phase > cfg_.max_phase())
            throw std::invalid_argument("phase beyond configured resolutions");
        const int res = GeneratorConfig::phase_resolution(phase);
        if (images.dim(1) != 3 || images.dim(2) != res || images.dim(3) != res)
            throw std::invalid_argument("image resolution does not match phase");
        if (cfg_.num_classes > 0) {
            if (y.dim(0) != images.dim(0) || y.dim(1) != cfg_.num_classes)
                throw std::invalid_argument("condition shape mismatch");
            check_one_hot(y);
        }
        phase_ = phase;
        alpha_ = alpha;
        blended_ = phase > 0 && alpha < 1.0;
        const int n = images.dim(0);

        Tensor h = from_rgb_act_[phase].forward(
            from_rgb_[phase].forward(concat_conditions(images, y)));
        if (phase > 0) {
            h = blocks_[phase].forward(h);
            if (blended_) {
                Tensor low = low_act_.forward(
                    from_rgb_[phase - 1].forward(concat_conditions(avgpool2x(images), y)));
                h = progressive_blend(low, h, alpha);
            }
            for (int p = phase - 1; p >= 1; --p) h = blocks_[p].forward(h);
        }
        h = final_act0_.forward(final_conv_.forward(h));
        Tensor flat({n, h.dim(1) * h.dim(2) * h.dim(3)});
        flat.data = h.data;
        flat_shape_ = h.shape;
        Tensor t = final_act1_.forward(final_dense_.forward(flat));
        return score_.forward(t); // n x 1
    }

    // dscores n x 1 -> gradient w.r.t. the image channels (condition maps
    // are constants and their gradient is dropped)
    Tensor backward(const Tensor& dscores, bool accumulate = true) {
        Tensor d = score_.backward(dscores, accumulate);
        d = final_dense_.backward(final_act1_.backward(d), accumulate);
        Tensor dh(flat_shape_);
        dh.data = d.data;
        dh = final_conv_.backward(final_act0_.backward(dh), accumulate);

        Tensor dimages;
        if (phase_ > 0) {
            for (int p = 1; p <= phase_ - 1; ++p) dh = blocks_[p].backward(dh, accumulate);
            Tensor dhigh = dh;
            if (blended_) {
                Tensor dlow(dh.shape);
                for (std::size_t i = 0; i < dh.size(); ++i) {
                    dlow.data[i] = (1.0 - alpha_) * dh.data[i];
                    dhigh.data[i] = alpha_ * dh.data[i];
                }
                Tensor dlow_in =
                    from_rgb_[phase_ - 1].backward(low_act_.backward(dlow), accumulate);
                dimages = avgpool2x_backward(slice_image_channels(dlow_in));
            }
            dh = blocks_[phase_].backward(dhigh, accumulate);
        }
        Tensor din = from_rgb_[phase_].backward(from_rgb_act_[phase_].backward(dh), accumulate);
        Tensor dimg = slice_image_channels(din);
        if (dimages.size() > 0)
            for (std::size_t i = 0; i < dimg.size(); ++i) dimg.data[i] += dimages.data[i];
        return dimg;
    }

    void collect_trainable(ParamList& out) {
        for (auto& f : from_rgb_) f.collect(out);
        for (std::size_t p = 1; p < blocks_.size(); ++p) blocks_[p].collect(out);
        final_conv_.collect(out);
        final_dense_.collect(out);
        score_.collect(out);
    }

private:
    Tensor concat_conditions(const Tensor& images, const Tensor& y) const {
        if (cfg_.num_classes == 0) return images;
        const int n = images.dim(0), h = images.dim(2), w = images.dim(3);
        Tensor out({n, 3 + cfg_.num_classes, h, w});
        for (int i = 0; i < n; ++i) {
            for (int c = 0; c < 3; ++c)
                for (int yy = 0; yy < h; ++yy)
                    for (int xx = 0; xx < w; ++xx)
                        out.at4(i, c, yy, xx) = images.at4(i, c, yy, xx);
            for (int c = 0; c < cfg_.num_classes; ++c) {
                const double v = y.at2(i, c);
                for (int yy = 0; yy < h; ++yy)
                    for (int xx = 0; xx < w; ++xx) out.at4(i, 3 + c, yy, xx) = v;
            }
        }
        return out;
    }

    Tensor slice_image_channels(const Tensor& d) const {
        if (cfg_.num_classes == 0) return d;
        const int n = d.dim(0), h = d.dim(2), w = d.dim(3);
        Tensor out({n, 3, h, w});
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < 3; ++c)
                for (int yy = 0; yy < h; ++yy)
                    for (int xx = 0; xx < w; ++xx) out.at4(i, c, yy, xx) = d.at4(i, c, yy, xx);
        return out;
    }

    GeneratorConfig cfg_;
    std::vector<Conv2D> from_rgb_;
    std::vector<LeakyReLU> from_rgb_act_;
    std::vector<detail::DiscBlock> blocks_;
    LeakyReLU low_act_;
    Conv2D final_conv_;
    LeakyReLU final_act0_, final_act1_;
    Dense final_dense_;
    Dense score_;
    std::vector<int> flat_shape_;

    // forward cache
    int phase_ = 0;
    double alpha_ = 1.0;
    bool blended_ = false;
};

} // namespace logogan
