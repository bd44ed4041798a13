#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "logogan/gan/config.hpp"
#include "logogan/gan/latent.hpp"
#include "logogan/nn/layers.hpp"

namespace logogan {

namespace detail {

// One synthesis resolution: (upsample, conv) then two styled conv stages.
struct GenBlock {
    int res = 4;
    int in_ch = 0, out_ch = 0;
    bool has_conv0 = false; // false only for the 4x4 block
    Conv2D conv0, conv1;
    NoiseInject noise0, noise1;
    LeakyReLU act0, act1;
    StyleAdaIN adain0, adain1;
    bool noise_enabled = true;

    void init(const GeneratorConfig& cfg, int res_, int in_ch_, int out_ch_, std::uint64_t seed) {
        res = res_;
        in_ch = in_ch_;
        out_ch = out_ch_;
        has_conv0 = res > 4;
        noise_enabled = cfg.noise_enabled;
        const std::string base = "g.block" + std::to_string(res);
        if (has_conv0) conv0.init(base + ".conv0", in_ch, out_ch, 3, seed, cfg.equalized_lr);
        conv1.init(base + ".conv1", out_ch, out_ch, 3, seed, cfg.equalized_lr);
        noise0.init(base + ".n0", out_ch);
        noise1.init(base + ".n1", out_ch);
        adain0.init(base + ".a0", cfg.latent_dim, out_ch, seed, cfg.equalized_lr);
        adain1.init(base + ".a1", cfg.latent_dim, out_ch, seed, cfg.equalized_lr);
    }

    Tensor forward(const Tensor& x, const Tensor& w, const Tensor& n0, const Tensor& n1) {
        Tensor t = has_conv0 ? conv0.forward(upsample2x(x)) : x;
        if (noise_enabled) t = noise0.forward(t, n0);
        t = adain0.forward(act0.forward(t), w);
        t = conv1.forward(t);
        if (noise_enabled) t = noise1.forward(t, n1);
        return adain1.forward(act1.forward(t), w);
    }

    Tensor backward(const Tensor& dout, Tensor& dw, bool accumulate) {
        Tensor d = adain1.backward(dout, dw, accumulate);
        d = act1.backward(d);
        if (noise_enabled) d = noise1.backward(d, accumulate);
        d = conv1.backward(d, accumulate);
        d = adain0.backward(d, dw, accumulate);
        d = act0.backward(d);
        if (noise_enabled) d = noise0.backward(d, accumulate);
        if (!has_conv0) return d; // gradient w.r.t. the broadcast constant input
        return upsample2x_backward(conv0.backward(d, accumulate));
    }

    void collect(ParamList& out) {
        if (has_conv0) conv0.collect(out);
        conv1.collect(out);
        noise0.collect(out);
        noise1.collect(out);
        adain0.collect(out);
        adain1.collect(out);
    }
};

} // namespace detail

// Conditional style-based progressive generator: learned constant input,
// per-resolution synthesis blocks with noise + AdaIN, toRGB heads with tanh,
// alpha-blended growth.
class Generator {
public:
    void init(const GeneratorConfig& cfg, std::uint64_t seed) {
        cfg.validate();
        cfg_ = cfg;
        seed_ = seed;
        if (cfg.num_classes > 0)
            embedding.init(cfg.num_classes, cfg.effective_embed_dim(), mix_seed(seed, 0x454D42ull));
        mapping.init(cfg, seed);
        const int c4 = cfg.channels_at(4);
        const_input.init("g.const", {c4, 4, 4});
        const_input.fill(1.0);
        blocks_.resize(cfg.num_phases());
        to_rgb_.resize(cfg.num_phases());
        rgb_tanh_.resize(cfg.num_phases());
        low_tanh_.resize(cfg.num_phases());
        for (int p = 0; p < cfg.num_phases(); ++p) {
            const int res = GeneratorConfig::phase_resolution(p);
            const int in_ch = cfg.channels_at(p == 0 ? 4 : res / 2);
            const int out_ch = cfg.channels_at(res);
            blocks_[p].init(cfg, res, in_ch, out_ch, seed);
            to_rgb_[p].init("g.torgb" + std::to_string(res), out_ch, 3, 1, seed,
                            cfg.equalized_lr, 1.0);
        }
    }

    const GeneratorConfig& config() const { return cfg_; }

    // W from (Z, Y) through the frozen class embedding and the mapping network
    Tensor map_latent(const Tensor& z, const Tensor& y) {
        return build_conditional_latent(z, y, embedding, mapping);
    }

    // Synthesis pass from mapped latents. Deterministic in
    // (parameters, w, noise_seed, phase, alpha).
    Tensor synthesize(const Tensor& w, int phase, double alpha, std::uint64_t noise_seed) {
        if (phase < 0 || phase > cfg_.max_phase())
            throw std::invalid_argument("phase beyond configured resolutions");
        if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha outside [0,1]");
        const int n = w.dim(0);
        phase_ = phase;
        alpha_ = alpha;
        w_ = w;
        feats_.assign(phase + 1, Tensor());

        // broadcast learned constant
        const int c4 = cfg_.channels_at(4);
        Tensor x({n, c4, 4, 4});
        for (int i = 0; i < n; ++i)
            for (std::size_t k = 0; k < const_input.size(); ++k)
                x.data[static_cast<std::size_t>(i) * const_input.size() + k] = const_input.value[k];

        for (int p = 0; p <= phase; ++p) {
            const int res = GeneratorConfig::phase_resolution(p);
            Tensor n0({n, 1, res, res}), n1({n, 1, res, res});
            Rng r0(mix_seed(noise_seed, 0x4E5A30ull + p, 0));
            Rng r1(mix_seed(noise_seed, 0x4E5A30ull + p, 1));
            for (auto& v : n0.data) v = r0.normal();
            for (auto& v : n1.data) v = r1.normal();
            x = blocks_[p].forward(x, w, n0, n1);
            feats_[p] = x;
        }

        Tensor img = rgb_tanh_[phase].forward(to_rgb_[phase].forward(feats_[phase]));
        blended_ = phase > 0 && alpha < 1.0;
        if (blended_) {
            Tensor low =
                upsample2x(low_tanh_[phase - 1].forward(to_rgb_[phase - 1].forward(feats_[phase - 1])));
            img = progressive_blend(low, img, alpha);
        }
        return img;
    }

    // Backward from an image gradient to dW; parameter grads accumulate.
    Tensor backward(const Tensor& dimg, bool accumulate = true) {
        const int n = dimg.dim(0);
        Tensor dw({n, cfg_.latent_dim});
        std::vector<Tensor> dfeats(phase_ + 1);

        Tensor dhigh = dimg;
        if (blended_) {
            Tensor dlow(dimg.shape);
            for (std::size_t i = 0; i < dimg.size(); ++i) {
                dlow.data[i] = (1.0 - alpha_) * dimg.data[i];
                dhigh.data[i] = alpha_ * dimg.data[i];
            }
            Tensor d = low_tanh_[phase_ - 1].backward(upsample2x_backward(dlow));
            dfeats[phase_ - 1] = to_rgb_[phase_ - 1].backward(d, accumulate);
        }
        dfeats[phase_] = to_rgb_[phase_].backward(rgb_tanh_[phase_].backward(dhigh), accumulate);

        Tensor d = dfeats[phase_];
        for (int p = phase_; p >= 0; --p) {
            Tensor din = blocks_[p].backward(d, dw, accumulate);
            if (p == 0) {
                if (accumulate) {
                    // fold the batch gradient into the constant input
                    for (int i = 0; i < n; ++i)
                        for (std::size_t k = 0; k < const_input.size(); ++k)
                            const_input.grad[k] +=
                                din.data[static_cast<std::size_t>(i) * const_input.size() + k];
                }
                break;
            }
            d = din;
            if (p - 1 == phase_ - 1 && blended_ && dfeats[p - 1].size() > 0)
                for (std::size_t i = 0; i < d.size(); ++i) d.data[i] += dfeats[p - 1].data[i];
        }
        return dw;
    }

    // dW through the mapping network into its parameters
    void backward_mapping(const Tensor& dw, bool accumulate = true) {
        mapping.backward(dw, accumulate);
    }

    // Monte-Carlo center of mass of W, classes drawn uniformly.
    Tensor latent_center_of_mass(int num_samples, std::uint64_t seed,
                                 std::optional<int> fixed_class = std::nullopt) {
        if (num_samples < 1) throw std::invalid_argument("num_samples must be >= 1");
        Tensor wbar({1, cfg_.latent_dim});
        const int chunk = 256;
        int done = 0, chunk_index = 0;
        while (done < num_samples) {
            const int n = std::min(chunk, num_samples - done);
            Tensor z = sample_latent_z(n, cfg_.latent_dim, mix_seed(seed, 0x434F4Dull, chunk_index));
            Tensor y({n, 0});
            if (cfg_.num_classes > 0) {
                std::vector<int> cls;
                if (fixed_class) {
                    cls.assign(n, *fixed_class);
                } else {
                    cls = sample_classes(n, std::vector<double>(cfg_.num_classes, 1.0),
                                         mix_seed(seed, 0x434F4Dull + 1, chunk_index));
                }
                y = one_hot_rows(cls, cfg_.num_classes);
            }
            Tensor w = map_latent(z, y);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < cfg_.latent_dim; ++j) wbar.at2(0, j) += w.at2(i, j);
            done += n;
            ++chunk_index;
        }
        for (auto& v : wbar.data) v /= num_samples;
        return wbar;
    }

    // Full forward: mapping, optional truncation, synthesis.
    Tensor forward(const Tensor& z, const Tensor& y, std::uint64_t noise_seed, int phase,
                   double alpha, std::optional<double> psi = std::nullopt) {
        Tensor w = map_latent(z, y);
        if (psi && *psi != 1.0) { // psi = 1 is the identity; keep it bit-exact
            const Tensor wbar = latent_center_of_mass(kTruncationSamples, kTruncationSeed);
            for (int i = 0; i < w.dim(0); ++i)
                for (int j = 0; j < w.dim(1); ++j)
                    w.at2(i, j) = wbar.at2(0, j) + *psi * (w.at2(i, j) - wbar.at2(0, j));
        }
        return synthesize(w, phase, alpha, noise_seed);
    }

    void collect_trainable(ParamList& out) {
        mapping.collect(out);
        out.push_back(&const_input);
        for (auto& b : blocks_) b.collect(out);
        for (auto& t : to_rgb_) t.collect(out);
    }

    static constexpr int kTruncationSamples = 4096;
    static constexpr std::uint64_t kTruncationSeed = 0xC0FFEE;

    ClassEmbedding embedding;
    MappingNetwork mapping;
    Param const_input;

private:
    GeneratorConfig cfg_;
    std::uint64_t seed_ = 0;
    std::vector<detail::GenBlock> blocks_;
    std::vector<Conv2D> to_rgb_;
    std::vector<Tanh> rgb_tanh_, low_tanh_;

    // forward cache
    int phase_ = 0;
    double alpha_ = 1.0;
    bool blended_ = false;
    Tensor w_;
    std::vector<Tensor> feats_;
};

} // namespace logogan
