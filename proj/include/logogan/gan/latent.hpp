#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "logogan/core/rng.hpp"
#include "logogan/core/tensor.hpp"
#include "logogan/gan/config.hpp"
#include "logogan/nn/layers.hpp"

namespace logogan {

// Initial latent Z, one-hot conditions Y, mapped latent W.
struct LatentBatch {
    Tensor z; // n x d, standard normal
    Tensor y; // n x c one-hot (c = 0 unconditional)
    Tensor w; // n x d
};

// Frozen class-embedding matrix, c x e, sampled once at model init.
struct ClassEmbedding {
    Tensor r; // c x e
    std::uint64_t seed = 0;

    void init(int num_classes, int embed_dim, std::uint64_t s) {
        seed = s;
        r = Tensor({num_classes, embed_dim});
        for (std::uint64_t attempt = 0;; ++attempt) {
            Rng rng(mix_seed(s, 0x52656D62ull, attempt));
            for (auto& v : r.data) v = rng.normal();
            if (rows_distinct()) break; // regenerate on collision
        }
    }

    bool rows_distinct() const {
        const int c = r.dim(0), e = r.dim(1);
        for (int i = 0; i < c; ++i)
            for (int j = i + 1; j < c; ++j) {
                bool equal = true;
                for (int k = 0; k < e && equal; ++k)
                    equal = r.at2(i, k) == r.at2(j, k);
                if (equal) return false;
            }
        return true;
    }
};

inline void check_one_hot(const Tensor& y) {
    const int n = y.dim(0), c = y.dim(1);
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < c; ++j) {
            const double v = y.at2(i, j);
            if (v != 0.0 && v != 1.0) throw std::invalid_argument("Y entries must be 0 or 1");
            sum += v;
        }
        if (sum != 1.0) throw std::invalid_argument("Y rows must sum to 1");
    }
}

inline Tensor sample_latent_z(int n, int d, std::uint64_t seed) {
    Tensor z({n, d});
    Rng rng(mix_seed(seed, 0x5A6C6174ull));
    for (auto& v : z.data) v = rng.normal();
    return z;
}

inline Tensor one_hot_rows(const std::vector<int>& classes, int c) {
    Tensor y({static_cast<int>(classes.size()), c});
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i] < 0 || classes[i] >= c) throw std::invalid_argument("class out of range");
        y.at2(static_cast<int>(i), classes[i]) = 1.0;
    }
    return y;
}

// Draw classes from an explicit distribution (weights need not be normalized).
inline std::vector<int> sample_classes(int n, const std::vector<double>& weights,
                                       std::uint64_t seed) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) throw std::invalid_argument("empty class distribution");
    std::vector<int> out;
    Rng rng(mix_seed(seed, 0x636C6173ull));
    for (int i = 0; i < n; ++i) {
        double r = rng.uniform() * total;
        int k = 0;
        for (; k + 1 < static_cast<int>(weights.size()); ++k) {
            r -= weights[k];
            if (r <= 0.0) break;
        }
        out.push_back(k);
    }
    return out;
}

// Feed-forward mapping network f. Input is [Y*R ⌢ Z] (or plain Z when
// unconditional), optionally pixel-normalized; output width latent_dim.
class MappingNetwork {
public:
    void init(const GeneratorConfig& cfg, std::uint64_t seed) {
        d_ = cfg.latent_dim;
        in_dim_ = cfg.latent_dim + cfg.effective_embed_dim();
        use_pixel_norm_ = cfg.pixel_norm;
        layers_.resize(cfg.mapping_depth);
        acts_.resize(cfg.mapping_depth);
        for (int i = 0; i < cfg.mapping_depth; ++i) {
            const int in = i == 0 ? in_dim_ : d_;
            layers_[i].init("g.mapping." + std::to_string(i), in, d_, seed, cfg.equalized_lr);
        }
    }

    int input_dim() const { return in_dim_; }
    int output_dim() const { return d_; }

    Tensor forward(const Tensor& in) {
        if (in.dim(1) != in_dim_) throw std::invalid_argument("mapping input width mismatch");
        Tensor h = use_pixel_norm_ ? norm_.forward(in) : in;
        for (std::size_t i = 0; i < layers_.size(); ++i)
            h = acts_[i].forward(layers_[i].forward(h));
        return h;
    }

    Tensor backward(const Tensor& dw, bool accumulate = true) {
        Tensor d = dw;
        for (int i = static_cast<int>(layers_.size()) - 1; i >= 0; --i)
            d = layers_[i].backward(acts_[i].backward(d), accumulate);
        return use_pixel_norm_ ? norm_.backward(d) : d;
    }

    void collect(ParamList& out) {
        for (auto& l : layers_) l.collect(out);
    }

private:
    int d_ = 0, in_dim_ = 0;
    bool use_pixel_norm_ = true;
    PixelNorm norm_;
    std::vector<Dense> layers_;
    std::vector<LeakyReLU> acts_;
};

// W = f([Y*R ⌢ Z]); one-hot rows of Y select per-class embeddings.
// Mapper is anything with forward(Tensor)->Tensor (test stubs included).
template <typename Mapper>
Tensor build_conditional_latent(const Tensor& z, const Tensor& y, const ClassEmbedding& emb,
                                Mapper& mapping) {
    const int n = z.dim(0), d = z.dim(1);
    const int c = y.shape.size() == 2 ? y.dim(1) : 0;
    if (c == 0) return mapping.forward(z); // unconditional: W = f(Z)
    if (y.dim(0) != n) throw std::invalid_argument("Z/Y batch mismatch");
    if (emb.r.dim(0) != c) throw std::invalid_argument("class embedding row mismatch");
    check_one_hot(y);
    const int e = emb.r.dim(1);
    Tensor in({n, e + d});
    for (int i = 0; i < n; ++i) {
        // Y row is one-hot: Y*R picks one embedding row
        int cls = 0;
        for (int j = 0; j < c; ++j)
            if (y.at2(i, j) == 1.0) cls = j;
        for (int k = 0; k < e; ++k) in.at2(i, k) = emb.r.at2(cls, k);
        for (int k = 0; k < d; ++k) in.at2(i, e + k) = z.at2(i, k);
    }
    return mapping.forward(in);
}

} // namespace logogan
