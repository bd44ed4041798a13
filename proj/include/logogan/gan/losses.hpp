#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "logogan/core/rng.hpp"
#include "logogan/core/tensor.hpp"
#include "logogan/gan/discriminator.hpp"

namespace logogan {

// critic objective to minimize: mean(fake) - mean(real)
inline double wgan_d_loss(const std::vector<double>& real_scores,
                          const std::vector<double>& fake_scores) {
    if (real_scores.size() != fake_scores.size() || real_scores.empty())
        throw std::invalid_argument("score batch mismatch");
    double real = 0.0, fake = 0.0;
    for (double v : real_scores) real += v;
    for (double v : fake_scores) fake += v;
    return (fake - real) / static_cast<double>(real_scores.size());
}

// generator objective to minimize: -mean(fake)
inline double wgan_g_loss(const std::vector<double>& fake_scores) {
    if (fake_scores.empty()) throw std::invalid_argument("empty scores");
    double fake = 0.0;
    for (double v : fake_scores) fake += v;
    return -fake / static_cast<double>(fake_scores.size());
}

inline std::vector<double> scores_to_vector(const Tensor& scores) {
    return scores.data;
}

// Interpolates x̂ = eps*real + (1-eps)*fake per sample, eps ~ U(0,1).
inline Tensor interpolate_samples(const Tensor& real, const Tensor& fake, Rng& rng) {
    if (!real.same_shape(fake)) throw std::invalid_argument("batch shape mismatch");
    Tensor xhat(real.shape);
    const int n = real.dim(0);
    const std::size_t per = real.size() / n;
    for (int i = 0; i < n; ++i) {
        const double eps = rng.uniform();
        for (std::size_t k = 0; k < per; ++k) {
            const std::size_t idx = i * per + k;
            xhat.data[idx] = eps * real.data[idx] + (1.0 - eps) * fake.data[idx];
        }
    }
    return xhat;
}

// Per-sample L2 norm of the critic gradient w.r.t. the image inputs.
// Exact: one forward and one backward-to-input pass.
template <typename Critic>
std::vector<double> critic_input_gradient_norms(Critic& d, const Tensor& xhat,
                                                       const Tensor& y, int phase, double alpha,
                                                       Tensor* gradients_out = nullptr) {
    const int n = xhat.dim(0);
    d.forward(xhat, y, phase, alpha);
    Tensor dscores({n, 1});
    for (auto& v : dscores.data) v = 1.0;
    Tensor g = d.backward(dscores, /*accumulate=*/false);
    std::vector<double> norms(n, 0.0);
    const std::size_t per = g.size() / n;
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < per; ++k) s += g.data[i * per + k] * g.data[i * per + k];
        norms[i] = std::sqrt(s);
    }
    if (gradients_out) *gradients_out = g;
    return norms;
}

// lambda * mean((||grad||_2 - 1)^2) on interpolated samples. When
// accumulate_param_grads is set, the critic's parameter gradients for this
// term are added via a central-difference Hessian-vector product: the
// penalty gradient needs d/dtheta of <v, grad_x D>, which for a
// piecewise-linear critic equals the centered difference of grad_theta D at
// x̂ ± h·v. Costs two extra forward/backward passes.
template <typename Critic>
double gradient_penalty(Critic& d, const Tensor& real, const Tensor& fake,
                               const Tensor& y, double lambda, int phase, double alpha,
                               std::uint64_t seed, bool accumulate_param_grads = false) {
    if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    Rng rng(mix_seed(seed, 0x677031ull));
    const Tensor xhat = interpolate_samples(real, fake, rng);
    const int n = xhat.dim(0);

    Tensor grads;
    const std::vector<double> norms =
        critic_input_gradient_norms(d, xhat, y, phase, alpha, &grads);
    double penalty = 0.0;
    for (double nm : norms) penalty += (nm - 1.0) * (nm - 1.0);
    penalty = lambda * penalty / n;
    if (lambda == 0.0 || !accumulate_param_grads) return penalty;

    // v_i = (2*lambda/n) * (||g_i|| - 1)/||g_i|| * g_i ; unit directions with
    // per-sample magnitudes folded into the backward seeds
    const std::size_t per = grads.size() / n;
    Tensor unit(grads.shape);
    std::vector<double> v_mag(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double nm = std::max(norms[i], 1e-12);
        v_mag[i] = (2.0 * lambda / n) * std::abs(norms[i] - 1.0);
        const double dir = norms[i] >= 1.0 ? 1.0 : -1.0;
        for (std::size_t k = 0; k < per; ++k)
            unit.data[i * per + k] = dir * grads.data[i * per + k] / nm;
    }
    const double h = 1e-3;
    for (int sign : {+1, -1}) {
        Tensor shifted(xhat.shape);
        for (int i = 0; i < n; ++i)
            for (std::size_t k = 0; k < per; ++k)
                shifted.data[i * per + k] =
                    xhat.data[i * per + k] + sign * h * unit.data[i * per + k];
        d.forward(shifted, y, phase, alpha);
        Tensor dscores({n, 1});
        for (int i = 0; i < n; ++i) dscores.at2(i, 0) = sign * v_mag[i] / (2.0 * h);
        d.backward(dscores, /*accumulate=*/true);
    }
    return penalty;
}

} // namespace logogan
