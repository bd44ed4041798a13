#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "logogan/dataset/batch.hpp"
#include "logogan/gan/losses.hpp"
#include "logogan/gan/model.hpp"
#include "logogan/train/schedule.hpp"

namespace logogan {

struct TrainConfig {
    GeneratorConfig model;
    int batch_size = 8;
    int critic_steps = 1;
    double gp_lambda = 10.0;
    double lr_g = 1e-3;
    double lr_d = 1e-3;
    double beta1 = 0.0;
    double beta2 = 0.99;
    long total_steps = 1000;
    long images_per_phase = 4000;
    long images_per_transition = 4000;
    long checkpoint_every = 500;
    long grid_every = 0; // 0 disables snapshot grids
    int grid_cols = 4;
    double grid_psi = 1.0; // 1.0 means no truncation
    std::uint64_t seed = 0;

    void validate() const {
        model.validate();
        if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
        if (critic_steps < 1) throw std::invalid_argument("critic_steps must be >= 1");
        if (gp_lambda < 0) throw std::invalid_argument("gp_lambda must be >= 0");
        if (total_steps < 1) throw std::invalid_argument("total_steps must be >= 1");
        if (images_per_phase < 1) throw std::invalid_argument("images_per_phase must be >= 1");
        if (images_per_transition < 0)
            throw std::invalid_argument("images_per_transition must be >= 0");
        if (checkpoint_every < 1) throw std::invalid_argument("checkpoint_every must be >= 1");
        if (grid_cols < 1) throw std::invalid_argument("grid_cols must be >= 1");
    }
};

inline ordered_json train_config_to_json(const TrainConfig& c) {
    ordered_json j;
    j["model"] = generator_config_to_json(c.model);
    j["batch_size"] = c.batch_size;
    j["critic_steps"] = c.critic_steps;
    j["gp_lambda"] = c.gp_lambda;
    j["lr_g"] = c.lr_g;
    j["lr_d"] = c.lr_d;
    j["beta1"] = c.beta1;
    j["beta2"] = c.beta2;
    j["total_steps"] = c.total_steps;
    j["images_per_phase"] = c.images_per_phase;
    j["images_per_transition"] = c.images_per_transition;
    j["checkpoint_every"] = c.checkpoint_every;
    j["grid_every"] = c.grid_every;
    j["grid_cols"] = c.grid_cols;
    j["grid_psi"] = c.grid_psi;
    j["seed"] = c.seed;
    return j;
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
    static const std::set<std::string> known = {
        "model",          "batch_size",       "critic_steps",
        "gp_lambda",      "lr_g",             "lr_d",
        "beta1",          "beta2",            "total_steps",
        "images_per_phase", "images_per_transition", "checkpoint_every",
        "grid_every",     "grid_cols",        "grid_psi",
        "seed"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw std::runtime_error("unknown train config key: " + it.key());
    TrainConfig c;
    if (j.contains("model")) c.model = generator_config_from_json(j.at("model"));
    c.batch_size = j.value("batch_size", c.batch_size);
    c.critic_steps = j.value("critic_steps", c.critic_steps);
    c.gp_lambda = j.value("gp_lambda", c.gp_lambda);
    c.lr_g = j.value("lr_g", c.lr_g);
    c.lr_d = j.value("lr_d", c.lr_d);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.total_steps = j.value("total_steps", c.total_steps);
    c.images_per_phase = j.value("images_per_phase", c.images_per_phase);
    c.images_per_transition = j.value("images_per_transition", c.images_per_transition);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    c.grid_every = j.value("grid_every", c.grid_every);
    c.grid_cols = j.value("grid_cols", c.grid_cols);
    c.grid_psi = j.value("grid_psi", c.grid_psi);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
}

inline TrainConfig load_train_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    nlohmann::json j;
    in >> j;
    return train_config_from_json(j);
}

struct StepMetrics {
    long step = 0;
    long images_seen = 0;
    int phase = 0;
    double alpha = 1.0;
    double d_loss = 0.0;
    double g_loss = 0.0;
    double gp = 0.0;
};

// WGAN-GP trainer with progressive growing. Every random draw is derived
// from (seed, stream, step), so resuming from a checkpoint replays the exact
// byte-identical trajectory of an uninterrupted run.
class Trainer {
public:
    Trainer(const std::filesystem::path& out_dir, const TrainConfig& cfg,
            DatasetManifest manifest, ConditionedDataset labels)
        : out_dir_(out_dir), cfg_(cfg), manifest_(std::move(manifest)),
          labels_(std::move(labels)) {
        cfg_.validate();
        if (cfg_.model.num_classes != labels_.k)
            throw std::invalid_argument("model num_classes does not match label count");
        if (cfg_.model.max_resolution > manifest_.max_resolution())
            throw std::invalid_argument("dataset pyramid does not reach model resolution");
        std::filesystem::create_directories(out_dir_);
        model_.init(cfg_.model, cfg_.seed);
        state_.seed = cfg_.seed;
        opt_g_ = AdamOptimizer({cfg_.lr_g, cfg_.beta1, cfg_.beta2, 1e-8});
        opt_d_ = AdamOptimizer({cfg_.lr_d, cfg_.beta1, cfg_.beta2, 1e-8});
        class_weights_ = empirical_class_weights();
    }

    ModelPair& model() { return model_; }
    long step() const { return state_.step; }
    long images_seen() const { return state_.images_seen; }

    void resume(const std::filesystem::path& ckpt_dir) {
        state_ = load_checkpoint(ckpt_dir, model_, &opt_g_, &opt_d_);
    }

    // Runs until total_steps, appending to metrics.csv and checkpointing on
    // the configured cadence. Aborts with a diagnostic checkpoint if any
    // loss goes non-finite.
    std::vector<StepMetrics> run() {
        std::vector<StepMetrics> out;
        std::ofstream metrics = open_metrics();
        while (state_.step < cfg_.total_steps) {
            const StepMetrics m = step_once();
            out.push_back(m);
            metrics << m.step << "," << m.images_seen << "," << m.phase << "," << m.alpha << ","
                    << m.d_loss << "," << m.g_loss << "," << m.gp << "\n";
            metrics.flush();
            if (!std::isfinite(m.d_loss) || !std::isfinite(m.g_loss) || !std::isfinite(m.gp)) {
                save_checkpoint(out_dir_ / "diverged", model_, state_, &opt_g_, &opt_d_);
                throw std::runtime_error(
                    "non-finite loss at step " + std::to_string(m.step) +
                    " (d_loss=" + std::to_string(m.d_loss) + ", g_loss=" +
                    std::to_string(m.g_loss) + ", gp=" + std::to_string(m.gp) +
                    "); diagnostic checkpoint written to " + (out_dir_ / "diverged").string());
            }
            if (state_.step % cfg_.checkpoint_every == 0 || state_.step == cfg_.total_steps)
                save_checkpoint(out_dir_ / "latest", model_, state_, &opt_g_, &opt_d_);
            if (cfg_.grid_every > 0 && state_.step % cfg_.grid_every == 0) write_grid();
        }
        return out;
    }

    StepMetrics step_once() {
        const long step = state_.step;
        const PhasePoint pp = schedule_phase(state_.images_seen, cfg_.images_per_phase,
                                             cfg_.images_per_transition,
                                             cfg_.model.max_phase());
        state_.phase = pp.phase;
        state_.alpha = pp.alpha;
        const int res = GeneratorConfig::phase_resolution(pp.phase);
        const int n = cfg_.batch_size;

        StepMetrics m;
        m.step = step + 1;
        m.phase = pp.phase;
        m.alpha = pp.alpha;

        for (int cs = 0; cs < cfg_.critic_steps; ++cs) {
            const std::uint64_t s = mix_seed(cfg_.seed, 0xD000ull + cs, step);
            RealBatch real = load_batch(manifest_, labels_, res, n, mix_seed(s, 1));
            blend_reals(real.images, pp.alpha);
            Tensor fake = sample_fake(n, mix_seed(s, 2), pp, real.y);

            ParamList dp = model_.d_params();
            for (Param* p : dp) p->zero_grad();

            Tensor real_scores = model_.d.forward(real.images, real.y, pp.phase, pp.alpha);
            Tensor dneg({n, 1});
            for (auto& v : dneg.data) v = -1.0 / n;
            model_.d.backward(dneg, true);

            Tensor fake_scores = model_.d.forward(fake, real.y, pp.phase, pp.alpha);
            Tensor dpos({n, 1});
            for (auto& v : dpos.data) v = 1.0 / n;
            model_.d.backward(dpos, true);

            m.gp = gradient_penalty(model_.d, real.images, fake, real.y, cfg_.gp_lambda,
                                    pp.phase, pp.alpha, mix_seed(s, 3), true);
            m.d_loss = wgan_d_loss(real_scores.data, fake_scores.data);
            opt_d_.step(dp);
        }

        // generator update on fresh draws
        {
            const std::uint64_t s = mix_seed(cfg_.seed, 0xE000ull, step);
            Tensor y = sample_y(n, mix_seed(s, 1));
            Tensor z = sample_latent_z(n, cfg_.model.latent_dim, mix_seed(s, 2));
            Tensor fake = model_.g.forward(z, y, mix_seed(s, 3), pp.phase, pp.alpha);
            Tensor scores = model_.d.forward(fake, y, pp.phase, pp.alpha);
            m.g_loss = wgan_g_loss(scores.data);

            Tensor dscores({n, 1});
            for (auto& v : dscores.data) v = -1.0 / n;
            Tensor dimg = model_.d.backward(dscores, /*accumulate=*/false);
            ParamList gp = model_.g_params();
            for (Param* p : gp) p->zero_grad();
            Tensor dw = model_.g.backward(dimg, true);
            model_.g.backward_mapping(dw, true);
            opt_g_.step(gp);
        }

        state_.step = step + 1;
        state_.images_seen += static_cast<long>(n) * cfg_.critic_steps;
        m.images_seen = state_.images_seen;
        return m;
    }

    // class rows x grid_cols sample grid at the current phase
    void write_grid() {
        const int c = std::max(cfg_.model.num_classes, 1);
        const int cols = cfg_.grid_cols;
        std::vector<ImageU8> tiles;
        const std::optional<double> psi =
            cfg_.grid_psi == 1.0 ? std::nullopt : std::optional<double>(cfg_.grid_psi);
        for (int cls = 0; cls < c; ++cls) {
            Tensor z = sample_latent_z(cols, cfg_.model.latent_dim,
                                       mix_seed(cfg_.seed, 0xF000ull, cls));
            Tensor y({cols, cfg_.model.num_classes});
            if (cfg_.model.num_classes > 0)
                y = one_hot_rows(std::vector<int>(cols, cls), cfg_.model.num_classes);
            Tensor imgs = model_.g.forward(z, y, mix_seed(cfg_.seed, 0xF100ull, cls),
                                           state_.phase, state_.alpha, psi);
            for (int i = 0; i < cols; ++i) tiles.push_back(tensor_slice_to_image(imgs, i));
        }
        std::filesystem::create_directories(out_dir_ / "grids");
        save_image_png(make_grid(tiles, c, cols),
                       out_dir_ / "grids" / ("step_" + std::to_string(state_.step) + ".png"));
    }

private:
    std::ofstream open_metrics() {
        const auto path = out_dir_ / "metrics.csv";
        const bool fresh = !std::filesystem::exists(path) || state_.step == 0;
        std::ofstream out;
        if (fresh) {
            out.open(path, std::ios::binary);
            out << "step,images_seen,phase,alpha,d_loss,g_loss,gp\n";
        } else {
            out.open(path, std::ios::binary | std::ios::app);
        }
        return out;
    }

    // during a fade-in, real images are blended with their own upsampled
    // half-resolution copy so the critic sees the same mixture the
    // generator produces
    void blend_reals(Tensor& images, double alpha) const {
        if (alpha >= 1.0) return;
        Tensor low = upsample2x(avgpool2x(images));
        images = progressive_blend(low, images, alpha);
    }

    std::vector<double> empirical_class_weights() const {
        if (labels_.k == 0) return {};
        std::vector<double> w(labels_.k, 0.0);
        for (const auto* rec : manifest_.kept_records()) w[labels_.label_of(rec->id)] += 1.0;
        return w;
    }

    Tensor sample_y(int n, std::uint64_t seed) const {
        if (labels_.k == 0) return Tensor({n, 0});
        return one_hot_rows(sample_classes(n, class_weights_, seed), labels_.k);
    }

    Tensor sample_fake(int n, std::uint64_t seed, const PhasePoint& pp, const Tensor& y) {
        Tensor z = sample_latent_z(n, cfg_.model.latent_dim, mix_seed(seed, 11));
        return model_.g.forward(z, y, mix_seed(seed, 12), pp.phase, pp.alpha);
    }

    std::filesystem::path out_dir_;
    TrainConfig cfg_;
    DatasetManifest manifest_;
    ConditionedDataset labels_;
    ModelPair model_;
    AdamOptimizer opt_g_, opt_d_;
    CheckpointState state_;
    std::vector<double> class_weights_;
};

} // namespace logogan
