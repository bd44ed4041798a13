#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "logogan/gan/config.hpp"
#include "logogan/gan/discriminator.hpp"
#include "logogan/gan/generator.hpp"
#include "logogan/nn/adam.hpp"

namespace logogan {

// Generator + discriminator sharing one architecture config.
struct ModelPair {
    GeneratorConfig cfg;
    Generator g;
    Discriminator d;

    void init(const GeneratorConfig& config, std::uint64_t seed) {
        cfg = config;
        g.init(config, mix_seed(seed, 0x47454Eull));
        d.init(config, mix_seed(seed, 0x44495343ull));
    }

    ParamList g_params() {
        ParamList out;
        g.collect_trainable(out);
        return out;
    }
    ParamList d_params() {
        ParamList out;
        d.collect_trainable(out);
        return out;
    }
};

// ---------------------------------------------------------------------------
// named-tensor binary archive (params.bin)

struct NamedTensor {
    std::string name;
    std::vector<int> shape;
    std::vector<double> data;
};

namespace detail {
constexpr std::uint32_t kArchiveMagic = 0x4C475042; // "LGPB"
constexpr std::uint32_t kArchiveVersion = 1;

template <typename T>
void write_pod(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("truncated tensor archive");
    return v;
}
} // namespace detail

inline void write_tensor_archive(const std::filesystem::path& path,
                                 const std::vector<NamedTensor>& tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    detail::write_pod(out, detail::kArchiveMagic);
    detail::write_pod(out, detail::kArchiveVersion);
    detail::write_pod(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        detail::write_pod(out, static_cast<std::uint32_t>(t.name.size()));
        out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        detail::write_pod(out, static_cast<std::uint32_t>(t.shape.size()));
        for (int d : t.shape) detail::write_pod(out, static_cast<std::int32_t>(d));
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    }
}

inline std::map<std::string, NamedTensor> read_tensor_archive(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    if (detail::read_pod<std::uint32_t>(in) != detail::kArchiveMagic)
        throw std::runtime_error("bad archive magic in " + path.string());
    if (detail::read_pod<std::uint32_t>(in) != detail::kArchiveVersion)
        throw std::runtime_error("unsupported archive version in " + path.string());
    const auto count = detail::read_pod<std::uint32_t>(in);
    std::map<std::string, NamedTensor> out;
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedTensor t;
        const auto name_len = detail::read_pod<std::uint32_t>(in);
        t.name.resize(name_len);
        in.read(t.name.data(), name_len);
        const auto ndims = detail::read_pod<std::uint32_t>(in);
        std::size_t total = 1;
        for (std::uint32_t d = 0; d < ndims; ++d) {
            t.shape.push_back(detail::read_pod<std::int32_t>(in));
            total *= static_cast<std::size_t>(t.shape.back());
        }
        t.data.resize(total);
        in.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(total * sizeof(double)));
        if (!in) throw std::runtime_error("truncated tensor archive");
        out[t.name] = std::move(t);
    }
    return out;
}

// ---------------------------------------------------------------------------
// checkpoints: params.bin + state.json

struct CheckpointState {
    long step = 0;
    int phase = 0;
    double alpha = 1.0;
    long images_seen = 0;
    std::uint64_t seed = 0;
};

inline void save_checkpoint(const std::filesystem::path& dir, ModelPair& model,
                            const CheckpointState& state,
                            const AdamOptimizer* opt_g = nullptr,
                            const AdamOptimizer* opt_d = nullptr,
                            long opt_g_steps = 0, long opt_d_steps = 0) {
    std::filesystem::create_directories(dir);
    std::vector<NamedTensor> tensors;
    auto push_params = [&tensors](const ParamList& params) {
        for (const Param* p : params) tensors.push_back({p->name, p->shape, p->value});
    };
    push_params(model.g_params());
    push_params(model.d_params());
    if (model.cfg.num_classes > 0)
        tensors.push_back({"g.class_embedding", model.g.embedding.r.shape,
                           model.g.embedding.r.data});
    auto push_moments = [&tensors](const AdamOptimizer* opt, const std::string& prefix) {
        if (!opt) return;
        for (const auto& [name, mom] : opt->state()) {
            tensors.push_back({prefix + ".m." + name, {static_cast<int>(mom.m.size())}, mom.m});
            tensors.push_back({prefix + ".v." + name, {static_cast<int>(mom.v.size())}, mom.v});
        }
    };
    push_moments(opt_g, "opt.g");
    push_moments(opt_d, "opt.d");
    write_tensor_archive(dir / "params.bin", tensors);

    ordered_json j;
    j["step"] = state.step;
    j["phase"] = state.phase;
    j["alpha"] = state.alpha;
    j["images_seen"] = state.images_seen;
    j["seed"] = state.seed;
    j["opt_g_steps"] = opt_g ? opt_g->steps() : opt_g_steps;
    j["opt_d_steps"] = opt_d ? opt_d->steps() : opt_d_steps;
    j["config"] = generator_config_to_json(model.cfg);
    std::ofstream out(dir / "state.json", std::ios::binary);
    out << j.dump(2) << "\n";
}

inline CheckpointState load_checkpoint(const std::filesystem::path& dir, ModelPair& model,
                                       AdamOptimizer* opt_g = nullptr,
                                       AdamOptimizer* opt_d = nullptr) {
    std::ifstream in(dir / "state.json", std::ios::binary);
    if (!in) throw std::runtime_error("no state.json under " + dir.string());
    nlohmann::json j;
    in >> j;
    const GeneratorConfig cfg = generator_config_from_json(j.at("config"));

    CheckpointState state;
    state.step = j.at("step").get<long>();
    state.phase = j.at("phase").get<int>();
    state.alpha = j.at("alpha").get<double>();
    state.images_seen = j.at("images_seen").get<long>();
    state.seed = j.at("seed").get<std::uint64_t>();

    model.init(cfg, state.seed);
    auto archive = read_tensor_archive(dir / "params.bin");
    auto restore_params = [&archive, &dir](const ParamList& params) {
        for (Param* p : params) {
            auto it = archive.find(p->name);
            if (it == archive.end())
                throw std::runtime_error("checkpoint missing parameter " + p->name + " in " +
                                         dir.string());
            if (it->second.data.size() != p->value.size())
                throw std::runtime_error("checkpoint shape mismatch for " + p->name);
            p->value = it->second.data;
        }
    };
    restore_params(model.g_params());
    restore_params(model.d_params());
    if (cfg.num_classes > 0) {
        auto it = archive.find("g.class_embedding");
        if (it == archive.end()) throw std::runtime_error("checkpoint missing class embedding");
        model.g.embedding.r.data = it->second.data;
    }
    auto restore_moments = [&archive, &j](AdamOptimizer* opt, const std::string& prefix,
                                          const char* steps_key, const ParamList& params) {
        if (!opt) return;
        std::map<std::string, AdamOptimizer::Moments> st;
        for (const Param* p : params) {
            auto mit = archive.find(prefix + ".m." + p->name);
            auto vit = archive.find(prefix + ".v." + p->name);
            if (mit == archive.end() || vit == archive.end()) continue; // fresh optimizer
            st[p->name] = {mit->second.data, vit->second.data};
        }
        opt->restore(std::move(st), j.value(steps_key, 0L));
    };
    restore_moments(opt_g, "opt.g", "opt_g_steps", model.g_params());
    restore_moments(opt_d, "opt.d", "opt_d_steps", model.d_params());
    return state;
}

} // namespace logogan
