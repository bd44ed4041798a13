#pragma once

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "logogan/dataset/manifest.hpp"

namespace logogan {

// Shared architecture configuration for the generator/discriminator pair.
// num_classes == 0 selects the unconditional model.
struct GeneratorConfig {
    int latent_dim = 64;   // d
    int embed_dim = 0;     // e; 0 means "default to num_classes"
    int num_classes = 0;   // c
    int mapping_depth = 4;
    int max_resolution = 32;
    int base_channels = 64; // channels at 4x4, halved per doubling
    int min_channels = 16;
    bool noise_enabled = true;
    bool equalized_lr = true;
    bool pixel_norm = true;

    void validate() const {
        if (max_resolution < 8 || (max_resolution & (max_resolution - 1)) != 0)
            throw std::invalid_argument("max_resolution must be a power of two >= 8");
        if (mapping_depth < 1) throw std::invalid_argument("mapping_depth must be >= 1");
        if (latent_dim < 1) throw std::invalid_argument("latent_dim must be >= 1");
        if (num_classes < 0) throw std::invalid_argument("num_classes must be >= 0");
        if (base_channels < 1 || min_channels < 1)
            throw std::invalid_argument("channel counts must be >= 1");
    }

    int effective_embed_dim() const {
        if (num_classes == 0) return 0;
        return embed_dim > 0 ? embed_dim : num_classes;
    }

    int num_phases() const {
        int phases = 1;
        for (int r = 4; r < max_resolution; r *= 2) ++phases;
        return phases;
    }

    static int phase_resolution(int phase) { return 4 << phase; }

    int max_phase() const { return num_phases() - 1; }

    int channels_at(int res) const {
        int ch = base_channels;
        for (int r = 4; r < res; r *= 2) ch /= 2;
        return std::max(ch, min_channels);
    }
};

inline ordered_json generator_config_to_json(const GeneratorConfig& c) {
    ordered_json j;
    j["latent_dim"] = c.latent_dim;
    j["embed_dim"] = c.embed_dim;
    j["num_classes"] = c.num_classes;
    j["mapping_depth"] = c.mapping_depth;
    j["max_resolution"] = c.max_resolution;
    j["base_channels"] = c.base_channels;
    j["min_channels"] = c.min_channels;
    j["noise_enabled"] = c.noise_enabled;
    j["equalized_lr"] = c.equalized_lr;
    j["pixel_norm"] = c.pixel_norm;
    return j;
}

inline GeneratorConfig generator_config_from_json(const nlohmann::json& j) {
    GeneratorConfig c;
    static const std::set<std::string> known = {
        "latent_dim",     "embed_dim",    "num_classes",  "mapping_depth",
        "max_resolution", "base_channels", "min_channels", "noise_enabled",
        "equalized_lr",   "pixel_norm"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw std::runtime_error("unknown generator config key: " + it.key());
    c.latent_dim = j.value("latent_dim", c.latent_dim);
    c.embed_dim = j.value("embed_dim", c.embed_dim);
    c.num_classes = j.value("num_classes", c.num_classes);
    c.mapping_depth = j.value("mapping_depth", c.mapping_depth);
    c.max_resolution = j.value("max_resolution", c.max_resolution);
    c.base_channels = j.value("base_channels", c.base_channels);
    c.min_channels = j.value("min_channels", c.min_channels);
    c.noise_enabled = j.value("noise_enabled", c.noise_enabled);
    c.equalized_lr = j.value("equalized_lr", c.equalized_lr);
    c.pixel_norm = j.value("pixel_norm", c.pixel_norm);
    c.validate();
    return c;
}

} // namespace logogan
