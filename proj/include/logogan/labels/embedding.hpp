#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "logogan/core/image.hpp"
#include "logogan/core/rng.hpp"
#include "logogan/labels/kmeans.hpp"

namespace logogan {

class WordEmbedder {
public:
    virtual ~WordEmbedder() = default;
    virtual std::optional<std::vector<double>> lookup(const std::string& word) = 0;
    virtual int dim() const = 0;
};

// Plain-text table, one entry per line: word<TAB>v1 v2 ...
class TableWordEmbedder : public WordEmbedder {
public:
    explicit TableWordEmbedder(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open embedding table: " + path.string());
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw std::runtime_error("malformed embedding line: " + line);
            std::vector<double> vec;
            std::istringstream values(line.substr(tab + 1));
            double v;
            while (values >> v) vec.push_back(v);
            if (dim_ < 0) dim_ = static_cast<int>(vec.size());
            if (static_cast<int>(vec.size()) != dim_)
                throw std::runtime_error("inconsistent embedding dimension at: " + line);
            table_[line.substr(0, tab)] = std::move(vec);
        }
        if (table_.empty()) throw std::runtime_error("empty embedding table: " + path.string());
    }

    explicit TableWordEmbedder(std::map<std::string, std::vector<double>> table)
        : table_(std::move(table)) {
        if (table_.empty()) throw std::invalid_argument("empty embedding table");
        dim_ = static_cast<int>(table_.begin()->second.size());
    }

    std::optional<std::vector<double>> lookup(const std::string& word) override {
        auto it = table_.find(word);
        if (it == table_.end()) return std::nullopt;
        return it->second;
    }

    int dim() const override { return dim_; }

private:
    std::map<std::string, std::vector<double>> table_;
    int dim_ = -1;
};

// Componentwise mean of the vectors of all resolvable words.
inline std::vector<double> word_label_midpoint(const std::vector<std::string>& words,
                                               WordEmbedder& embedder,
                                               const std::string& record_id = "") {
    if (words.empty()) throw std::invalid_argument("empty word list");
    std::vector<double> sum;
    int resolved = 0;
    for (const auto& w : words) {
        auto v = embedder.lookup(w);
        if (!v) continue;
        if (sum.empty()) sum.assign(v->size(), 0.0);
        if (v->size() != sum.size()) throw std::runtime_error("embedder dimension drift");
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*v)[i];
        ++resolved;
    }
    if (resolved == 0)
        throw std::runtime_error("no resolvable words" +
                                 (record_id.empty() ? "" : " for record " + record_id));
    for (double& s : sum) s /= resolved;
    return sum;
}

// {id: [words]} fixture, the stand-in for a live vision API.
inline std::map<std::string, std::vector<std::string>> load_word_labels(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open word-labels file: " + path.string());
    nlohmann::json j;
    in >> j;
    std::map<std::string, std::vector<std::string>> out;
    for (auto it = j.begin(); it != j.end(); ++it)
        out[it.key()] = it.value().get<std::vector<std::string>>();
    return out;
}

class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    virtual std::vector<double> extract(const ImageU8& pixels) = 0;
    virtual int dim() const { return 512; }
    virtual std::string id() const = 0;
};

// Hermetic stand-in for a pretrained CNN: box-downsample to 8x8 RGB and
// project the 192 values to 512 dims with a fixed seeded Gaussian matrix.
// Color dominates the projection input, which is what the tests rely on.
class ToyFeatureExtractor : public FeatureExtractor {
public:
    explicit ToyFeatureExtractor(std::uint64_t seed = 17) : seed_(seed) {
        Rng rng(mix_seed(seed, 0x746F79ull));
        projection_.resize(static_cast<std::size_t>(512) * kInputDim);
        const double scale = 1.0 / std::sqrt(static_cast<double>(kInputDim));
        for (auto& v : projection_) v = rng.normal() * scale;
    }

    std::vector<double> extract(const ImageU8& pixels) override {
        ImageU8 img = pixels;
        while (img.width > 8 && img.width % 2 == 0) img = box_downsample_half(img);
        if (img.width != 8) img = resize_image(img, 8);
        std::vector<double> input(kInputDim);
        for (int i = 0; i < kInputDim; ++i)
            input[i] = static_cast<double>(img.rgb[i]) / 255.0;
        std::vector<double> out(512, 0.0);
        for (int o = 0; o < 512; ++o) {
            double s = 0.0;
            const double* row = &projection_[static_cast<std::size_t>(o) * kInputDim];
            for (int i = 0; i < kInputDim; ++i) s += row[i] * input[i];
            out[o] = s;
        }
        return out;
    }

    std::string id() const override { return "toy-proj-" + std::to_string(seed_); }

private:
    static constexpr int kInputDim = 8 * 8 * 3;
    std::uint64_t seed_;
    std::vector<double> projection_;
};

inline EmbeddingPoint extract_cnn_features(const std::string& id, const ImageU8& pixels,
                                           FeatureExtractor& extractor) {
    EmbeddingPoint p;
    p.id = id;
    p.vector = extractor.extract(pixels); // extractor errors propagate: labels must be complete
    if (static_cast<int>(p.vector.size()) != extractor.dim())
        throw std::runtime_error("extractor returned wrong dimension for " + id);
    return p;
}

} // namespace logogan
