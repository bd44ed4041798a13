#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "logogan/dataset/batch.hpp"
#include "logogan/eval/stats.hpp"
#include "logogan/gan/model.hpp"
#include "logogan/labels/embedding.hpp"

namespace logogan {

// Nearest-class-mean head over extractor features: class probabilities are a
// softmax over negative distances to the per-class feature centroids fit on
// the labeled dataset.
class ClassMeanClassifier {
public:
    void fit(const DatasetManifest& manifest, const ConditionedDataset& labels,
             FeatureExtractor& extractor, int resolution) {
        if (labels.k < 1) throw std::invalid_argument("classifier needs labeled classes");
        means_.assign(labels.k, std::vector<double>(extractor.dim(), 0.0));
        std::vector<int> counts(labels.k, 0);
        for (const auto* rec : manifest.kept_records()) {
            const ImageU8 img = load_image_rgb(manifest.image_path(rec->id, resolution));
            const std::vector<double> f = extractor.extract(img);
            const int cls = labels.label_of(rec->id);
            for (std::size_t j = 0; j < f.size(); ++j) means_[cls][j] += f[j];
            ++counts[cls];
        }
        for (int c = 0; c < labels.k; ++c) {
            if (counts[c] == 0) throw std::runtime_error("class with no examples: " +
                                                         std::to_string(c));
            for (auto& v : means_[c]) v /= counts[c];
        }
    }

    int num_classes() const { return static_cast<int>(means_.size()); }

    std::vector<double> predict_probs(const std::vector<double>& features) const {
        std::vector<double> logits(means_.size());
        for (std::size_t c = 0; c < means_.size(); ++c) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < features.size(); ++j) {
                const double diff = features[j] - means_[c][j];
                d2 += diff * diff;
            }
            logits[c] = -std::sqrt(d2) / temperature;
        }
        const double top = *std::max_element(logits.begin(), logits.end());
        double total = 0.0;
        std::vector<double> probs(logits.size());
        for (std::size_t c = 0; c < logits.size(); ++c) {
            probs[c] = std::exp(logits[c] - top);
            total += probs[c];
        }
        for (auto& p : probs) p /= total;
        return probs;
    }

    double temperature = 1.0;

private:
    std::vector<std::vector<double>> means_;
};

// Anything that can produce conditioned image batches for scoring.
class SampleSource {
public:
    virtual ~SampleSource() = default;
    virtual Tensor sample(const Tensor& y, std::uint64_t seed) = 0; // n x 3 x res x res
    virtual int resolution() const = 0;
    virtual std::string id() const = 0;
};

class GeneratorSampleSource : public SampleSource {
public:
    GeneratorSampleSource(Generator& g, int phase, double alpha,
                          std::optional<double> psi = std::nullopt, std::string label = "generator")
        : g_(g), phase_(phase), alpha_(alpha), psi_(psi), label_(std::move(label)) {}

    Tensor sample(const Tensor& y, std::uint64_t seed) override {
        Tensor z = sample_latent_z(y.dim(0), g_.config().latent_dim, mix_seed(seed, 0x65767Aull));
        return g_.forward(z, y, mix_seed(seed, 0x65766Eull), phase_, alpha_, psi_);
    }
    int resolution() const override { return GeneratorConfig::phase_resolution(phase_); }
    std::string id() const override { return label_; }

private:
    Generator& g_;
    int phase_;
    double alpha_;
    std::optional<double> psi_;
    std::string label_;
};

// Replays real dataset images in manifest order per class; with enough
// samples requested this reproduces the dataset itself, which pins the
// frechet metric's zero point in tests.
class DatasetSampleSource : public SampleSource {
public:
    DatasetSampleSource(const DatasetManifest& manifest, const ConditionedDataset& labels,
                        int resolution)
        : manifest_(manifest), labels_(labels), resolution_(resolution) {
        for (const auto* rec : manifest.kept_records())
            by_class_[labels_.k > 0 ? labels_.label_of(rec->id) : 0].push_back(rec->id);
    }

    Tensor sample(const Tensor& y, std::uint64_t) override {
        const int n = y.dim(0);
        Tensor out({n, 3, resolution_, resolution_});
        for (int i = 0; i < n; ++i) {
            int cls = 0;
            for (int j = 0; j < y.dim(1); ++j)
                if (y.at2(i, j) == 1.0) cls = j;
            auto& ids = by_class_.at(cls);
            const std::string& id = ids[cursor_[cls]++ % ids.size()];
            image_to_tensor_slice(load_image_rgb(manifest_.image_path(id, resolution_)), out, i);
        }
        return out;
    }
    int resolution() const override { return resolution_; }
    std::string id() const override { return "dataset"; }

private:
    const DatasetManifest& manifest_;
    const ConditionedDataset& labels_;
    int resolution_;
    std::map<int, std::vector<std::string>> by_class_;
    std::map<int, std::size_t> cursor_;
};

// n class draws apportioned to the weights by largest remainder; ties break
// toward the lower class index. Output is sorted by class.
inline std::vector<int> proportional_classes(int n, const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("negative class weight");
        total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("empty class distribution");
    const int k = static_cast<int>(weights.size());
    std::vector<int> counts(k, 0);
    std::vector<std::pair<double, int>> remainders;
    int assigned = 0;
    for (int c = 0; c < k; ++c) {
        const double exact = n * weights[c] / total;
        counts[c] = static_cast<int>(std::floor(exact));
        assigned += counts[c];
        remainders.push_back({-(exact - counts[c]), c});
    }
    std::sort(remainders.begin(), remainders.end());
    for (int i = 0; i < n - assigned; ++i) ++counts[remainders[i].second];
    std::vector<int> out;
    for (int c = 0; c < k; ++c) out.insert(out.end(), counts[c], c);
    return out;
}

struct EvalReport {
    double fid = 0.0;
    double is = 0.0;
    std::vector<double> per_class_diversity;
    int n_samples = 0;
    std::uint64_t seed = 0;
    std::string featurizer;
    std::string source;
};

inline ordered_json eval_report_to_json(const EvalReport& r) {
    ordered_json j;
    j["fid"] = r.fid;
    j["is"] = r.is;
    j["per_class_diversity"] = r.per_class_diversity;
    j["n_samples"] = r.n_samples;
    j["seed"] = r.seed;
    j["featurizer"] = r.featurizer;
    j["source"] = r.source;
    return j;
}

// Scores a sample source against the labeled dataset: frechet distance and
// inception-style score in extractor feature space, plus mean pairwise
// feature distance per class as a diversity measure.
inline EvalReport evaluate_model(SampleSource& source, const DatasetManifest& manifest,
                                 const ConditionedDataset& labels, FeatureExtractor& extractor,
                                 int n_samples, std::uint64_t seed) {
    if (n_samples < 2) throw std::invalid_argument("n_samples must be >= 2");
    const int res = source.resolution();
    const int k = std::max(labels.k, 1);

    // real-side statistics over every kept record
    std::vector<std::vector<double>> real_feats;
    for (const auto* rec : manifest.kept_records())
        real_feats.push_back(extractor.extract(load_image_rgb(manifest.image_path(rec->id, res))));
    if (static_cast<std::size_t>(n_samples) > real_feats.size())
        std::cerr << "[eval] warning: " << n_samples << " samples drawn against only "
                  << real_feats.size() << " real images (sampling with replacement)\n";

    // generated samples follow the empirical class distribution via a
    // deterministic largest-remainder allocation
    std::vector<double> weights(k, 0.0);
    if (labels.k > 0)
        for (const auto* rec : manifest.kept_records()) weights[labels.label_of(rec->id)] += 1.0;
    else
        weights[0] = 1.0;
    std::vector<int> classes = proportional_classes(n_samples, weights);
    Tensor y = labels.k > 0 ? one_hot_rows(classes, labels.k) : Tensor({n_samples, 0});

    ClassMeanClassifier classifier;
    if (labels.k > 0) classifier.fit(manifest, labels, extractor, res);

    std::vector<std::vector<double>> fake_feats;
    std::vector<std::vector<double>> probs;
    const int chunk = 32;
    for (int done = 0; done < n_samples; done += chunk) {
        const int n = std::min(chunk, n_samples - done);
        Tensor yc({n, y.dim(1)});
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < y.dim(1); ++j) yc.at2(i, j) = y.at2(done + i, j);
        Tensor imgs = source.sample(yc, mix_seed(seed, 0x657362ull, done));
        for (int i = 0; i < n; ++i) {
            fake_feats.push_back(extractor.extract(tensor_slice_to_image(imgs, i)));
            if (labels.k > 0) probs.push_back(classifier.predict_probs(fake_feats.back()));
        }
    }

    EvalReport report;
    report.fid = frechet_distance(FeatureStats::from_rows(real_feats),
                                  FeatureStats::from_rows(fake_feats));
    report.is = labels.k > 0 ? inception_score(probs) : 1.0;
    report.per_class_diversity.assign(k, 0.0);
    for (int c = 0; c < k; ++c) {
        std::vector<const std::vector<double>*> members;
        for (int i = 0; i < n_samples; ++i)
            if (labels.k == 0 || classes[i] == c) members.push_back(&fake_feats[i]);
        double total = 0.0;
        long pairs = 0;
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b) {
                double d2 = 0.0;
                for (std::size_t j = 0; j < members[a]->size(); ++j) {
                    const double diff = (*members[a])[j] - (*members[b])[j];
                    d2 += diff * diff;
                }
                total += std::sqrt(d2);
                ++pairs;
            }
        report.per_class_diversity[c] = pairs > 0 ? total / pairs : 0.0;
    }
    report.n_samples = n_samples;
    report.seed = seed;
    report.featurizer = extractor.id();
    report.source = source.id();
    return report;
}

inline void write_eval_report(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << eval_report_to_json(report).dump(2) << "\n";
}

// Renders one class-by-sample grid per truncation strength.
inline void truncation_sweep(Generator& g, const std::vector<double>& psis, int cols,
                             std::uint64_t seed, const std::filesystem::path& out_dir) {
    if (psis.empty()) throw std::invalid_argument("no psi values");
    std::filesystem::create_directories(out_dir);
    const int c = std::max(g.config().num_classes, 1);
    const int phase = g.config().max_phase();
    for (double psi : psis) {
        std::vector<ImageU8> tiles;
        for (int cls = 0; cls < c; ++cls) {
            Tensor z = sample_latent_z(cols, g.config().latent_dim, mix_seed(seed, 0x7377ull, cls));
            Tensor y = g.config().num_classes > 0
                           ? one_hot_rows(std::vector<int>(cols, cls), g.config().num_classes)
                           : Tensor({cols, 0});
            Tensor imgs = g.forward(z, y, mix_seed(seed, 0x7378ull, cls), phase, 1.0, psi);
            for (int i = 0; i < cols; ++i) tiles.push_back(tensor_slice_to_image(imgs, i));
        }
        char name[64];
        std::snprintf(name, sizeof(name), "sweep_psi%.2f.png", psi);
        save_image_png(make_grid(tiles, c, cols), out_dir / name);
    }
}

} // namespace logogan
