#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "logogan/core/image.hpp"
#include "logogan/core/rng.hpp"
#include "logogan/core/tensor.hpp"
#include "logogan/dataset/manifest.hpp"
#include "logogan/labels/conditioned.hpp"

namespace logogan {

struct RealBatch {
    Tensor images; // n x 3 x res x res in [-1, 1]
    Tensor y;      // n x c one-hot (c = 0 when unconditional)
    std::vector<std::string> ids;
};

// Uniform sample (with replacement) of kept records at the given resolution.
// Pure in (manifest contents, labels, resolution, batch_size, seed).
inline RealBatch load_batch(const DatasetManifest& manifest, const ConditionedDataset& labels,
                            int resolution, int batch_size, std::uint64_t seed) {
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (std::find(manifest.resolutions.begin(), manifest.resolutions.end(), resolution) ==
        manifest.resolutions.end())
        throw std::invalid_argument("resolution not in manifest: " + std::to_string(resolution));
    const auto kept = manifest.kept_records();
    if (kept.empty()) throw std::runtime_error("no kept records to sample");

    RealBatch batch;
    batch.images = Tensor({batch_size, 3, resolution, resolution});
    batch.y = Tensor({batch_size, labels.k});
    Rng rng(mix_seed(seed, 0x62617463ull, static_cast<std::uint64_t>(resolution)));
    for (int n = 0; n < batch_size; ++n) {
        const auto* rec = kept[rng.below(kept.size())];
        const ImageU8 img = load_image_rgb(manifest.image_path(rec->id, resolution));
        if (img.width != resolution || img.height != resolution)
            throw std::runtime_error("stored image has wrong resolution: " + rec->id);
        image_to_tensor_slice(img, batch.images, n);
        if (labels.k > 0) batch.y.at2(n, labels.label_of(rec->id)) = 1.0f;
        batch.ids.push_back(rec->id);
    }
    return batch;
}

} // namespace logogan
