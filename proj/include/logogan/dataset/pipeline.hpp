#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "logogan/core/image.hpp"
#include "logogan/dataset/manifest.hpp"
#include "logogan/dataset/text_detector.hpp"

namespace logogan {

inline bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

// Ingest raw images into a dataset store: center-crop to square, resize to
// max_resolution, write lossless PNG under <out>/r<max>/. Undecodable files
// are skipped with a log line; an empty result set is an error.
inline DatasetManifest ingest_images(const std::filesystem::path& directory,
                                     const std::filesystem::path& out_root,
                                     int max_resolution, std::uint64_t seed,
                                     ImageSource source = ImageSource::corpus) {
    if (!is_power_of_two(max_resolution) || max_resolution < 8 || max_resolution > 1024)
        throw std::invalid_argument("max_resolution must be a power of two in [8, 1024]");
    if (!std::filesystem::is_directory(directory))
        throw std::runtime_error("not a directory: " + directory.string());

    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(directory))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());

    DatasetManifest manifest;
    manifest.seed = seed;
    manifest.resolutions = {max_resolution};
    manifest.root = out_root;
    std::filesystem::create_directories(out_root / ("r" + std::to_string(max_resolution)));

    for (const auto& f : files) {
        ImageU8 img;
        try {
            img = load_image_rgb(f);
        } catch (const std::exception& e) {
            std::cerr << "[ingest] skipping " << f.filename().string() << ": " << e.what() << "\n";
            continue;
        }
        ManifestRecord rec;
        rec.id = content_hash(img);
        rec.source = source;
        const ImageU8 prepared = resize_image(center_crop_square(img), max_resolution);
        rec.rel_path = "r" + std::to_string(max_resolution) + "/" + rec.id + ".png";
        if (std::any_of(manifest.records.begin(), manifest.records.end(),
                        [&rec](const ManifestRecord& r) { return r.id == rec.id; })) {
            std::cerr << "[ingest] duplicate content " << f.filename().string() << ", skipping\n";
            continue;
        }
        save_image_png(prepared, out_root / rec.rel_path);
        manifest.records.push_back(std::move(rec));
    }
    if (manifest.records.empty())
        throw std::runtime_error("no decodable images in " + directory.string());
    save_manifest(manifest);
    return manifest;
}

inline int count_alnum(const std::string& s) {
    return static_cast<int>(std::count_if(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) != 0;
    }));
}

// Mark records whose detected text has >= min_chars alphanumeric characters
// as dropped. Fail-open: a detector error keeps the image. The input
// manifest is not mutated.
inline DatasetManifest filter_text_logos(const DatasetManifest& manifest,
                                         TextDetector& detector, int min_chars = 2) {
    if (min_chars < 1) throw std::invalid_argument("min_chars must be >= 1");
    DatasetManifest out = manifest;
    for (auto& rec : out.records) {
        if (!rec.kept) continue;
        std::string text;
        try {
            const ImageU8 img = load_image_rgb(out.image_path(rec.id, out.max_resolution()));
            text = detector.detect(rec.id, img);
        } catch (const std::exception& e) {
            std::cerr << "[filter] detector failed on " << rec.id << " (" << e.what()
                      << "), keeping image\n";
            continue;
        }
        if (count_alnum(text) >= min_chars) {
            rec.kept = false;
            rec.drop_reason = "text";
        }
    }
    save_manifest(out);
    return out;
}

// Build the resolution pyramid 4, 8, ..., max by repeated 2x box
// downsampling of each kept record.
inline DatasetManifest build_multiresolution(const DatasetManifest& manifest) {
    DatasetManifest out = manifest;
    const int max_res = out.max_resolution();
    out.resolutions.clear();
    for (int r = 4; r <= max_res; r *= 2) out.resolutions.push_back(r);
    for (int r : out.resolutions)
        std::filesystem::create_directories(out.root / ("r" + std::to_string(r)));

    for (const auto* rec : out.kept_records()) {
        const auto src_path = out.image_path(rec->id, max_res);
        if (!std::filesystem::exists(src_path))
            throw std::runtime_error("missing source file for record " + rec->id);
        ImageU8 img = load_image_rgb(src_path);
        for (int r = max_res / 2; r >= 4; r /= 2) {
            img = box_downsample_half(img);
            const auto dst = out.image_path(rec->id, r);
            if (!std::filesystem::exists(dst)) save_image_png(img, dst);
        }
    }
    save_manifest(out);
    return out;
}

} // namespace logogan
