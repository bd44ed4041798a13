#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace logogan {

using ordered_json = nlohmann::ordered_json;

enum class ImageSource { corpus, boost, synthetic };

inline std::string to_string(ImageSource s) {
    switch (s) {
        case ImageSource::corpus: return "corpus";
        case ImageSource::boost: return "boost";
        case ImageSource::synthetic: return "synthetic";
    }
    return "corpus";
}

inline ImageSource source_from_string(const std::string& s) {
    if (s == "boost") return ImageSource::boost;
    if (s == "synthetic") return ImageSource::synthetic;
    return ImageSource::corpus;
}

struct ManifestRecord {
    std::string id;       // stable content hash
    std::string rel_path; // file at max resolution, relative to store root
    bool kept = true;
    std::string drop_reason; // empty when kept
    ImageSource source = ImageSource::corpus;
};

struct DatasetManifest {
    int version = 1;
    std::uint64_t seed = 0;
    std::vector<int> resolutions; // ascending, first 4 once the pyramid exists
    std::vector<ManifestRecord> records;
    std::filesystem::path root; // store directory, not serialized

    int max_resolution() const {
        if (resolutions.empty()) throw std::runtime_error("manifest has no resolutions");
        return resolutions.back();
    }

    std::vector<const ManifestRecord*> kept_records() const {
        std::vector<const ManifestRecord*> out;
        for (const auto& r : records)
            if (r.kept) out.push_back(&r);
        return out;
    }

    std::filesystem::path image_path(const std::string& id, int resolution) const {
        return root / ("r" + std::to_string(resolution)) / (id + ".png");
    }
};

inline ordered_json manifest_to_json(const DatasetManifest& m) {
    ordered_json j;
    j["version"] = m.version;
    j["seed"] = m.seed;
    j["resolutions"] = m.resolutions;
    j["records"] = ordered_json::array();
    for (const auto& r : m.records) {
        ordered_json jr;
        jr["id"] = r.id;
        jr["path"] = r.rel_path;
        jr["kept"] = r.kept;
        if (!r.drop_reason.empty()) jr["drop_reason"] = r.drop_reason;
        jr["source"] = to_string(r.source);
        j["records"].push_back(std::move(jr));
    }
    return j;
}

inline DatasetManifest manifest_from_json(const ordered_json& j, std::filesystem::path root) {
    DatasetManifest m;
    m.version = j.at("version").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.resolutions = j.at("resolutions").get<std::vector<int>>();
    for (const auto& jr : j.at("records")) {
        ManifestRecord r;
        r.id = jr.at("id").get<std::string>();
        r.rel_path = jr.at("path").get<std::string>();
        r.kept = jr.at("kept").get<bool>();
        if (jr.contains("drop_reason")) r.drop_reason = jr.at("drop_reason").get<std::string>();
        r.source = source_from_string(jr.value("source", "corpus"));
        m.records.push_back(std::move(r));
    }
    m.root = std::move(root);
    return m;
}

inline void save_manifest(const DatasetManifest& m) {
    std::ofstream out(m.root / "manifest.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest under " + m.root.string());
    out << manifest_to_json(m).dump(2) << "\n";
}

inline DatasetManifest load_manifest(const std::filesystem::path& root) {
    std::ifstream in(root / "manifest.json", std::ios::binary);
    if (!in) throw std::runtime_error("no manifest.json under " + root.string());
    ordered_json j;
    in >> j;
    return manifest_from_json(j, root);
}

} // namespace logogan
