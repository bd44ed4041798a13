#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "logogan/dataset/manifest.hpp"
#include "logogan/labels/kmeans.hpp"

namespace logogan {

enum class LabelMethod { word_midpoint, cnn_embedding, external };

inline std::string to_string(LabelMethod m) {
    switch (m) {
        case LabelMethod::word_midpoint: return "word_midpoint";
        case LabelMethod::cnn_embedding: return "cnn_embedding";
        case LabelMethod::external: return "external";
    }
    return "external";
}

inline LabelMethod label_method_from_string(const std::string& s) {
    if (s == "word_midpoint") return LabelMethod::word_midpoint;
    if (s == "cnn_embedding") return LabelMethod::cnn_embedding;
    if (s == "external") return LabelMethod::external;
    throw std::runtime_error("unknown label method: " + s);
}

// Manifest joined with per-image cluster labels, the synthetic
// class-conditions used everywhere downstream.
struct ConditionedDataset {
    std::filesystem::path manifest_root;
    int k = 0;
    std::map<std::string, int> labels; // id -> cluster in [0, k)
    LabelMethod method = LabelMethod::external;

    int label_of(const std::string& id) const {
        auto it = labels.find(id);
        if (it == labels.end()) throw std::runtime_error("no label for record " + id);
        return it->second;
    }
};

// Join manifest and cluster assignment; every kept record must be covered.
// Writes labels.csv and clusters.json next to the manifest.
inline ConditionedDataset assign_conditions(const DatasetManifest& manifest,
                                            const ClusterAssignment& assignment,
                                            LabelMethod method) {
    std::vector<std::string> missing;
    for (const auto* rec : manifest.kept_records())
        if (!assignment.labels.count(rec->id)) missing.push_back(rec->id);
    if (!missing.empty()) {
        std::string msg = "missing labels for records:";
        for (const auto& id : missing) msg += " " + id;
        throw std::runtime_error(msg);
    }

    ConditionedDataset ds;
    ds.manifest_root = manifest.root;
    ds.k = assignment.k;
    ds.method = method;
    for (const auto* rec : manifest.kept_records())
        ds.labels[rec->id] = assignment.labels.at(rec->id);

    {
        std::ofstream csv(manifest.root / "labels.csv", std::ios::binary);
        csv << "id,cluster\n";
        for (const auto& [id, cluster] : ds.labels) csv << id << "," << cluster << "\n";
    }
    {
        ordered_json j;
        j["k"] = assignment.k;
        j["seed"] = assignment.seed;
        j["inertia"] = assignment.inertia;
        j["method"] = to_string(method);
        j["centroids"] = assignment.centroids;
        std::ofstream out(manifest.root / "clusters.json", std::ios::binary);
        out << j.dump(2) << "\n";
    }
    return ds;
}

inline ConditionedDataset load_conditions(const std::filesystem::path& root) {
    ConditionedDataset ds;
    ds.manifest_root = root;
    {
        std::ifstream in(root / "clusters.json", std::ios::binary);
        if (!in) throw std::runtime_error("no clusters.json under " + root.string());
        nlohmann::json j;
        in >> j;
        ds.k = j.at("k").get<int>();
        ds.method = label_method_from_string(j.at("method").get<std::string>());
    }
    {
        std::ifstream in(root / "labels.csv", std::ios::binary);
        if (!in) throw std::runtime_error("no labels.csv under " + root.string());
        std::string line;
        std::getline(in, line);
        if (line != "id,cluster") throw std::runtime_error("bad labels.csv header: " + line);
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto comma = line.rfind(',');
            if (comma == std::string::npos) throw std::runtime_error("bad labels.csv row: " + line);
            const int cluster = std::stoi(line.substr(comma + 1));
            if (cluster < 0 || cluster >= ds.k)
                throw std::runtime_error("cluster index out of range in labels.csv: " + line);
            ds.labels[line.substr(0, comma)] = cluster;
        }
    }
    return ds;
}

} // namespace logogan
