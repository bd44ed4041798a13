#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "logogan/core/image.hpp"

namespace logogan {

// OCR adapter. Implementations must be deterministic for identical input.
class TextDetector {
public:
    virtual ~TextDetector() = default;
    virtual std::string detect(const std::string& id, const ImageU8& pixels) = 0;
};

// Test stub: detections come from a JSON fixture {id: text}. Unlisted ids
// read as "no text found".
class FixtureTextDetector : public TextDetector {
public:
    explicit FixtureTextDetector(const std::filesystem::path& fixture) {
        std::ifstream in(fixture);
        if (!in) throw std::runtime_error("cannot open OCR fixture: " + fixture.string());
        nlohmann::json j;
        in >> j;
        for (auto it = j.begin(); it != j.end(); ++it)
            detections_[it.key()] = it.value().get<std::string>();
    }

    explicit FixtureTextDetector(std::map<std::string, std::string> detections)
        : detections_(std::move(detections)) {}

    std::string detect(const std::string& id, const ImageU8&) override {
        auto it = detections_.find(id);
        return it == detections_.end() ? std::string() : it->second;
    }

private:
    std::map<std::string, std::string> detections_;
};

// Shells out to an OCR executable: the image is written to a temp PNG and the
// command is invoked as `cmd <png>`; stdout is the detected text.
class CommandTextDetector : public TextDetector {
public:
    explicit CommandTextDetector(std::string command) : command_(std::move(command)) {}

    std::string detect(const std::string& id, const ImageU8& pixels) override {
        const auto tmp = std::filesystem::temp_directory_path() / ("logogan_ocr_" + id + ".png");
        save_image_png(pixels, tmp);
        const std::string cmd = command_ + " \"" + tmp.string() + "\"";
        std::string out;
        if (FILE* pipe = popen(cmd.c_str(), "r")) {
            std::array<char, 256> buf{};
            while (fgets(buf.data(), static_cast<int>(buf.size()), pipe)) out += buf.data();
            const int rc = pclose(pipe);
            std::filesystem::remove(tmp);
            if (rc != 0) throw std::runtime_error("OCR command failed: " + command_);
        } else {
            std::filesystem::remove(tmp);
            throw std::runtime_error("cannot launch OCR command: " + command_);
        }
        return out;
    }

private:
    std::string command_;
};

// Detector that always throws, for exercising the fail-open path.
class FailingTextDetector : public TextDetector {
public:
    std::string detect(const std::string&, const ImageU8&) override {
        throw std::runtime_error("detector unavailable");
    }
};

} // namespace logogan
