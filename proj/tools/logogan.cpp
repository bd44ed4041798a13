// Command-line front end: prepare a dataset, label it, train, sample, score.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "logogan/dataset/pipeline.hpp"
#include "logogan/eval/evaluate.hpp"
#include "logogan/labels/conditioned.hpp"
#include "logogan/labels/embedding.hpp"
#include "logogan/labels/kmeans.hpp"
#include "logogan/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace logogan;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

void write_run_echo(const fs::path& dir, const ordered_json& j) {
    fs::create_directories(dir);
    std::ofstream out(dir / "run.json", std::ios::binary);
    out << j.dump(2) << "\n";
}

int cmd_prepare(const fs::path& in, const fs::path& out, int max_res, int min_chars,
                const std::string& ocr_fixture, const std::string& ocr_cmd, std::uint64_t seed,
                bool force) {
    if (fs::exists(out / "manifest.json") && !force) {
        std::cerr << "error: " << (out / "manifest.json").string()
                  << " already exists; pass --force to rebuild\n";
        return kExitUsage;
    }
    DatasetManifest manifest = ingest_images(in, out, max_res, seed);
    if (!ocr_fixture.empty() || !ocr_cmd.empty()) {
        std::unique_ptr<TextDetector> detector;
        if (!ocr_fixture.empty())
            detector = std::make_unique<FixtureTextDetector>(fs::path(ocr_fixture));
        else
            detector = std::make_unique<CommandTextDetector>(ocr_cmd);
        manifest = filter_text_logos(manifest, *detector, min_chars);
    }
    manifest = build_multiresolution(manifest);
    save_manifest(manifest);

    std::size_t kept = manifest.kept_records().size();
    std::size_t dropped = manifest.records.size() - kept;
    std::cout << "kept " << kept << ", dropped " << dropped << "\n";
    ordered_json echo;
    echo["command"] = "prepare";
    echo["in"] = in.string();
    echo["max_resolution"] = max_res;
    echo["min_chars"] = min_chars;
    echo["seed"] = seed;
    echo["kept"] = kept;
    echo["dropped"] = dropped;
    write_run_echo(out, echo);
    return 0;
}

int cmd_label(const fs::path& dataset, const std::string& method, int k, std::uint64_t seed,
              const std::string& words_file, const std::string& embeddings_file) {
    DatasetManifest manifest = load_manifest(dataset);
    std::vector<EmbeddingPoint> points;
    LabelMethod lm;
    if (method == "words") {
        if (words_file.empty() || embeddings_file.empty()) {
            std::cerr << "error: --method words needs --words and --embeddings\n";
            return kExitUsage;
        }
        lm = LabelMethod::word_midpoint;
        TableWordEmbedder embedder(embeddings_file);
        const auto word_labels = load_word_labels(words_file);
        for (const auto* rec : manifest.kept_records()) {
            auto it = word_labels.find(rec->id);
            if (it == word_labels.end())
                throw std::runtime_error("no word labels for record " + rec->id);
            points.push_back({rec->id, word_label_midpoint(it->second, embedder)});
        }
    } else { // features
        lm = LabelMethod::cnn_embedding;
        ToyFeatureExtractor extractor;
        for (const auto* rec : manifest.kept_records()) {
            const ImageU8 img =
                load_image_rgb(manifest.image_path(rec->id, manifest.max_resolution()));
            points.push_back(extract_cnn_features(rec->id, img, extractor));
        }
    }
    const ClusterAssignment assignment = kmeans_cluster(points, k, seed);
    assign_conditions(manifest, assignment, lm);
    const ClusterReport report = cluster_report(points, assignment);
    std::cout << cluster_report_json(report).dump(2) << "\n";
    return 0;
}

int cmd_train(const std::string& config_file, const fs::path& dataset, const fs::path& out,
              const std::string& resume_from, bool unconditional,
              std::optional<long> steps_override, std::optional<std::uint64_t> seed_override) {
    TrainConfig cfg;
    if (!config_file.empty()) cfg = load_train_config(config_file);
    if (steps_override) cfg.total_steps = *steps_override; // flags beat the file
    if (seed_override) cfg.seed = *seed_override;

    DatasetManifest manifest = load_manifest(dataset);
    ConditionedDataset labels;
    labels.manifest_root = dataset;
    if (!unconditional) {
        labels = load_conditions(dataset);
        cfg.model.num_classes = labels.k;
    } else {
        labels.k = 0;
        cfg.model.num_classes = 0;
    }
    if (cfg.model.max_resolution > manifest.max_resolution())
        cfg.model.max_resolution = manifest.max_resolution();

    ordered_json echo;
    echo["command"] = "train";
    echo["dataset"] = dataset.string();
    echo["config"] = train_config_to_json(cfg);
    echo["resume"] = resume_from;
    write_run_echo(out, echo);

    Trainer trainer(out, cfg, manifest, labels);
    if (!resume_from.empty()) trainer.resume(resume_from);
    const auto metrics = trainer.run();
    if (!metrics.empty()) {
        const auto& m = metrics.back();
        std::cout << "trained to step " << m.step << " (phase " << m.phase << ", alpha " << m.alpha
                  << "): d_loss " << m.d_loss << ", g_loss " << m.g_loss << ", gp " << m.gp << "\n";
    } else {
        std::cout << "nothing to do: checkpoint already at total_steps\n";
    }
    return 0;
}

int cmd_generate(const fs::path& ckpt, const std::string& cls, int n, std::optional<double> psi,
                 std::uint64_t seed, const fs::path& out) {
    ModelPair model;
    const CheckpointState state = load_checkpoint(ckpt, model);
    const int c = model.cfg.num_classes;
    std::vector<int> wanted;
    if (cls == "all") {
        for (int i = 0; i < std::max(c, 1); ++i) wanted.push_back(i);
    } else {
        const int parsed = std::stoi(cls);
        if (c > 0 && (parsed < 0 || parsed >= c))
            throw std::invalid_argument("class " + cls + " outside [0, " + std::to_string(c) + ")");
        wanted.push_back(c > 0 ? parsed : 0);
    }
    fs::create_directories(out);
    for (int cls_idx : wanted) {
        Tensor z = sample_latent_z(n, model.cfg.latent_dim, mix_seed(seed, 0x67656Eull, cls_idx));
        Tensor y = c > 0 ? one_hot_rows(std::vector<int>(n, cls_idx), c) : Tensor({n, 0});
        Tensor imgs = model.g.forward(z, y, mix_seed(seed, 0x67656Full, cls_idx), state.phase,
                                      state.alpha, psi);
        for (int i = 0; i < n; ++i) {
            char name[64];
            std::snprintf(name, sizeof(name), "class%d_%04d.png", cls_idx, i);
            save_image_png(tensor_slice_to_image(imgs, i), out / name);
        }
    }
    ordered_json echo;
    echo["command"] = "generate";
    echo["checkpoint"] = ckpt.string();
    echo["class"] = cls;
    echo["n"] = n;
    if (psi) echo["psi"] = *psi;
    echo["seed"] = seed;
    write_run_echo(out, echo);
    std::cout << "wrote " << n * wanted.size() << " images to " << out.string() << "\n";
    return 0;
}

int cmd_evaluate(const fs::path& ckpt, const fs::path& dataset, int n, std::uint64_t seed,
                 bool sweep, const fs::path& out) {
    ModelPair model;
    const CheckpointState state = load_checkpoint(ckpt, model);
    DatasetManifest manifest = load_manifest(dataset);
    ConditionedDataset labels;
    labels.manifest_root = dataset;
    if (model.cfg.num_classes > 0) {
        labels = load_conditions(dataset);
        if (labels.k != model.cfg.num_classes)
            throw std::invalid_argument("checkpoint classes do not match dataset labels");
    } else {
        labels.k = 0;
    }
    ToyFeatureExtractor extractor;
    GeneratorSampleSource source(model.g, state.phase, state.alpha, std::nullopt,
                                 "checkpoint-step-" + std::to_string(state.step));
    const EvalReport report = evaluate_model(source, manifest, labels, extractor, n, seed);
    fs::create_directories(out);
    write_eval_report(report, out / "eval_report.json");
    if (sweep) truncation_sweep(model.g, {0.0, 0.25, 0.5, 0.75, 1.0}, 4, seed, out);
    std::cout << eval_report_to_json(report).dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"conditional style-based GAN toolkit for logo corpora"};
    app.require_subcommand(1);

    // prepare
    auto* prepare = app.add_subcommand("prepare", "ingest raw images into a dataset store");
    std::string p_in, p_out, p_fixture, p_cmd;
    int p_max_res = 32, p_min_chars = 2;
    std::uint64_t p_seed = 0;
    bool p_force = false;
    prepare->add_option("--in", p_in, "directory of raw images")->required();
    prepare->add_option("--out", p_out, "dataset output directory")->required();
    prepare->add_option("--max-res", p_max_res, "top resolution (power of two)");
    prepare->add_option("--min-chars", p_min_chars, "drop logos whose detected text has at least this many letters/digits");
    prepare->add_option("--ocr-fixture", p_fixture, "JSON id->text fixture for text filtering");
    prepare->add_option("--ocr-cmd", p_cmd, "external OCR command reading a PNG path");
    prepare->add_option("--seed", p_seed, "ingest seed");
    prepare->add_flag("--force", p_force, "rebuild over an existing dataset");

    // label
    auto* label = app.add_subcommand("label", "cluster the dataset into synthetic classes");
    std::string l_dataset, l_method = "features", l_words, l_embeddings;
    int l_k = 10;
    std::uint64_t l_seed = 0;
    label->add_option("--dataset", l_dataset, "dataset directory")->required();
    label->add_option("--method", l_method, "words | features")
        ->check(CLI::IsMember({"words", "features"}));
    label->add_option("--k", l_k, "number of clusters");
    label->add_option("--seed", l_seed, "clustering seed");
    label->add_option("--words", l_words, "JSON id -> [words] file (words method)");
    label->add_option("--embeddings", l_embeddings, "TSV word embedding table (words method)");

    // train
    auto* train = app.add_subcommand("train", "train the conditional GAN");
    std::string t_config, t_dataset, t_out, t_resume;
    bool t_unconditional = false;
    long t_steps = -1;
    std::int64_t t_seed = -1;
    train->add_option("--config", t_config, "training config JSON");
    train->add_option("--dataset", t_dataset, "dataset directory")->required();
    train->add_option("--out", t_out, "run output directory")->required();
    train->add_option("--resume", t_resume, "checkpoint directory to resume from");
    train->add_flag("--unconditional", t_unconditional, "ignore labels, train unconditioned");
    train->add_option("--steps", t_steps, "override total_steps from the config");
    train->add_option("--seed", t_seed, "override seed from the config");

    // generate
    auto* generate = app.add_subcommand("generate", "sample images from a checkpoint");
    std::string g_ckpt, g_class = "all", g_out;
    int g_n = 16;
    double g_psi = -1.0;
    std::uint64_t g_seed = 0;
    generate->add_option("--ckpt", g_ckpt, "checkpoint directory")->required();
    generate->add_option("--class", g_class, "class index or 'all'");
    generate->add_option("--n", g_n, "samples per class");
    generate->add_option("--psi", g_psi, "truncation strength in [0, 1]");
    generate->add_option("--seed", g_seed, "sampling seed");
    generate->add_option("--out", g_out, "output directory")->required();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint against the dataset");
    std::string e_ckpt, e_dataset, e_out;
    int e_n = 64;
    std::uint64_t e_seed = 0;
    bool e_sweep = false;
    evaluate->add_option("--ckpt", e_ckpt, "checkpoint directory")->required();
    evaluate->add_option("--dataset", e_dataset, "dataset directory")->required();
    evaluate->add_option("--n", e_n, "generated sample count");
    evaluate->add_option("--seed", e_seed, "evaluation seed");
    evaluate->add_flag("--sweep", e_sweep, "also render truncation sweep grids");
    evaluate->add_option("--out", e_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (prepare->parsed())
            return cmd_prepare(p_in, p_out, p_max_res, p_min_chars, p_fixture, p_cmd, p_seed,
                               p_force);
        if (label->parsed()) return cmd_label(l_dataset, l_method, l_k, l_seed, l_words,
                                              l_embeddings);
        if (train->parsed())
            return cmd_train(t_config, t_dataset, t_out, t_resume, t_unconditional,
                             t_steps >= 0 ? std::optional<long>(t_steps) : std::nullopt,
                             t_seed >= 0 ? std::optional<std::uint64_t>(t_seed) : std::nullopt);
        if (generate->parsed())
            return cmd_generate(g_ckpt, g_class, g_n,
                                g_psi >= 0.0 ? std::optional<double>(g_psi) : std::nullopt, g_seed,
                                g_out);
        if (evaluate->parsed()) return cmd_evaluate(e_ckpt, e_dataset, e_n, e_seed, e_sweep, e_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
