#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <string>

#include "logogan/dataset/manifest.hpp"
#include "logogan/dataset/synthetic.hpp"
#include "test_util.hpp"

using namespace logogan;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(LOGOGAN_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult r;
    char buf[4096];
    while (std::fgets(buf, sizeof(buf), pipe)) r.output += buf;
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

// raw corpus + prepared dataset shared by the pipeline-stage tests
struct CliFixture {
    testutil::TempDir tmp;
    std::filesystem::path raw, data;

    CliFixture() : raw(tmp.path() / "raw"), data(tmp.path() / "data") {
        write_synthetic_corpus(raw, red_circles_blue_squares(), 6, 8, 3);
        const CliResult r =
            run_cli("prepare --in " + q(raw) + " --out " + q(data) + " --max-res 8 --seed 3");
        REQUIRE(r.exit_code == 0);
    }
};

void write_tiny_train_config(const std::filesystem::path& path) {
    std::ofstream out(path);
    out << R"({
  "model": {"latent_dim": 8, "mapping_depth": 2, "max_resolution": 8,
            "base_channels": 8, "min_channels": 4},
  "batch_size": 4, "total_steps": 2, "images_per_phase": 8,
  "images_per_transition": 8, "checkpoint_every": 2, "seed": 11
})";
}

} // namespace

TEST_CASE("cli: prepare reports kept/dropped and refuses to clobber") {
    testutil::TempDir tmp;
    const auto raw = tmp.path() / "raw";
    const auto data = tmp.path() / "data";
    write_synthetic_corpus(raw, red_circles_blue_squares(), 4, 8, 9);

    const CliResult first =
        run_cli("prepare --in " + q(raw) + " --out " + q(data) + " --max-res 8 --seed 1");
    REQUIRE(first.exit_code == 0);
    REQUIRE(first.output.find("kept ") != std::string::npos);
    REQUIRE(first.output.find("dropped ") != std::string::npos);
    REQUIRE(std::filesystem::exists(data / "manifest.json"));
    REQUIRE(std::filesystem::exists(data / "run.json"));
    REQUIRE(std::filesystem::exists(data / "r4"));
    REQUIRE(std::filesystem::exists(data / "r8"));

    const CliResult second =
        run_cli("prepare --in " + q(raw) + " --out " + q(data) + " --max-res 8 --seed 1");
    REQUIRE(second.exit_code == 2);
    REQUIRE(second.output.find("--force") != std::string::npos);

    const CliResult forced = run_cli("prepare --in " + q(raw) + " --out " + q(data) +
                                     " --max-res 8 --seed 1 --force");
    REQUIRE(forced.exit_code == 0);
}

TEST_CASE("cli: prepare applies the OCR fixture filter") {
    testutil::TempDir tmp;
    const auto raw = tmp.path() / "raw";
    const auto data = tmp.path() / "data";
    write_synthetic_corpus(raw, red_circles_blue_squares(), 3, 8, 4);
    REQUIRE(run_cli("prepare --in " + q(raw) + " --out " + q(data) + " --max-res 8").exit_code == 0);

    // pick a real record id, then mark it as containing text
    const DatasetManifest m = load_manifest(data);
    const std::string victim = m.kept_records().front()->id;
    const std::size_t kept_before = m.kept_records().size();
    std::ofstream(tmp.path() / "ocr.json") << "{\"" << victim << "\": \"ACME\"}";

    const CliResult r = run_cli("prepare --in " + q(raw) + " --out " + q(data) +
                                " --max-res 8 --force --ocr-fixture " +
                                q(tmp.path() / "ocr.json"));
    REQUIRE(r.exit_code == 0);
    const DatasetManifest filtered = load_manifest(data);
    REQUIRE(filtered.kept_records().size() == kept_before - 1);
    bool found = false;
    for (const auto& rec : filtered.records)
        if (rec.id == victim) {
            found = true;
            REQUIRE_FALSE(rec.kept);
            REQUIRE(rec.drop_reason == "text");
        }
    REQUIRE(found);
}

TEST_CASE("cli: label clusters the dataset features") {
    CliFixture fx;
    const CliResult r =
        run_cli("label --dataset " + q(fx.data) + " --method features --k 2 --seed 7");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.output.find("\"inertia_share\"") != std::string::npos);
    REQUIRE(std::filesystem::exists(fx.data / "labels.csv"));
    REQUIRE(std::filesystem::exists(fx.data / "clusters.json"));

    SECTION("k larger than the corpus is a usage error") {
        const CliResult bad =
            run_cli("label --dataset " + q(fx.data) + " --method features --k 999");
        REQUIRE(bad.exit_code == 2);
    }
    SECTION("words method without tables is a usage error") {
        const CliResult bad = run_cli("label --dataset " + q(fx.data) + " --method words");
        REQUIRE(bad.exit_code == 2);
    }
}

TEST_CASE("cli: train, generate, evaluate round trip") {
    CliFixture fx;
    REQUIRE(run_cli("label --dataset " + q(fx.data) + " --method features --k 2 --seed 7")
                .exit_code == 0);
    write_tiny_train_config(fx.tmp.path() / "train.json");
    const auto run_dir = fx.tmp.path() / "run";

    const CliResult trained =
        run_cli("train --config " + q(fx.tmp.path() / "train.json") + " --dataset " + q(fx.data) +
                " --out " + q(run_dir) + " --steps 4");
    INFO(trained.output);
    REQUIRE(trained.exit_code == 0);
    REQUIRE(trained.output.find("trained to step 4") != std::string::npos); // flag beat the file
    REQUIRE(std::filesystem::exists(run_dir / "metrics.csv"));
    REQUIRE(std::filesystem::exists(run_dir / "run.json"));
    REQUIRE(std::filesystem::exists(run_dir / "latest" / "params.bin"));

    const CliResult resumed =
        run_cli("train --config " + q(fx.tmp.path() / "train.json") + " --dataset " + q(fx.data) +
                " --out " + q(run_dir) + " --steps 6 --resume " + q(run_dir / "latest"));
    INFO(resumed.output);
    REQUIRE(resumed.exit_code == 0);
    REQUIRE(resumed.output.find("trained to step 6") != std::string::npos);

    const auto gen_dir = fx.tmp.path() / "gen";
    const CliResult generated = run_cli("generate --ckpt " + q(run_dir / "latest") +
                                        " --class all --n 2 --seed 5 --out " + q(gen_dir));
    INFO(generated.output);
    REQUIRE(generated.exit_code == 0);
    REQUIRE(std::filesystem::exists(gen_dir / "class0_0000.png"));
    REQUIRE(std::filesystem::exists(gen_dir / "class1_0001.png"));
    REQUIRE(std::filesystem::exists(gen_dir / "run.json"));

    SECTION("out-of-range class is a usage error") {
        const CliResult bad = run_cli("generate --ckpt " + q(run_dir / "latest") +
                                      " --class 9 --n 1 --out " + q(gen_dir / "bad"));
        REQUIRE(bad.exit_code == 2);
    }

    const auto eval_dir = fx.tmp.path() / "eval";
    const CliResult scored = run_cli("evaluate --ckpt " + q(run_dir / "latest") + " --dataset " +
                                     q(fx.data) + " --n 8 --seed 5 --sweep --out " + q(eval_dir));
    INFO(scored.output);
    REQUIRE(scored.exit_code == 0);
    REQUIRE(scored.output.find("\"fid\"") != std::string::npos);
    REQUIRE(std::filesystem::exists(eval_dir / "eval_report.json"));
    REQUIRE(std::filesystem::exists(eval_dir / "sweep_psi0.50.png"));
}

TEST_CASE("cli: unconditional training needs no labels") {
    CliFixture fx; // labels.csv intentionally never created
    write_tiny_train_config(fx.tmp.path() / "train.json");
    const CliResult trained =
        run_cli("train --config " + q(fx.tmp.path() / "train.json") + " --dataset " + q(fx.data) +
                " --out " + q(fx.tmp.path() / "run") + " --unconditional");
    INFO(trained.output);
    REQUIRE(trained.exit_code == 0);
}

TEST_CASE("cli: usage errors exit with code 2") {
    REQUIRE(run_cli("prepare").exit_code == 2);                   // missing required options
    REQUIRE(run_cli("bogus-subcommand").exit_code == 2);
    REQUIRE(run_cli("label --dataset /nonexistent --k 2").exit_code == 3); // runtime failure
    testutil::TempDir tmp;
    write_synthetic_corpus(tmp.path() / "raw", red_circles_blue_squares(), 2, 8, 1);
    REQUIRE(run_cli("prepare --in " + q(tmp.path() / "raw") + " --out " +
                    q(tmp.path() / "data") + " --max-res 7")
                .exit_code == 2); // not a power of two
}
