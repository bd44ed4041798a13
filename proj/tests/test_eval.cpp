#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "logogan/dataset/pipeline.hpp"
#include "logogan/dataset/synthetic.hpp"
#include "logogan/eval/evaluate.hpp"
#include "logogan/eval/stats.hpp"
#include "test_util.hpp"

using namespace logogan;

namespace {

// synthetic two-class corpus labeled by dominant color channel
struct EvalDataset {
    testutil::TempDir tmp;
    DatasetManifest manifest;
    ConditionedDataset labels;

    EvalDataset(int per_class = 8) {
        const auto raw = tmp.path() / "raw";
        write_synthetic_corpus(raw, red_circles_blue_squares(), per_class, 8, 5);
        manifest = ingest_images(raw, tmp.path() / "data", 8, 5);
        manifest = build_multiresolution(manifest);
        labels.manifest_root = tmp.path() / "data";
        labels.k = 2;
        for (const auto* rec : manifest.kept_records()) {
            const ImageU8 img = load_image_rgb(manifest.image_path(rec->id, 8));
            long r = 0, b = 0;
            for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
                r += img.rgb[i];
                b += img.rgb[i + 2];
            }
            labels.labels[rec->id] = r >= b ? 0 : 1; // red circles are class 0
        }
    }
};

} // namespace

TEST_CASE("feature stats: hand-computed mean and covariance") {
    const std::vector<std::vector<double>> rows = {{0, 0}, {2, 0}, {0, 2}, {2, 2}};
    const FeatureStats s = FeatureStats::from_rows(rows);
    REQUIRE(s.mean(0) == Catch::Approx(1.0));
    REQUIRE(s.mean(1) == Catch::Approx(1.0));
    REQUIRE(s.cov(0, 0) == Catch::Approx(4.0 / 3.0)); // n-1 normalization
    REQUIRE(s.cov(1, 1) == Catch::Approx(4.0 / 3.0));
    REQUIRE(s.cov(0, 1) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE_THROWS(FeatureStats::from_rows({{1.0, 2.0}}));
    REQUIRE_THROWS(FeatureStats::from_rows({{1.0}, {1.0, 2.0}}));
}

TEST_CASE("matrix sqrt: diagonal, random psd roundtrip, non-psd rejected") {
    MatXd d = MatXd::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 9.0;
    const MatXd r = matrix_sqrt_psd(d);
    REQUIRE(r(0, 0) == Catch::Approx(2.0));
    REQUIRE(r(1, 1) == Catch::Approx(3.0));
    REQUIRE(r(0, 1) == Catch::Approx(0.0).margin(1e-12));

    Rng rng(9);
    MatXd b(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) b(i, j) = rng.normal();
    const MatXd psd = b * b.transpose();
    const MatXd s = matrix_sqrt_psd(psd);
    REQUIRE(((s * s) - psd).cwiseAbs().maxCoeff() < 1e-9);

    MatXd neg = MatXd::Identity(2, 2);
    neg(1, 1) = -1.0;
    REQUIRE_THROWS(matrix_sqrt_psd(neg));
}

TEST_CASE("frechet distance: zero at identity, diagonal closed form") {
    const std::vector<std::vector<double>> rows = {{0, 1}, {2, 3}, {4, 0}, {1, 5}};
    const FeatureStats s = FeatureStats::from_rows(rows);
    REQUIRE(frechet_distance(s, s) == Catch::Approx(0.0).margin(1e-9));

    // diagonal Gaussians: |dmu|^2 + sum (sqrt(s1) - sqrt(s2))^2
    FeatureStats a, b;
    a.mean = VecXd::Zero(2);
    a.cov = MatXd::Identity(2, 2);
    b.mean = VecXd::Ones(2);
    b.cov = 4.0 * MatXd::Identity(2, 2);
    REQUIRE(frechet_distance(a, b) == Catch::Approx(2.0 + 2.0 * 1.0)); // 2 + 2*(2-1)^2
    REQUIRE(frechet_distance(a, b) == Catch::Approx(frechet_distance(b, a)));
}

TEST_CASE("inception score: degenerate and balanced one-hot cases") {
    // identical rows carry no information beyond the marginal: score 1
    REQUIRE(inception_score({{0.5, 0.5}, {0.5, 0.5}}) == Catch::Approx(1.0));
    // confident, balanced rows over c classes: score c (0*log0 terms drop)
    REQUIRE(inception_score({{1, 0}, {0, 1}, {1, 0}, {0, 1}}) == Catch::Approx(2.0));
    REQUIRE(inception_score({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}) == Catch::Approx(3.0));
    REQUIRE_THROWS(inception_score({}));
    REQUIRE_THROWS(inception_score({{0.9, 0.2}}));
    REQUIRE_THROWS(inception_score({{1.2, -0.2}}));
}

TEST_CASE("proportional class allocation is exact and deterministic") {
    REQUIRE(proportional_classes(4, {1, 1}) == std::vector<int>{0, 0, 1, 1});
    REQUIRE(proportional_classes(3, {1, 1}) == std::vector<int>{0, 0, 1}); // tie -> low index
    REQUIRE(proportional_classes(10, {7, 3}) == std::vector<int>{0, 0, 0, 0, 0, 0, 0, 1, 1, 1});
    REQUIRE(proportional_classes(1, {0, 5}) == std::vector<int>{1});
    REQUIRE_THROWS(proportional_classes(2, {0, 0}));
}

TEST_CASE("class-mean classifier recovers the color classes") {
    EvalDataset ds;
    ToyFeatureExtractor extractor;
    ClassMeanClassifier clf;
    clf.fit(ds.manifest, ds.labels, extractor, 8);
    int correct = 0, total = 0;
    for (const auto* rec : ds.manifest.kept_records()) {
        const auto probs =
            clf.predict_probs(extractor.extract(load_image_rgb(ds.manifest.image_path(rec->id, 8))));
        REQUIRE(probs.size() == 2);
        REQUIRE(probs[0] + probs[1] == Catch::Approx(1.0));
        const int pred = probs[0] >= probs[1] ? 0 : 1;
        correct += pred == ds.labels.label_of(rec->id);
        ++total;
    }
    REQUIRE(correct == total);
}

TEST_CASE("evaluate: replaying the dataset itself scores FID ~ 0") {
    EvalDataset ds;
    ToyFeatureExtractor extractor;
    DatasetSampleSource source(ds.manifest, ds.labels, 8);
    const int n = static_cast<int>(ds.manifest.kept_records().size());
    const EvalReport report = evaluate_model(source, ds.manifest, ds.labels, extractor, n, 77);
    REQUIRE(report.fid < 1e-6);
    REQUIRE(report.is >= 1.0);
    REQUIRE(report.per_class_diversity.size() == 2);
    REQUIRE(report.per_class_diversity[0] > 0.0);
    REQUIRE(report.per_class_diversity[1] > 0.0);
    REQUIRE(report.n_samples == n);
    REQUIRE(report.featurizer == extractor.id());
    REQUIRE(report.source == "dataset");

    SECTION("report json roundtrips the fields") {
        testutil::TempDir tmp;
        write_eval_report(report, tmp.path() / "eval_report.json");
        const auto j = nlohmann::json::parse(testutil::slurp(tmp.path() / "eval_report.json"));
        REQUIRE(j.at("fid").get<double>() == report.fid);
        REQUIRE(j.at("is").get<double>() == report.is);
        REQUIRE(j.at("n_samples").get<int>() == n);
        REQUIRE(j.at("seed").get<std::uint64_t>() == 77);
    }
    SECTION("deterministic in the seed") {
        DatasetSampleSource source2(ds.manifest, ds.labels, 8);
        const EvalReport again = evaluate_model(source2, ds.manifest, ds.labels, extractor, n, 77);
        REQUIRE(again.fid == report.fid);
        REQUIRE(again.is == report.is);
    }
}

TEST_CASE("evaluate: untrained generator scores worse than the dataset replay") {
    EvalDataset ds;
    ToyFeatureExtractor extractor;
    GeneratorConfig cfg;
    cfg.latent_dim = 8;
    cfg.num_classes = 2;
    cfg.mapping_depth = 2;
    cfg.max_resolution = 8;
    cfg.base_channels = 8;
    cfg.min_channels = 4;
    Generator g;
    g.init(cfg, 31);
    GeneratorSampleSource source(g, cfg.max_phase(), 1.0);
    const EvalReport report = evaluate_model(source, ds.manifest, ds.labels, extractor, 16, 77);
    REQUIRE(std::isfinite(report.fid));
    REQUIRE(report.fid > 1.0); // random images are nowhere near the corpus
    REQUIRE(report.is >= 1.0);
}

TEST_CASE("truncation sweep writes one grid per psi") {
    GeneratorConfig cfg;
    cfg.latent_dim = 8;
    cfg.num_classes = 2;
    cfg.mapping_depth = 2;
    cfg.max_resolution = 8;
    cfg.base_channels = 8;
    cfg.min_channels = 4;
    Generator g;
    g.init(cfg, 13);
    testutil::TempDir tmp;
    truncation_sweep(g, {0.0, 0.5, 1.0}, 3, 21, tmp.path() / "sweep");
    REQUIRE(std::filesystem::exists(tmp.path() / "sweep" / "sweep_psi0.00.png"));
    REQUIRE(std::filesystem::exists(tmp.path() / "sweep" / "sweep_psi0.50.png"));
    REQUIRE(std::filesystem::exists(tmp.path() / "sweep" / "sweep_psi1.00.png"));
    const ImageU8 grid = load_image_rgb(tmp.path() / "sweep" / "sweep_psi0.50.png");
    // 2 class rows x 3 columns of 8px tiles with 2px padding
    REQUIRE(grid.height == 2 * 8 + 3 * 2);
    REQUIRE(grid.width == 3 * 8 + 4 * 2);
    REQUIRE_THROWS(truncation_sweep(g, {}, 3, 21, tmp.path() / "sweep"));
}
