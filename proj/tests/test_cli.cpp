#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "rgi/commands.hpp"
#include "rgi/config.hpp"
#include "rgi/metrics.hpp"
#include "rgi/tensor.hpp"

using namespace rgi;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "rgi_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// every regular file in `a` must exist in `b` with identical bytes, and vice versa
void check_dirs_byte_identical(const fs::path& a, const fs::path& b) {
    std::map<std::string, fs::path> left, right;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (e.is_regular_file()) left[fs::relative(e.path(), a).string()] = e.path();
    }
    for (const auto& e : fs::recursive_directory_iterator(b)) {
        if (e.is_regular_file()) right[fs::relative(e.path(), b).string()] = e.path();
    }
    REQUIRE(left.size() == right.size());
    for (const auto& [rel, path] : left) {
        REQUIRE(right.count(rel) == 1);
        CHECK_MESSAGE(file_bytes(path) == file_bytes(right[rel]), "differs: ", rel);
    }
}

ExperimentConfig fixture_config() {
    return ExperimentConfig::from_text(
        "seed=11\n"
        "generator.kind=affine\n"
        "generator.latent_dim=2\n"
        "corruption.mechanism=central_block\n"
        "corruption.block_size=8\n"
        "corruption.e=1\n");
}

std::string solve_config_text(const fs::path& fixture_dir, double lambda) {
    std::ostringstream out;
    out << "seed=11\n"
        << "input.generator=" << (fixture_dir / "generator.rgm").string() << "\n"
        << "input.fixture=" << fixture_dir.string() << "\n"
        << "solver.lambda=" << lambda << "\n"
        << "solver.iterations=800\n";
    return out.str();
}

}  // namespace

TEST_CASE("make-fixture writes a complete, deterministic bundle") {
    fs::path dir1 = fresh_dir("fixture1");
    fs::path dir2 = fresh_dir("fixture2");
    cmd_make_fixture(fixture_config(), {dir1, std::nullopt, false});
    cmd_make_fixture(fixture_config(), {dir2, std::nullopt, false});

    for (const char* name : {"generator.rgm", "x.rgt", "clean.rgt", "true_mask.rgt", "z_star.rgt",
                             "x.pgm", "clean.pgm", "true_mask.pgm", "metadata.txt",
                             "config_echo.txt"}) {
        CHECK_MESSAGE(fs::exists(dir1 / name), "missing ", name);
    }
    check_dirs_byte_identical(dir1, dir2);

    // n0 recorded and consistent with the mask file
    std::string meta = file_bytes(dir1 / "metadata.txt");
    CHECK(meta.find("n0=64") != std::string::npos);

    CorruptedSample sample = load_fixture_dir(dir1);
    CHECK(sample.corruption_budget == 64);
    CHECK(sample.true_latent.has_value());
    CHECK(sample.x.shape() == Shape{16, 16});
}

TEST_CASE("unknown config keys fail loudly") {
    ExperimentConfig config = fixture_config();
    config.set("lamda", "0.1");  // typo must be caught, not ignored
    fs::path dir = fresh_dir("unknown_key");
    CHECK_THROWS_WITH_AS(cmd_make_fixture(config, {dir, std::nullopt, false}),
                         doctest::Contains("lamda"), std::runtime_error);
}

TEST_CASE("config parsing rejects malformed lines and duplicates") {
    CHECK_THROWS_WITH_AS(ExperimentConfig::from_text("novalue\n"), doctest::Contains("key=value"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(ExperimentConfig::from_text("a=1\na=2\n"), doctest::Contains("duplicate"),
                         std::runtime_error);
    ExperimentConfig ok = ExperimentConfig::from_text("# comment\n a = 1 # inline\n\n");
    CHECK(ok.get("a") == "1");
}

TEST_CASE("solve commands write results and metrics; reruns are byte-identical") {
    fs::path fixture_dir = fresh_dir("solve_fixture");
    cmd_make_fixture(fixture_config(), {fixture_dir, std::nullopt, false});

    ExperimentConfig config = ExperimentConfig::from_text(solve_config_text(fixture_dir, 0.1));
    fs::path run1 = fresh_dir("solve_run1");
    fs::path run2 = fresh_dir("solve_run2");
    cmd_solve("rgi", config, {run1, std::nullopt, false});
    cmd_solve("rgi", config, {run2, std::nullopt, false});
    check_dirs_byte_identical(run1, run2);

    for (const char* name : {"z_hat.rgt", "m_hat.rgt", "restored.rgt", "binary_mask.rgt",
                             "restored.pgm", "binary_mask.pgm", "trace.csv", "metadata.txt",
                             "metrics.csv"}) {
        CHECK_MESSAGE(fs::exists(run1 / name), "missing ", name);
    }

    // emitted tensors round-trip through the reader
    Tensor mask = load_tensor(run1 / "binary_mask.rgt");
    CHECK(mask.shape() == Shape{16, 16});

    std::string trace = file_bytes(run1 / "trace.csv");
    CHECK(trace.find("iter,objective\n") == 0);
}

TEST_CASE("rrgi without an unfreeze point matches rgi on the primary outputs") {
    fs::path fixture_dir = fresh_dir("rrgi_fixture");
    cmd_make_fixture(fixture_config(), {fixture_dir, std::nullopt, false});

    std::string text = solve_config_text(fixture_dir, 0.1) + "solver.finetune_start=800\n";
    ExperimentConfig config = ExperimentConfig::from_text(text);
    fs::path rgi_dir = fresh_dir("rrgi_as_rgi");
    fs::path rrgi_dir = fresh_dir("rrgi_frozen");
    cmd_solve("rgi", config, {rgi_dir, std::nullopt, false});
    cmd_solve("rrgi", config, {rrgi_dir, std::nullopt, false});

    for (const char* name : {"z_hat.rgt", "m_hat.rgt", "restored.rgt", "binary_mask.rgt",
                             "trace.csv", "metadata.txt", "metrics.csv", "config_echo.txt"}) {
        CHECK_MESSAGE(file_bytes(rgi_dir / name) == file_bytes(rrgi_dir / name), "differs: ", name);
    }
    // the fine-tuned model is the one extra artifact
    CHECK(fs::exists(rrgi_dir / "model_final.rgm"));
    CHECK(!fs::exists(rgi_dir / "model_final.rgm"));
}

TEST_CASE("rgi beats the baseline on a block-corrupted fixture") {
    fs::path fixture_dir = fresh_dir("cmp_fixture");
    cmd_make_fixture(fixture_config(), {fixture_dir, std::nullopt, false});

    ExperimentConfig config = ExperimentConfig::from_text(solve_config_text(fixture_dir, 0.1));
    fs::path base_dir = fresh_dir("cmp_base");
    fs::path rgi_dir = fresh_dir("cmp_rgi");
    cmd_solve("baseline", config, {base_dir, std::nullopt, false});
    cmd_solve("rgi", config, {rgi_dir, std::nullopt, false});

    CorruptedSample sample = load_fixture_dir(fixture_dir);
    double rmse_base = rmse({load_tensor(base_dir / "restored.rgt")}, {sample.clean});
    double rmse_rgi = rmse({load_tensor(rgi_dir / "restored.rgt")}, {sample.clean});
    CHECK(rmse_base > rmse_rgi);
}

TEST_CASE("rgi on a clean fixture recovers the empty mask and at least baseline quality") {
    ExperimentConfig fixture = fixture_config();
    fixture.set("corruption.mechanism", "none");
    fs::path fixture_dir = fresh_dir("clean_fixture");
    cmd_make_fixture(fixture, {fixture_dir, std::nullopt, false});

    ExperimentConfig config = ExperimentConfig::from_text(solve_config_text(fixture_dir, 0.1));
    fs::path rgi_dir = fresh_dir("clean_rgi");
    fs::path base_dir = fresh_dir("clean_base");
    cmd_solve("rgi", config, {rgi_dir, std::nullopt, false});
    cmd_solve("baseline", config, {base_dir, std::nullopt, false});

    CorruptedSample sample = load_fixture_dir(fixture_dir);
    Tensor mask = load_tensor(rgi_dir / "binary_mask.rgt");
    CHECK(dice(mask, sample.true_mask) == 1.0);  // both empty

    double psnr_rgi = psnr(load_tensor(rgi_dir / "restored.rgt"), sample.clean);
    double psnr_base = psnr(load_tensor(base_dir / "restored.rgt"), sample.clean);
    CHECK(psnr_rgi >= psnr_base - 1e-9);
}

TEST_CASE("sweep emits the summary csv and per-lambda results") {
    fs::path fixture_dir = fresh_dir("sweep_fixture");
    cmd_make_fixture(fixture_config(), {fixture_dir, std::nullopt, false});

    std::string text = solve_config_text(fixture_dir, 0.1) + "sweep.lambdas=0.4,0.2,0.1\n";
    ExperimentConfig config = ExperimentConfig::from_text(text);
    fs::path dir1 = fresh_dir("sweep_run1");
    fs::path dir2 = fresh_dir("sweep_run2");
    cmd_sweep(config, {dir1, std::nullopt, false});
    cmd_sweep(config, {dir2, std::nullopt, false});
    check_dirs_byte_identical(dir1, dir2);

    std::string summary = file_bytes(dir1 / "summary.csv");
    CHECK(summary.find("lambda,rmse,dice,psnr,ssim\n") == 0);
    CHECK(fs::exists(dir1 / "lambda_0" / "z_hat.rgt"));
    CHECK(fs::exists(dir1 / "lambda_2" / "metrics.csv"));
}

TEST_CASE("verify passes on the standard fixture and fails on a hopeless lambda list") {
    ExperimentConfig empty = ExperimentConfig::from_text("");
    fs::path pass_dir = fresh_dir("verify_pass");
    CHECK(cmd_verify(empty, {pass_dir, std::nullopt, false}) == 0);
    CHECK(fs::exists(pass_dir / "theorem1.txt"));
    CHECK(fs::exists(pass_dir / "theorem2.csv"));
    CHECK(file_bytes(pass_dir / "theorem1.txt").find("verdict: PASS") != std::string::npos);

    ExperimentConfig hopeless = ExperimentConfig::from_text("verify.lambdas=50\n");
    fs::path fail_dir = fresh_dir("verify_fail");
    CHECK(cmd_verify(hopeless, {fail_dir, std::nullopt, false}) != 0);
    CHECK(file_bytes(fail_dir / "theorem2.txt").find("verdict: FAIL") != std::string::npos);
}

TEST_CASE("verify with a missing generator file fails before any solve") {
    ExperimentConfig config = ExperimentConfig::from_text(
        "input.generator=/nonexistent/model.rgm\n"
        "input.fixture=/nonexistent\n");
    fs::path dir = fresh_dir("verify_missing");
    CHECK_THROWS_WITH_AS(cmd_verify(config, {dir, std::nullopt, false}),
                         doctest::Contains("cannot open"), std::runtime_error);
}

TEST_CASE("metrics command computes requested values from tensor files") {
    fs::path dir = fresh_dir("metrics_files");
    Tensor restored = Tensor::full({16, 16}, 0.2);
    Tensor clean = Tensor::full({16, 16}, 0.0);
    Tensor pred({16, 16});
    Tensor truth({16, 16});
    pred[0] = pred[1] = 1.0;
    truth[0] = truth[2] = 1.0;
    save_tensor(restored, dir / "restored.rgt");
    save_tensor(clean, dir / "clean.rgt");
    save_tensor(pred, dir / "pred.rgt");
    save_tensor(truth, dir / "truth.rgt");

    std::ostringstream text;
    text << "metrics.restored=" << (dir / "restored.rgt").string() << "\n"
         << "metrics.clean=" << (dir / "clean.rgt").string() << "\n"
         << "metrics.pred_mask=" << (dir / "pred.rgt").string() << "\n"
         << "metrics.true_mask=" << (dir / "truth.rgt").string() << "\n"
         << "metrics.list=psnr,rmse,dice\n";
    ExperimentConfig config = ExperimentConfig::from_text(text.str());
    fs::path out = fresh_dir("metrics_out");
    cmd_metrics(config, {out, std::nullopt, false});

    std::string csv = file_bytes(out / "metrics.csv");
    CHECK(csv.find("sample,psnr,rmse,dice\n") == 0);
    CHECK(csv.find("0,20,0.2,0.5\n") != std::string::npos);  // hand values

    // a metric without its inputs is an error
    ExperimentConfig incomplete = ExperimentConfig::from_text("metrics.list=ssim\n");
    CHECK_THROWS_WITH_AS(cmd_metrics(incomplete, {fresh_dir("metrics_bad"), std::nullopt, false}),
                         doctest::Contains("needs"), std::runtime_error);
}

TEST_CASE("seed override changes outputs and is echoed") {
    fs::path dir_a = fresh_dir("seed_a");
    fs::path dir_b = fresh_dir("seed_b");
    cmd_make_fixture(fixture_config(), {dir_a, std::nullopt, false});
    cmd_make_fixture(fixture_config(), {dir_b, 99, false});
    CHECK(file_bytes(dir_a / "x.rgt") != file_bytes(dir_b / "x.rgt"));
    CHECK(file_bytes(dir_b / "config_echo.txt").find("seed=99") != std::string::npos);
}

#ifdef RGI_CLI_PATH
TEST_CASE("the installed binary runs end to end") {
    fs::path dir = fresh_dir("binary_smoke");
    fs::path config = dir / "fixture.cfg";
    std::ofstream(config) << "seed=3\ncorruption.mechanism=central_block\n";
    std::string cmd = std::string(RGI_CLI_PATH) + " make-fixture --config " + config.string() +
                      " --out " + (dir / "out").string();
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(dir / "out" / "x.rgt"));

    // unknown key: nonzero exit
    std::ofstream(config) << "lamda=0.1\n";
    CHECK(std::system(cmd.c_str()) != 0);
}
#endif
