#include "rgi/commands.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "rgi/fixtures.hpp"
#include "rgi/image_io.hpp"
#include "rgi/metrics.hpp"
#include "rgi/oracle.hpp"
#include "rgi/rng.hpp"
#include "rgi/solver.hpp"

namespace rgi {

namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);  // binary keeps newlines byte-stable
    if (!out) throw std::runtime_error("cannot open for write: " + path.string());
    out << text;
}

fs::path prepare_out_dir(const ExperimentConfig& config, const CommandIo& io) {
    fs::create_directories(io.out_dir);
    write_text(io.out_dir / "config_echo.txt", config.echo());
    return io.out_dir;
}

void apply_seed_override(ExperimentConfig& config, const CommandIo& io) {
    if (io.seed_override) config.set("seed", std::to_string(*io.seed_override));
}

Loss parse_loss(const std::string& s) {
    if (s == "l2") return Loss::l2;
    if (s == "l1") return Loss::l1;
    throw std::runtime_error("config: unknown loss '" + s + "' (expected l2 or l1)");
}

MaskStrategy parse_strategy(const std::string& s) {
    if (s == "closed_form") return MaskStrategy::closed_form;
    if (s == "gradient") return MaskStrategy::gradient;
    throw std::runtime_error("config: unknown mask_strategy '" + s + "'");
}

Fill parse_fill(const std::string& s) {
    if (s == "normal") return Fill::normal;
    if (s == "uniform") return Fill::uniform;
    if (s == "mean") return Fill::mean_fill;
    throw std::runtime_error("config: unknown fill '" + s + "'");
}

const std::vector<std::string> kSolverKeys = {
    "seed",
    "input.generator",
    "input.fixture",
    "solver.lambda",
    "solver.loss",
    "solver.iterations",
    "solver.lr_z",
    "solver.lr_m",
    "solver.lr_theta",
    "solver.finetune_start",
    "solver.mask_strategy",
    "solver.latent_bound",
    "solver.beta1",
    "solver.beta2",
    "solver.epsilon",
    "solver.init_z",
    "solver.binarize_threshold",
};

SolverConfig solver_from_config(const ExperimentConfig& config, const std::string& method) {
    SolverConfig sc;
    sc.lambda = config.get_double("solver.lambda", sc.lambda);
    sc.loss = parse_loss(config.get_string("solver.loss", "l2"));
    sc.iterations = config.get_size("solver.iterations", sc.iterations);
    sc.lr_z = config.get_double("solver.lr_z", sc.lr_z);
    sc.lr_m = config.get_double("solver.lr_m", sc.lr_m);
    sc.lr_theta = config.get_double("solver.lr_theta", sc.lr_theta);
    // rrgi fine-tunes over the last quarter of the run unless pinned explicitly
    if (config.has("solver.finetune_start")) {
        sc.finetune_start_iter = config.get_size("solver.finetune_start", 0);
    } else if (method == "rrgi") {
        sc.finetune_start_iter = sc.iterations - sc.iterations / 4;
    }
    sc.mask_strategy = parse_strategy(config.get_string("solver.mask_strategy", "closed_form"));
    if (config.has("solver.latent_bound")) {
        sc.latent_bound = config.get_double("solver.latent_bound", 0.0);
    }
    sc.beta1 = config.get_double("solver.beta1", sc.beta1);
    sc.beta2 = config.get_double("solver.beta2", sc.beta2);
    sc.epsilon = config.get_double("solver.epsilon", sc.epsilon);
    sc.seed = config.get_u64("seed", 0);
    std::string init = config.get_string("solver.init_z", "zero");
    if (init == "zero") sc.init_z = LatentInit::zero;
    else if (init == "normal") sc.init_z = LatentInit::seeded_normal;
    else throw std::runtime_error("config: unknown init_z '" + init + "'");
    sc.binarize_threshold = config.get_double("solver.binarize_threshold", sc.binarize_threshold);
    sc.validate();
    return sc;
}

void write_trace_csv(const fs::path& path, const std::vector<std::pair<std::size_t, double>>& trace) {
    std::ostringstream out;
    out << "iter,objective\n";
    for (const auto& [iter, obj] : trace) out << iter << "," << format_float(obj) << "\n";
    write_text(path, out.str());
}

void write_metadata(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ostringstream out;
    for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
    write_text(path, out.str());
}

std::map<std::string, std::string> read_metadata(const fs::path& path) {
    std::ifstream in(path);
    std::map<std::string, std::string> kv;
    if (!in) return kv;
    std::string line;
    while (std::getline(in, line)) {
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

GeneratorModel build_generator(const ExperimentConfig& config, std::uint64_t seed) {
    if (config.has("generator.file")) return load_model(config.get("generator.file"));

    ManifoldSpec spec;
    spec.latent_dim = config.get_size("generator.latent_dim", 2);
    std::size_t rows = config.get_size("generator.rows", 16);
    std::size_t cols = config.get_size("generator.cols", 16);
    std::size_t channels = config.get_size("generator.channels", 1);
    spec.image_shape = channels == 3 ? Shape{rows, cols, 3} : Shape{rows, cols};
    spec.seed = seed;

    std::string kind = config.get_string("generator.kind", "affine");
    if (kind == "affine") return make_affine_generator(spec, seed);
    if (kind == "mlp") {
        return make_mlp_generator(spec, config.get_size_list("generator.hidden", {32, 64}), seed);
    }
    throw std::runtime_error("config: unknown generator.kind '" + kind + "'");
}

void write_sample_files(const fs::path& dir, const CorruptedSample& sample) {
    save_tensor(sample.x, dir / "x.rgt");
    save_tensor(sample.clean, dir / "clean.rgt");
    save_tensor(sample.true_mask, dir / "true_mask.rgt");
    if (sample.true_latent) save_tensor(*sample.true_latent, dir / "z_star.rgt");
    write_image_pnm(sample.x, dir / (sample.x.rank() == 3 ? "x.ppm" : "x.pgm"));
    write_image_pnm(sample.clean, dir / (sample.clean.rank() == 3 ? "clean.ppm" : "clean.pgm"));
    write_mask_pgm(sample.true_mask, dir / "true_mask.pgm");
}

}  // namespace

CorruptedSample load_fixture_dir(const fs::path& dir) {
    CorruptedSample sample;
    if (!fs::exists(dir / "x.rgt")) {
        throw std::runtime_error("fixture: missing " + (dir / "x.rgt").string());
    }
    sample.x = load_tensor(dir / "x.rgt");
    if (fs::exists(dir / "clean.rgt")) sample.clean = load_tensor(dir / "clean.rgt");
    if (fs::exists(dir / "true_mask.rgt")) sample.true_mask = load_tensor(dir / "true_mask.rgt");
    if (fs::exists(dir / "z_star.rgt")) sample.true_latent = load_tensor(dir / "z_star.rgt");
    auto meta = read_metadata(dir / "metadata.txt");
    if (auto it = meta.find("n0"); it != meta.end()) {
        sample.corruption_budget = static_cast<std::size_t>(std::stoull(it->second));
    }
    return sample;
}

void cmd_make_fixture(ExperimentConfig config, const CommandIo& io) {
    apply_seed_override(config, io);
    config.require_known({
        "seed",
        "generator.file",
        "generator.kind",
        "generator.latent_dim",
        "generator.rows",
        "generator.cols",
        "generator.channels",
        "generator.hidden",
        "corruption.mechanism",
        "corruption.block_size",
        "corruption.fraction",
        "corruption.target_area",
        "corruption.fill",
        "corruption.e",
    });
    fs::path dir = prepare_out_dir(config, io);

    std::uint64_t seed = config.get_u64("seed", 0);
    GeneratorModel model = build_generator(config, derive_seed(seed, 1));
    auto [z_star, clean] = sample_clean(model, derive_seed(seed, 2));

    std::string mechanism = config.get_string("corruption.mechanism", "central_block");
    CorruptedSample sample;
    if (mechanism == "none") {
        sample.x = clean;
        sample.clean = clean;
        sample.true_mask = Tensor({clean.shape()[0], clean.shape()[1]});
        sample.true_latent = z_star;
        sample.corruption_budget = 0;
    } else {
        CorruptionSpec spec;
        if (mechanism == "central_block") spec.mechanism = Mechanism::central_block;
        else if (mechanism == "random_missing") spec.mechanism = Mechanism::random_missing;
        else if (mechanism == "irregular") spec.mechanism = Mechanism::irregular;
        else if (mechanism == "defect_fill") spec.mechanism = Mechanism::defect_fill;
        else throw std::runtime_error("config: unknown corruption.mechanism '" + mechanism + "'");
        spec.block_size = config.get_size("corruption.block_size", 8);
        spec.missing_fraction = config.get_double("corruption.fraction", 0.25);
        spec.target_area = config.get_size("corruption.target_area", 0);
        spec.fill = parse_fill(config.get_string("corruption.fill", "normal"));
        spec.mean_level = config.get_double("corruption.e", 1.0);
        spec.seed = derive_seed(seed, 3);
        sample = corrupt(clean, z_star, spec);
    }

    save_model(model, dir / "generator.rgm");
    write_sample_files(dir, sample);
    write_metadata(dir / "metadata.txt",
                   {{"mechanism", mechanism},
                    {"n0", std::to_string(sample.corruption_budget)},
                    {"e", format_float(config.get_double("corruption.e", 1.0))},
                    {"seed", std::to_string(seed)}});
}

void cmd_train_decoder(ExperimentConfig config, const CommandIo& io) {
    apply_seed_override(config, io);
    config.require_known({
        "seed",
        "manifold.latent_dim",
        "manifold.rows",
        "manifold.cols",
        "decoder.hidden",
        "train.pairs",
        "train.epochs",
        "train.lr",
    });
    fs::path dir = prepare_out_dir(config, io);

    std::uint64_t seed = config.get_u64("seed", 0);
    ManifoldSpec spec;
    spec.latent_dim = config.get_size("manifold.latent_dim", 8);
    spec.image_shape = {config.get_size("manifold.rows", 16), config.get_size("manifold.cols", 16)};
    spec.seed = derive_seed(seed, 1);
    GeneratorModel manifold = make_affine_generator(spec, spec.seed);
    GeneratorModel decoder =
        make_mlp_generator(spec, config.get_size_list("decoder.hidden", {32, 64}), derive_seed(seed, 2));

    std::size_t n_pairs = config.get_size("train.pairs", 64);
    Rng rng(derive_seed(seed, 3));
    std::vector<std::pair<Tensor, Tensor>> pairs;
    pairs.reserve(n_pairs);
    for (std::size_t i = 0; i < n_pairs; ++i) {
        Tensor z = rng.normal_tensor({spec.latent_dim});
        pairs.emplace_back(z, generator_eval(manifold, z));
    }

    TrainResult trained = train_decoder(pairs, decoder, config.get_size("train.epochs", 1000),
                                        config.get_double("train.lr", 0.01), derive_seed(seed, 4));

    save_model(manifold, dir / "manifold.rgm");
    save_model(trained.model, dir / "decoder.rgm");
    std::ostringstream trace;
    trace << "epoch,mse\n";
    for (std::size_t i = 0; i < trained.loss_trace.size(); ++i) {
        trace << i << "," << format_float(trained.loss_trace[i]) << "\n";
    }
    write_text(dir / "train_trace.csv", trace.str());
    write_metadata(dir / "metadata.txt",
                   {{"pairs", std::to_string(n_pairs)},
                    {"final_mse",
                     trained.loss_trace.empty() ? "nan" : format_float(trained.loss_trace.back())},
                    {"seed", std::to_string(seed)}});
}

namespace {

void write_solution_files(const fs::path& dir, const InversionResult& result,
                          const CorruptedSample& sample) {
    save_tensor(result.z_hat, dir / "z_hat.rgt");
    save_tensor(result.m_hat, dir / "m_hat.rgt");
    save_tensor(result.restored, dir / "restored.rgt");
    save_tensor(result.binary_mask, dir / "binary_mask.rgt");
    write_image_pnm(result.restored, dir / (result.restored.rank() == 3 ? "restored.ppm" : "restored.pgm"));
    write_mask_pgm(result.binary_mask, dir / "binary_mask.pgm");
    write_trace_csv(dir / "trace.csv", result.loss_trace);
    if (result.model_final) save_model(*result.model_final, dir / "model_final.rgm");

    write_metadata(dir / "metadata.txt",
                   {{"lambda", format_float(result.config.lambda)},
                    {"seed", std::to_string(result.config.seed)},
                    {"iterations", std::to_string(result.config.iterations)},
                    {"final_objective", format_float(result.final_objective)}});

    const bool has_clean = !sample.clean.empty();
    const bool has_mask = !sample.true_mask.empty();
    if (has_clean || has_mask) {
        MetricReport report;
        std::vector<double> row;
        if (has_clean) {
            report.names = {"psnr", "ssim", "rmse"};
            row = {psnr(result.restored, sample.clean), ssim(result.restored, sample.clean),
                   rmse({result.restored}, {sample.clean})};
        }
        if (has_mask) {
            report.names.push_back("dice");
            row.push_back(dice(result.binary_mask, sample.true_mask));
        }
        report.add_row(std::move(row));
        std::ostringstream csv;
        report.write_csv(csv);
        write_text(dir / "metrics.csv", csv.str());
    }
}

}  // namespace

void cmd_solve(const std::string& method, ExperimentConfig config, const CommandIo& io) {
    apply_seed_override(config, io);
    config.require_known(kSolverKeys);
    fs::path dir = prepare_out_dir(config, io);

    GeneratorModel model = load_model(config.get("input.generator"));
    CorruptedSample sample = load_fixture_dir(config.get("input.fixture"));
    SolverConfig solver = solver_from_config(config, method);

    InversionResult result;
    if (method == "baseline") result = invert_baseline(model, sample.x, solver);
    else if (method == "rgi") result = solve_rgi(model, sample.x, solver);
    else if (method == "rrgi") result = solve_rrgi(model, sample.x, solver);
    else throw std::runtime_error("solve: unknown method '" + method + "'");

    write_solution_files(dir, result, sample);
}

void cmd_sweep(ExperimentConfig config, const CommandIo& io) {
    apply_seed_override(config, io);
    std::vector<std::string> keys = kSolverKeys;
    keys.push_back("sweep.lambdas");
    keys.push_back("sweep.theorem_mode");
    config.require_known(keys);
    fs::path dir = prepare_out_dir(config, io);

    GeneratorModel model = load_model(config.get("input.generator"));
    CorruptedSample sample = load_fixture_dir(config.get("input.fixture"));
    if (sample.clean.empty() || sample.true_mask.empty()) {
        throw std::runtime_error("sweep: fixture must carry clean image and true mask");
    }
    SolverConfig solver = solver_from_config(config, "rgi");
    std::vector<double> lambdas = config.get_double_list("sweep.lambdas", {});
    bool theorem_mode = config.get_bool("sweep.theorem_mode", false);

    std::vector<SweepEntry> entries =
        sweep_lambda(model, sample.x, lambdas, solver, &sample, theorem_mode);

    std::ostringstream summary;
    summary << "lambda,rmse,dice,psnr,ssim\n";
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const SweepEntry& e = entries[i];
        summary << format_float(e.lambda) << "," << format_float(e.metrics.at("rmse")) << ","
                << format_float(e.metrics.at("dice")) << "," << format_float(e.metrics.at("psnr"))
                << "," << format_float(e.metrics.at("ssim")) << "\n";
        fs::path sub = dir / ("lambda_" + std::to_string(i));
        fs::create_directories(sub);
        write_solution_files(sub, e.result, sample);
    }
    write_text(dir / "summary.csv", summary.str());
}

int cmd_verify(ExperimentConfig config, const CommandIo& io) {
    apply_seed_override(config, io);
    config.require_known({
        "seed",
        "input.generator",
        "input.fixture",
        "verify.lambdas",
        "verify.slack",
        "verify.final_epsilon",
        "verify.restarts",
        "verify.iterations",
        "verify.lattice_radius",
        "verify.lattice_points",
    });
    fs::path dir = prepare_out_dir(config, io);

    GeneratorModel model;
    CorruptedSample sample;
    if (config.has("input.generator") || config.has("input.fixture")) {
        model = load_model(config.get("input.generator"));
        sample = load_fixture_dir(config.get("input.fixture"));
    } else {
        StandardFixture fx = standard_affine_fixture();
        model = std::move(fx.model);
        sample = std::move(fx.sample);
    }

    TheoremConfig tc = standard_theorem_config();
    tc.lambdas = config.get_double_list("verify.lambdas", tc.lambdas);
    tc.slack = config.get_double("verify.slack", tc.slack);
    tc.final_epsilon = config.get_double("verify.final_epsilon", tc.final_epsilon);
    tc.restarts = config.get_size("verify.restarts", tc.restarts);
    tc.solver.iterations = config.get_size("verify.iterations", tc.solver.iterations);
    tc.solver.seed = config.get_u64("seed", tc.solver.seed);

    LatticeSpec lattice = standard_lattice();
    lattice.radius = config.get_double("verify.lattice_radius", lattice.radius);
    lattice.points_per_axis = config.get_size("verify.lattice_points", lattice.points_per_axis);
    lattice.dims = model.latent_dim;

    TheoremReport t1 = verify_theorem1(model, sample, tc, lattice);
    TheoremReport t2 = verify_theorem2(model, sample, tc);

    write_text(dir / "theorem1.txt", t1.to_text());
    write_text(dir / "theorem2.txt", t2.to_text());
    std::ostringstream csv1, csv2;
    t1.write_csv(csv1);
    t2.write_csv(csv2);
    write_text(dir / "theorem1.csv", csv1.str());
    write_text(dir / "theorem2.csv", csv2.str());

    return t1.pass && t2.pass ? 0 : 1;
}

void cmd_simulate(ExperimentConfig config, const CommandIo& io) {
    apply_seed_override(config, io);
    config.require_known({
        "seed",
        "simulate.levels",
        "simulate.samples",
        "simulate.iterations",
        "simulate.lambda",
        "simulate.latent_dim",
        "simulate.rows",
        "simulate.cols",
    });
    fs::path dir = prepare_out_dir(config, io);

    std::uint64_t seed = config.get_u64("seed", 0);
    std::vector<double> levels = config.get_double_list("simulate.levels", {-1.0, -0.5, 0.0, 0.5, 1.0});
    std::size_t samples = config.get_size("simulate.samples", io.full ? 100 : 20);

    ManifoldSpec spec;
    spec.latent_dim = config.get_size("simulate.latent_dim", 2);
    spec.image_shape = {config.get_size("simulate.rows", 16), config.get_size("simulate.cols", 16)};
    spec.seed = derive_seed(seed, 1);
    GeneratorModel model = make_affine_generator(spec, spec.seed);

    SolverConfig base;
    base.iterations = config.get_size("simulate.iterations", 1000);
    base.lambda = config.get_double("simulate.lambda", 0.1);

    std::ostringstream csv;
    csv << "e,method,rmse\n";
    const char* methods[] = {"l2", "l1", "rgi"};
    for (double e : levels) {
        std::vector<Tensor> clean_list;
        std::vector<CorruptedSample> sample_list;
        for (std::size_t i = 0; i < samples; ++i) {
            auto [z_star, clean] = sample_clean(model, derive_seed(seed, 1000 + i));
            CorruptionSpec cs;
            cs.mechanism = Mechanism::central_block;
            cs.block_size = spec.image_shape[0] / 2;
            cs.fill = Fill::normal;
            cs.mean_level = e;
            cs.seed = derive_seed(seed, 2000 + i);
            sample_list.push_back(corrupt(clean, z_star, cs));
            clean_list.push_back(clean);
        }
        for (const char* method : methods) {
            std::vector<Tensor> restored;
            restored.reserve(samples);
            for (std::size_t i = 0; i < samples; ++i) {
                SolverConfig sc = base;
                sc.seed = derive_seed(seed, 3000 + i);
                if (std::string(method) == "l2") {
                    sc.loss = Loss::l2;
                    restored.push_back(invert_baseline(model, sample_list[i].x, sc).restored);
                } else if (std::string(method) == "l1") {
                    sc.loss = Loss::l1;
                    restored.push_back(invert_baseline(model, sample_list[i].x, sc).restored);
                } else {
                    sc.loss = Loss::l2;
                    restored.push_back(solve_rgi(model, sample_list[i].x, sc).restored);
                }
            }
            csv << format_float(e) << "," << method << "," << format_float(rmse(restored, clean_list))
                << "\n";
        }
    }
    write_text(dir / "simulation.csv", csv.str());
}

void cmd_metrics(ExperimentConfig config, const CommandIo& io) {
    apply_seed_override(config, io);
    config.require_known({
        "seed",
        "metrics.restored",
        "metrics.clean",
        "metrics.pred_mask",
        "metrics.true_mask",
        "metrics.scores",
        "metrics.list",
    });
    fs::path dir = prepare_out_dir(config, io);

    auto load_opt = [&](const char* key) -> std::optional<Tensor> {
        if (!config.has(key)) return std::nullopt;
        return load_tensor(config.get(key));
    };
    std::optional<Tensor> restored = load_opt("metrics.restored");
    std::optional<Tensor> clean = load_opt("metrics.clean");
    std::optional<Tensor> pred_mask = load_opt("metrics.pred_mask");
    std::optional<Tensor> true_mask = load_opt("metrics.true_mask");
    std::optional<Tensor> scores = load_opt("metrics.scores");

    std::istringstream names(config.get_string("metrics.list", "psnr,ssim,rmse,dice"));
    MetricReport report;
    std::vector<double> row;
    std::string name;
    auto need = [&](const std::optional<Tensor>& t, const char* what) -> const Tensor& {
        if (!t) throw std::runtime_error(std::string("metrics: ") + name + " needs " + what);
        return *t;
    };
    while (std::getline(names, name, ',')) {
        double value = 0.0;
        if (name == "psnr") value = psnr(need(restored, "metrics.restored"), need(clean, "metrics.clean"));
        else if (name == "ssim") value = ssim(need(restored, "metrics.restored"), need(clean, "metrics.clean"));
        else if (name == "rmse") value = rmse({need(restored, "metrics.restored")}, {need(clean, "metrics.clean")});
        else if (name == "dice") value = dice(need(pred_mask, "metrics.pred_mask"), need(true_mask, "metrics.true_mask"));
        else if (name == "auroc") value = pixel_auroc(need(scores, "metrics.scores"), need(true_mask, "metrics.true_mask"));
        else if (name == "best_dice") value = best_threshold_dice(need(scores, "metrics.scores"), need(true_mask, "metrics.true_mask")).second;
        else throw std::runtime_error("metrics: unknown metric '" + name + "'");
        report.names.push_back(name);
        row.push_back(value);
    }
    report.add_row(std::move(row));
    std::ostringstream csv;
    report.write_csv(csv);
    write_text(dir / "metrics.csv", csv.str());
}

}  // namespace rgi
