// Command-line front end: dataset generation, single runs, sweeps, reports,
// decision grids, and the finite-difference gradient check.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "debinn/harness.hpp"

using namespace debinn;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRunFailure = 2;

KeyValues load_with_overrides(const std::string& config_path, const std::string& optimizer,
                              const std::string& dataset, const std::string& seed) {
    KeyValues kv = config_path.empty() ? KeyValues{} : load_config(config_path);
    if (!optimizer.empty()) kv.set("optimizer", optimizer);
    if (!dataset.empty()) kv.set("dataset", dataset);
    if (!seed.empty()) kv.set("seeds", seed);
    return kv;
}

void print_record(const RunRecord& rec) {
    std::printf("run %s: status=%s", rec.run_id.c_str(), rec.status.c_str());
    if (rec.status != "failed") {
        std::printf(" test_bacc=%.4f test_se=%.4f test_sp=%.4f train_bacc=%.4f objective=%.6g",
                    rec.test_bacc, rec.test_se, rec.test_sp, rec.train_bacc, rec.objective);
    }
    std::printf(" duration=%.2fs\n", rec.duration_s);
    if (!rec.error.empty()) std::printf("  error: %s\n", rec.error.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DEBI-NN: distance-encoded neural networks trained by GA or spatial GD"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Generate the two-moons CSV pair");
    std::string gen_dir = ".";
    std::size_t gen_train = 800, gen_test = 200;
    double gen_noise = 0.1;
    std::uint64_t gen_seed = 1;
    gen->add_option("--out-dir", gen_dir, "Output directory");
    gen->add_option("--n-train", gen_train, "Training samples");
    gen->add_option("--n-test", gen_test, "Test samples");
    gen->add_option("--noise", gen_noise, "Gaussian coordinate noise");
    gen->add_option("--seed", gen_seed, "Generator seed");

    // train
    auto* train = app.add_subcommand("train", "Train a single run from a config");
    std::string tr_config, tr_out, tr_optimizer, tr_dataset, tr_seed;
    train->add_option("--config", tr_config, "Config file")->required();
    train->add_option("--out-dir", tr_out, "Persist the run into this directory");
    train->add_option("--optimizer", tr_optimizer, "Override: ga or gd");
    train->add_option("--dataset", tr_dataset, "Override: two-moons or csv");
    train->add_option("--seed", tr_seed, "Override the config seed");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run the config's sweep grid");
    std::string sw_config, sw_out, sw_optimizer, sw_dataset, sw_seed;
    sweep->add_option("--config", sw_config, "Config file with sweep.* axes")->required();
    sweep->add_option("--out-dir", sw_out, "Run directory root")->required();
    sweep->add_option("--optimizer", sw_optimizer, "Override: ga or gd");
    sweep->add_option("--dataset", sw_dataset, "Override: two-moons or csv");
    sweep->add_option("--seed", sw_seed, "Override the seeds list");

    // report
    auto* report = app.add_subcommand("report", "Aggregate runs into report tables");
    std::string rp_runs, rp_out;
    report->add_option("--out-dir", rp_runs, "Directory holding run subdirectories")->required();
    report->add_option("--report-dir", rp_out, "Report output directory (default <out-dir>/report)");

    // grid
    auto* grid = app.add_subcommand("grid", "Rasterize a trained run's decision boundary");
    std::string gr_run, gr_out;
    std::size_t gr_res = 200;
    grid->add_option("--run-dir", gr_run, "Run directory with config.txt and geometry.csv")
        ->required();
    grid->add_option("--out", gr_out, "Output CSV (default <run-dir>/grid.csv)");
    grid->add_option("--resolution", gr_res, "Grid resolution per axis");

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the spatial gradients");
    std::string gc_hidden = "4,4", gc_mapping = "gaussian", gc_activation = "sigmoid",
                gc_mode = "exact";
    bool gc_groupnorm = true, gc_ws = false;
    std::uint64_t gc_seed = 1;
    std::size_t gc_samples = 12;
    double gc_eps = 1e-5, gc_tol = 1e-4;
    gc->add_option("--hidden", gc_hidden, "Hidden widths, e.g. 4,4");
    gc->add_option("--mapping", gc_mapping, "gaussian or inverse");
    gc->add_option("--activation", gc_activation, "sigmoid, tanh, or relu");
    gc->add_option("--mode", gc_mode, "Derivative mode: exact or surrogate");
    gc->add_flag("--groupnorm,!--no-groupnorm", gc_groupnorm, "GroupNorm on/off");
    gc->add_flag("--weight-standardization", gc_ws, "Weight standardization on");
    gc->add_option("--seed", gc_seed, "Geometry/batch seed");
    gc->add_option("--samples", gc_samples, "Batch size");
    gc->add_option("--eps", gc_eps, "Finite-difference step");
    gc->add_option("--tolerance", gc_tol, "Max relative error accepted");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen) {
            fs::create_directories(gen_dir);
            auto moons = gen_two_moons(gen_train, gen_test, gen_noise, gen_seed);
            const auto train_path = (fs::path(gen_dir) / "two_moons_train.csv").string();
            const auto test_path = (fs::path(gen_dir) / "two_moons_test.csv").string();
            save_csv(moons.train, train_path, "label", {"class1", "class2"});
            save_csv(moons.test, test_path, "label", {"class1", "class2"});
            std::printf("wrote %s (%zu rows) and %s (%zu rows)\n", train_path.c_str(),
                        moons.train.rows, test_path.c_str(), moons.test.rows);
            return kExitOk;
        }
        if (*train) {
            const auto kv = load_with_overrides(tr_config, tr_optimizer, tr_dataset, tr_seed);
            const auto cfg = ExperimentConfig::from_kv(kv);
            int worst = kExitOk;
            for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
                const auto rec = run_single(cfg, cfg.seeds[i], tr_out,
                                            "run_s" + std::to_string(cfg.seeds[i]), i);
                print_record(rec);
                if (rec.status == "failed") worst = kExitRunFailure;
            }
            return worst;
        }
        if (*sweep) {
            const auto kv = load_with_overrides(sw_config, sw_optimizer, sw_dataset, sw_seed);
            const auto result = run_sweep(kv, sw_out);
            std::size_t ok = 0, diverged = 0, failed = 0;
            for (const auto& r : result.records) {
                if (r.status == "ok") ++ok;
                else if (r.status == "diverged") ++diverged;
                else ++failed;
            }
            std::printf("sweep: %zu runs (%zu resumed): %zu ok, %zu diverged, %zu failed\n",
                        result.records.size(), result.resumed, ok, diverged, failed);
            for (const auto& r : result.records) print_record(r);
            return failed == result.records.size() ? kExitRunFailure : kExitOk;
        }
        if (*report) {
            if (rp_out.empty()) rp_out = (fs::path(rp_runs) / "report").string();
            write_report(rp_runs, rp_out);
            std::printf("report written to %s\n", rp_out.c_str());
            return kExitOk;
        }
        if (*grid) {
            const auto cfg = ExperimentConfig::from_kv(
                load_config((fs::path(gr_run) / "config.txt").string()));
            const auto data = load_experiment_data(cfg);
            const auto spec = resolve_spec(cfg, data);
            const auto geom = geometry_from_csv(
                read_text_file((fs::path(gr_run) / "geometry.csv").string()), spec);
            const auto bounds = data_bounds(data.train);
            const auto g = model_decision_grid(geom, bounds, gr_res);
            if (gr_out.empty()) gr_out = (fs::path(gr_run) / "grid.csv").string();
            write_text_file(gr_out, grid_to_csv(g));
            std::printf("grid written to %s\n", gr_out.c_str());
            if (cfg.dataset == "two-moons") {
                const auto truth = two_moons_truth_grid(bounds, gr_res);
                std::printf("misclassified area fraction: %.4f\n",
                            misclassified_area_fraction(g, truth));
            }
            return kExitOk;
        }
        if (*gc) {
            KeyValues kv;
            kv.set("dataset", "two-moons");
            kv.set("moons_train", std::to_string(gc_samples));
            kv.set("moons_test", "10");
            kv.set("moons_seed", std::to_string(gc_seed));
            kv.set("hidden", gc_hidden);
            kv.set("mapping", gc_mapping);
            kv.set("activation", gc_activation);
            kv.set("groupnorm", gc_groupnorm ? "on" : "off");
            kv.set("weight_standardization", gc_ws ? "on" : "off");
            const auto cfg = ExperimentConfig::from_kv(kv);
            const auto data = load_experiment_data(cfg);
            const auto spec = resolve_spec(cfg, data);
            const auto geom = init_geometry(spec, InitScheme::Random, gc_seed);
            const auto beta = class_weights_from_counts(class_counts(data.train));
            const auto mode =
                gc_mode == "exact" ? DerivativeMode::Exact : DerivativeMode::LinearSurrogate;
            const auto res = finite_difference_oracle(geom, data.train, beta, mode, gc_eps);
            std::printf("gradcheck: %zu coordinates, max relative error %.3e, max absolute %.3e\n",
                        res.coordinates, res.max_rel_err, res.max_abs_err);
            return res.max_rel_err < gc_tol ? kExitOk : kExitRunFailure;
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRunFailure;
    }
    return kExitUsage;
}
