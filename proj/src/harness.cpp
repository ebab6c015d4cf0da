#include "debinn/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "debinn/forward.hpp"
#include "debinn/ga.hpp"
#include "debinn/gd.hpp"
#include "debinn/util.hpp"

namespace fs = std::filesystem;

namespace debinn {

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

LoadedData load_experiment_data(const ExperimentConfig& c) {
    LoadedData data;
    if (c.dataset == "two-moons") {
        auto moons = gen_two_moons(c.moons_train, c.moons_test, c.moons_noise, c.moons_seed);
        data.train = std::move(moons.train);
        data.test = std::move(moons.test);
    } else {
        data.train = load_csv(c.train_csv, c.label_column, c.class_names);
        data.test = load_csv(c.test_csv, c.label_column, c.class_names);
        data.train.split = "train";
        data.test.split = "test";
        if (data.train.classes != data.test.classes)
            throw std::invalid_argument("data: train/test class sets differ");
        if (c.standardize_features) {
            auto params = standardize(data.train, &data.test);
            for (const auto& w : params.warnings) std::cerr << "warning: " << w << '\n';
        }
    }
    const auto counts = class_counts(data.train);
    for (std::size_t cls = 0; cls < counts.size(); ++cls)
        if (counts[cls] == 0)
            throw std::invalid_argument("data: class " + std::to_string(cls) +
                                        " absent from the training split");
    return data;
}

NetworkSpec resolve_spec(const ExperimentConfig& c, const LoadedData& data) {
    NetworkSpec spec = c.spec;
    spec.input_dim = data.train.cols;
    spec.output_dim = static_cast<std::size_t>(data.train.classes);
    spec.validate();
    return spec;
}

namespace {

Curve curve_from(const std::vector<GARow>& rows) {
    Curve c;
    c.columns = {"generation", "best_fitness", "mean_fitness", "train_bacc", "test_bacc"};
    for (const auto& r : rows)
        c.rows.push_back({static_cast<double>(r.generation), r.best_fitness, r.mean_fitness,
                          r.train_bacc, r.test_bacc});
    return c;
}

Curve curve_from(const std::vector<GDRow>& rows) {
    Curve c;
    c.columns = {"epoch", "phase", "train_loss", "train_bacc", "test_bacc"};
    for (const auto& r : rows)
        c.rows.push_back({static_cast<double>(r.epoch), static_cast<double>(r.phase),
                          r.train_loss, r.train_bacc, r.test_bacc});
    return c;
}

std::string curve_to_csv(const Curve& c) {
    std::ostringstream out;
    for (std::size_t i = 0; i < c.columns.size(); ++i)
        out << (i ? "," : "") << c.columns[i];
    out << '\n';
    for (const auto& row : c.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt_double(row[i]);
        out << '\n';
    }
    return out.str();
}

Curve curve_from_csv(const std::string& text) {
    Curve c;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (header) {
            c.columns = fields;
            header = false;
            continue;
        }
        std::vector<double> row;
        for (const auto& f : fields) row.push_back(parse_double(f, "curve"));
        c.rows.push_back(std::move(row));
    }
    return c;
}

std::string metrics_to_csv(const RunRecord& r) {
    std::ostringstream out;
    out << "metric,value\n";
    out << "order," << r.order << '\n';
    out << "seed," << r.seed << '\n';
    out << "status," << r.status << '\n';
    if (r.status != "failed") {
        out << "train_bacc," << fmt_double(r.train_bacc) << '\n';
        out << "test_bacc," << fmt_double(r.test_bacc) << '\n';
        out << "test_se," << fmt_double(r.test_se) << '\n';
        out << "test_sp," << fmt_double(r.test_sp) << '\n';
        out << "objective," << fmt_double(r.objective) << '\n';
    }
    return out.str();
}

void persist_record(RunRecord& r, const std::string& out_dir, const NetworkGeometry* geom,
                    const std::vector<std::string>& class_names) {
    if (out_dir.empty()) return;
    const fs::path dir = fs::path(out_dir) / r.run_id;
    fs::create_directories(dir);
    r.dir = dir.string();
    write_text_file((dir / "config.txt").string(), config_to_text(r.config));
    write_text_file((dir / "metrics.csv").string(), metrics_to_csv(r));
    if (!r.curve.rows.empty())
        write_text_file((dir / "curve.csv").string(), curve_to_csv(r.curve));
    if (geom) write_text_file((dir / "geometry.csv").string(), geometry_to_csv(*geom));
    if (r.cm_test.classes > 0)
        write_text_file((dir / "cm_test.csv").string(), confusion_to_csv(r.cm_test, class_names));
    if (!r.error.empty()) write_text_file((dir / "error.txt").string(), r.error + "\n");
    write_text_file((dir / "meta.txt").string(),
                    "duration_s = " + fmt_double(r.duration_s) + "\n");
}

}  // namespace

RunRecord run_single(const ExperimentConfig& c, std::uint64_t seed, const std::string& out_dir,
                     const std::string& run_id, std::size_t order) {
    RunRecord rec;
    rec.run_id = run_id;
    rec.seed = seed;
    rec.order = order;
    ExperimentConfig cfg = c;
    cfg.seeds = {seed};
    rec.config = cfg.to_kv();

    const auto start = std::chrono::steady_clock::now();
    NetworkGeometry final_geom;
    bool have_geom = false;
    std::vector<std::string> class_names = c.class_names;
    try {
        const auto data = load_experiment_data(cfg);
        const auto spec = resolve_spec(cfg, data);
        const auto beta = cfg.uniform_weights
                              ? uniform_class_weights(static_cast<std::size_t>(data.train.classes))
                              : class_weights_from_counts(class_counts(data.train));

        if (cfg.optimizer == Optimizer::GA) {
            GAConfig ga = cfg.ga;
            ga.seed = seed;
            auto res = train_ga(spec, data.train, data.test, ga, beta);
            final_geom = std::move(res.best);
            rec.objective = res.best_fitness;
            rec.curve = curve_from(res.history);
        } else {
            GDConfig gd = cfg.gd;
            gd.seed = seed;
            auto res = train_gd(spec, data.train, data.test, gd, beta);
            final_geom = std::move(res.geometry);
            rec.objective = res.final_loss;
            rec.curve = curve_from(res.history);
            if (res.status == GDStatus::Diverged) rec.status = "diverged";
        }
        have_geom = true;

        const auto linears = network_linears(final_geom);
        const auto train_eval = evaluate_batch(final_geom, linears, data.train, beta);
        const auto test_eval = evaluate_batch(final_geom, linears, data.test, beta);
        rec.train_bacc =
            balanced_accuracy(confusion(data.train.y, train_eval.predictions, data.train.classes));
        rec.cm_test = confusion(data.test.y, test_eval.predictions, data.test.classes);
        rec.test_bacc = balanced_accuracy(rec.cm_test);
        const auto sesp = sensitivity_specificity(rec.cm_test);
        rec.test_se = sesp.se;
        rec.test_sp = sesp.sp;
    } catch (const std::exception& e) {
        rec.status = "failed";
        rec.error = e.what();
    }
    rec.duration_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    persist_record(rec, out_dir, have_geom ? &final_geom : nullptr, class_names);
    return rec;
}

namespace {

std::string grid_run_id(std::size_t grid_index, std::uint64_t seed) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "g%04zu_s%llu", grid_index,
                  static_cast<unsigned long long>(seed));
    return buf;
}

RunRecord load_record_dir(const fs::path& dir) {
    RunRecord rec;
    rec.run_id = dir.filename().string();
    rec.dir = dir.string();
    rec.config = parse_config_text(read_text_file((dir / "config.txt").string()));
    std::istringstream in(read_text_file((dir / "metrics.csv").string()));
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || header) {
            header = false;
            continue;
        }
        const auto comma = line.find(',');
        const std::string key = line.substr(0, comma);
        const std::string value = line.substr(comma + 1);
        if (key == "order") rec.order = static_cast<std::size_t>(parse_int(value, key));
        else if (key == "seed") rec.seed = static_cast<std::uint64_t>(parse_int(value, key));
        else if (key == "status") rec.status = value;
        else if (key == "train_bacc") rec.train_bacc = parse_double(value, key);
        else if (key == "test_bacc") rec.test_bacc = parse_double(value, key);
        else if (key == "test_se") rec.test_se = parse_double(value, key);
        else if (key == "test_sp") rec.test_sp = parse_double(value, key);
        else if (key == "objective") rec.objective = parse_double(value, key);
    }
    if (fs::exists(dir / "curve.csv"))
        rec.curve = curve_from_csv(read_text_file((dir / "curve.csv").string()));
    return rec;
}

}  // namespace

SweepResult run_sweep(const KeyValues& base_config, const std::string& out_dir) {
    const auto axes = sweep_axes_from(base_config);
    const auto points = expand_grid(base_config, axes);

    // Seeds and threads are sweep-independent; read them without running the
    // full config validation (individual grid points may be invalid and must
    // fail as runs, not abort the sweep).
    std::vector<std::uint64_t> seeds{1};
    if (const auto* s = base_config.find("seeds"); s || base_config.find("seed")) {
        if (!s) s = base_config.find("seed");
        seeds.clear();
        for (auto part : split(*s, ',')) {
            part = trim(part);
            if (!part.empty()) seeds.push_back(static_cast<std::uint64_t>(parse_int(part, "seeds")));
        }
        if (seeds.empty()) throw std::invalid_argument("sweep: seeds must be nonempty");
    }
    std::size_t threads = 0;
    if (const auto* t = base_config.find("threads"))
        threads = static_cast<std::size_t>(parse_int(*t, "threads"));

    const std::size_t total_runs = points.size() * seeds.size();
    if (total_runs > 10000)
        throw std::invalid_argument("sweep: grid of " + std::to_string(total_runs) +
                                    " runs exceeds the 10000-run guard");

    struct Job {
        KeyValues point;
        std::uint64_t seed;
        std::string run_id;
        std::size_t order;
        bool resumed = false;
    };
    std::vector<Job> jobs;
    std::size_t order = 0;
    for (std::size_t gi = 0; gi < points.size(); ++gi) {
        for (const auto seed : seeds) {
            Job j{points[gi], seed, grid_run_id(gi, seed), order++, false};
            j.resumed = !out_dir.empty() &&
                        fs::exists(fs::path(out_dir) / j.run_id / "metrics.csv");
            jobs.push_back(std::move(j));
        }
    }

    SweepResult result;
    result.records.resize(jobs.size());
    const bool pool = jobs.size() > 1;
    parallel_for(jobs.size(), threads, [&](std::size_t i) {
        const Job& job = jobs[i];
        if (job.resumed) {
            result.records[i] = load_record_dir(fs::path(out_dir) / job.run_id);
            return;
        }
        ExperimentConfig cfg;
        try {
            cfg = ExperimentConfig::from_kv(job.point);
        } catch (const std::exception& e) {
            RunRecord rec;
            rec.run_id = job.run_id;
            rec.seed = job.seed;
            rec.order = job.order;
            rec.status = "failed";
            rec.error = e.what();
            rec.config = job.point;
            persist_record(rec, out_dir, nullptr, {});
            result.records[i] = std::move(rec);
            return;
        }
        if (pool) {
            cfg.threads = 1;  // one worker per run; no nested pools
            cfg.ga.threads = 1;
        }
        result.records[i] = run_single(cfg, job.seed, out_dir, job.run_id, job.order);
    });
    for (const auto& j : jobs) result.resumed += j.resumed ? 1 : 0;
    return result;
}

std::vector<RunRecord> load_records(const std::string& out_dir) {
    std::vector<RunRecord> records;
    if (!fs::exists(out_dir)) return records;
    for (const auto& entry : fs::directory_iterator(out_dir)) {
        if (!entry.is_directory()) continue;
        if (!fs::exists(entry.path() / "config.txt")) continue;
        records.push_back(load_record_dir(entry.path()));
    }
    std::sort(records.begin(), records.end(),
              [](const RunRecord& a, const RunRecord& b) { return a.order < b.order; });
    return records;
}

Bounds2D data_bounds(const Dataset& d, double pad_fraction) {
    if (d.cols != 2) throw std::invalid_argument("data_bounds: dataset is not 2D");
    Bounds2D b{d.x[0], d.x[0], d.x[1], d.x[1]};
    for (std::size_t r = 0; r < d.rows; ++r) {
        b.xmin = std::min(b.xmin, d.x[2 * r]);
        b.xmax = std::max(b.xmax, d.x[2 * r]);
        b.ymin = std::min(b.ymin, d.x[2 * r + 1]);
        b.ymax = std::max(b.ymax, d.x[2 * r + 1]);
    }
    const double px = (b.xmax - b.xmin) * pad_fraction;
    const double py = (b.ymax - b.ymin) * pad_fraction;
    return {b.xmin - px, b.xmax + px, b.ymin - py, b.ymax + py};
}

LabelGrid model_decision_grid(const NetworkGeometry& g, const Bounds2D& bounds,
                              std::size_t resolution) {
    if (g.spec.input_dim != 2)
        throw std::invalid_argument("model_decision_grid: input_dim must be 2");
    const auto linears = network_linears(g);
    return decision_grid(
        [&](double x, double y) {
            const std::vector<double> input{x, y};
            return static_cast<int>(argmax_index(forward_with(g, linears, input).probs));
        },
        bounds, resolution);
}

LabelGrid two_moons_truth_grid(const Bounds2D& bounds, std::size_t resolution) {
    return decision_grid([](double x, double y) { return two_moons_true_class(x, y); }, bounds,
                         resolution);
}

namespace {

struct Group {
    std::string name;
    Optimizer optimizer = Optimizer::GA;
    std::vector<const RunRecord*> runs;  // with usable metrics
    std::size_t failed = 0;
};

std::string csv_escape(const std::string& s) { return s; }

}  // namespace

void write_report(const std::string& runs_dir, const std::string& report_dir) {
    const auto records = load_records(runs_dir);
    if (records.empty()) throw std::invalid_argument("report: no runs found in " + runs_dir);
    fs::create_directories(report_dir);

    std::map<std::string, Group> groups;  // key: name + '\n' + optimizer
    for (const auto& r : records) {
        const auto cfg = ExperimentConfig::from_kv(r.config);
        const std::string key = cfg.name + "\n" + to_string(cfg.optimizer);
        auto& g = groups[key];
        g.name = cfg.name;
        g.optimizer = cfg.optimizer;
        if (r.status == "failed")
            g.failed++;
        else
            g.runs.push_back(&r);
    }

    // Best-run table (Table 2 shape) and decision grids for 2D datasets.
    std::ostringstream best;
    best << "dataset,optimizer,run_id,test_bacc,test_se,test_sp,train_bacc,misclassified_area\n";
    for (auto& [key, g] : groups) {
        if (g.runs.empty()) {
            std::cerr << "warning: group " << g.name << "/" << to_string(g.optimizer)
                      << " has no usable runs, skipped\n";
            continue;
        }
        const RunRecord* top = g.runs.front();
        for (const auto* r : g.runs)
            if (r->test_bacc > top->test_bacc ||
                (r->test_bacc == top->test_bacc && r->order < top->order))
                top = r;

        std::string misclassified = "";
        const auto cfg = ExperimentConfig::from_kv(top->config);
        if (!top->dir.empty() && fs::exists(fs::path(top->dir) / "geometry.csv")) {
            try {
                const auto data = load_experiment_data(cfg);
                if (data.train.cols == 2) {
                    auto spec = resolve_spec(cfg, data);
                    const auto geom = geometry_from_csv(
                        read_text_file((fs::path(top->dir) / "geometry.csv").string()), spec);
                    const auto bounds = data_bounds(data.train);
                    const auto grid = model_decision_grid(geom, bounds, 200);
                    const std::string grid_name =
                        "grid_" + g.name + "_" + to_string(g.optimizer) + ".csv";
                    write_text_file((fs::path(report_dir) / grid_name).string(),
                                    grid_to_csv(grid));
                    if (cfg.dataset == "two-moons") {
                        const auto truth = two_moons_truth_grid(bounds, 200);
                        misclassified = fmt_double(misclassified_area_fraction(grid, truth));
                    }
                }
            } catch (const std::exception& e) {
                std::cerr << "warning: grid for " << g.name << "/" << to_string(g.optimizer)
                          << " failed: " << e.what() << '\n';
            }
        }
        best << csv_escape(g.name) << ',' << to_string(g.optimizer) << ',' << top->run_id << ','
             << fmt_double(top->test_bacc) << ',' << fmt_double(top->test_se) << ','
             << fmt_double(top->test_sp) << ',' << fmt_double(top->train_bacc) << ','
             << misclassified << '\n';
    }
    write_text_file((fs::path(report_dir) / "best_runs.csv").string(), best.str());

    // Sweep statistics (Table 3 shape) with the GA-vs-GD Mann-Whitney p.
    std::ostringstream stats;
    stats << "dataset,optimizer,n_runs,n_failed,mean,std,median,min,max,p_value\n";
    for (auto& [key, g] : groups) {
        if (g.runs.empty()) continue;
        std::vector<double> baccs;
        for (const auto* r : g.runs) baccs.push_back(r->test_bacc);
        const auto s = sweep_stats(baccs);

        std::string p = "";
        const std::string other_key =
            g.name + "\n" + (g.optimizer == Optimizer::GA ? "gd" : "ga");
        auto it = groups.find(other_key);
        if (it != groups.end() && !it->second.runs.empty()) {
            std::vector<double> others;
            for (const auto* r : it->second.runs) others.push_back(r->test_bacc);
            p = fmt_double(g.optimizer == Optimizer::GA ? mann_whitney_u(baccs, others).p
                                                        : mann_whitney_u(others, baccs).p);
        }
        stats << csv_escape(g.name) << ',' << to_string(g.optimizer) << ',' << g.runs.size()
              << ',' << g.failed << ',' << fmt_double(s.mean) << ',' << fmt_double(s.stddev)
              << ',' << fmt_double(s.median) << ',' << fmt_double(s.min) << ','
              << fmt_double(s.max) << ',' << p << '\n';
    }
    write_text_file((fs::path(report_dir) / "sweep_stats.csv").string(), stats.str());

    // Combined per-epoch curves (Figure 7 shape), one file per optimizer.
    std::ostringstream ga_curves, gd_curves;
    ga_curves << "dataset,run_id,generation,best_fitness,mean_fitness,train_bacc,test_bacc\n";
    gd_curves << "dataset,run_id,epoch,phase,train_loss,train_bacc,test_bacc\n";
    for (const auto& r : records) {
        if (r.status == "failed" || r.curve.rows.empty()) continue;
        const auto cfg = ExperimentConfig::from_kv(r.config);
        auto& out = cfg.optimizer == Optimizer::GA ? ga_curves : gd_curves;
        for (const auto& row : r.curve.rows) {
            out << csv_escape(cfg.name) << ',' << r.run_id;
            for (double v : row) out << ',' << fmt_double(v);
            out << '\n';
        }
    }
    write_text_file((fs::path(report_dir) / "curves_ga.csv").string(), ga_curves.str());
    write_text_file((fs::path(report_dir) / "curves_gd.csv").string(), gd_curves.str());
}

}  // namespace debinn
