#include "debinn/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "debinn/util.hpp"

namespace debinn {

const std::string* KeyValues::find(const std::string& key) const {
    for (const auto& [k, v] : items)
        if (k == key) return &v;
    return nullptr;
}

void KeyValues::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : items)
        if (k == key) {
            v = value;
            return;
        }
    items.emplace_back(key, value);
}

KeyValues parse_config_text(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        if (kv.has(key))
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": duplicate key '" + key + "'");
        kv.items.emplace_back(key, value);
    }
    return kv;
}

KeyValues load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string config_to_text(const KeyValues& kv) {
    std::ostringstream out;
    for (const auto& [k, v] : kv.items) out << k << " = " << v << '\n';
    return out.str();
}

const char* to_string(Optimizer o) { return o == Optimizer::GA ? "ga" : "gd"; }

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw std::invalid_argument("config: " + key + ": expected on/off, got '" + v + "'");
}

std::vector<std::string> parse_list(const std::string& v) {
    std::vector<std::string> out;
    for (auto& part : split(v, ',')) {
        part = trim(part);
        if (!part.empty()) out.push_back(part);
    }
    return out;
}

const std::vector<std::string> kGaKeys = {"population",     "generations", "tournament_k",
                                          "mutation_rate",  "mutation_scale", "elitism"};
const std::vector<std::string> kGdKeys = {"lr",         "epochs",
                                          "derivative_mode", "batch_size",
                                          "full_groupnorm_jacobian"};

// Hyperparameters a sweep may vary.
const std::vector<std::string> kSweepable = {
    "hidden",        "activation",     "mapping",       "sigma",
    "init",          "groupnorm",      "group_size",    "weight_standardization",
    "l1",            "l2",             "class_weights", "population",
    "generations",   "tournament_k",   "mutation_rate", "mutation_scale",
    "elitism",       "lr",             "epochs",        "derivative_mode",
    "batch_size"};

bool contains(const std::vector<std::string>& v, const std::string& k) {
    return std::find(v.begin(), v.end(), k) != v.end();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_kv(const KeyValues& kv) {
    ExperimentConfig c;
    std::vector<std::string> seen;
    for (const auto& [key, value] : kv.items) {
        seen.push_back(key);
        if (key.rfind("sweep.", 0) == 0) continue;  // handled by sweep_axes_from
        if (key == "name") c.name = value;
        else if (key == "dataset") c.dataset = value;
        else if (key == "train_csv") c.train_csv = value;
        else if (key == "test_csv") c.test_csv = value;
        else if (key == "label_column") c.label_column = value;
        else if (key == "class_names") c.class_names = parse_list(value);
        else if (key == "moons_train") c.moons_train = static_cast<std::size_t>(parse_int(value, key));
        else if (key == "moons_test") c.moons_test = static_cast<std::size_t>(parse_int(value, key));
        else if (key == "moons_noise") c.moons_noise = parse_double(value, key);
        else if (key == "moons_seed") c.moons_seed = static_cast<std::uint64_t>(parse_int(value, key));
        else if (key == "standardize") c.standardize_features = parse_bool(value, key);
        else if (key == "optimizer") {
            if (value == "ga") c.optimizer = Optimizer::GA;
            else if (value == "gd") c.optimizer = Optimizer::GD;
            else throw std::invalid_argument("config: optimizer must be ga or gd");
        } else if (key == "hidden") {
            c.spec.hidden_widths.clear();
            for (const auto& w : parse_list(value))
                c.spec.hidden_widths.push_back(static_cast<std::size_t>(parse_int(w, key)));
        } else if (key == "activation") {
            if (value == "sigmoid") c.spec.activation = ActivationKind::Sigmoid;
            else if (value == "tanh") c.spec.activation = ActivationKind::Tanh;
            else if (value == "relu") c.spec.activation = ActivationKind::ReLU;
            else throw std::invalid_argument("config: unknown activation '" + value + "'");
        } else if (key == "mapping") {
            if (value == "gaussian") c.spec.mapping.kind = MappingKind::Gaussian;
            else if (value == "inverse") c.spec.mapping.kind = MappingKind::Inverse;
            else throw std::invalid_argument("config: unknown mapping '" + value + "'");
        } else if (key == "sigma") c.spec.mapping.sigma = parse_double(value, key);
        else if (key == "init") {
            if (value == "random") c.spec.init = InitScheme::Random;
            else if (value == "onion") c.spec.init = InitScheme::Onion;
            else if (value == "singularity") c.spec.init = InitScheme::Singularity;
            else throw std::invalid_argument("config: unknown init '" + value + "'");
        } else if (key == "groupnorm") c.spec.groupnorm = parse_bool(value, key);
        else if (key == "group_size") c.spec.group_size = static_cast<std::size_t>(parse_int(value, key));
        else if (key == "weight_standardization") c.spec.weight_standardization = parse_bool(value, key);
        else if (key == "l1") c.spec.l1 = parse_double(value, key);
        else if (key == "l2") c.spec.l2 = parse_double(value, key);
        else if (key == "class_weights") {
            if (value == "uniform") c.uniform_weights = true;
            else if (value == "inverse-frequency") c.uniform_weights = false;
            else throw std::invalid_argument("config: class_weights must be uniform or inverse-frequency");
        } else if (key == "population") {
            c.ga.population = value == "auto" ? 0 : static_cast<std::size_t>(parse_int(value, key));
        } else if (key == "generations") c.ga.generations = static_cast<std::size_t>(parse_int(value, key));
        else if (key == "tournament_k") c.ga.tournament_k = static_cast<std::size_t>(parse_int(value, key));
        else if (key == "mutation_rate") c.ga.mutation_rate = parse_double(value, key);
        else if (key == "mutation_scale") c.ga.mutation_scale = parse_double(value, key);
        else if (key == "elitism") c.ga.elitism = static_cast<std::size_t>(parse_int(value, key));
        else if (key == "lr") c.gd.lr = parse_double(value, key);
        else if (key == "epochs") c.gd.epochs = static_cast<std::size_t>(parse_int(value, key));
        else if (key == "derivative_mode") {
            if (value == "exact") c.gd.derivative_mode = DerivativeMode::Exact;
            else if (value == "surrogate") c.gd.derivative_mode = DerivativeMode::LinearSurrogate;
            else throw std::invalid_argument("config: derivative_mode must be exact or surrogate");
        } else if (key == "batch_size") c.gd.batch_size = static_cast<std::size_t>(parse_int(value, key));
        else if (key == "full_groupnorm_jacobian") c.gd.full_groupnorm_jacobian = parse_bool(value, key);
        else if (key == "seeds") {
            c.seeds.clear();
            for (const auto& s : parse_list(value))
                c.seeds.push_back(static_cast<std::uint64_t>(parse_int(s, key)));
        } else if (key == "seed") {
            c.seeds = {static_cast<std::uint64_t>(parse_int(value, key))};
        } else if (key == "threads") c.threads = static_cast<std::size_t>(parse_int(value, key));
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }

    if (c.name.empty()) c.name = c.dataset;
    if (c.dataset != "two-moons" && c.dataset != "csv")
        throw std::invalid_argument("config: dataset must be two-moons or csv");
    if (c.dataset == "csv" && (c.train_csv.empty() || c.test_csv.empty()))
        throw std::invalid_argument("config: csv dataset needs train_csv and test_csv");
    if (c.seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");

    // Optimizer-specific options must not leak across.
    for (const auto& key : seen) {
        if (c.optimizer == Optimizer::GD && contains(kGaKeys, key))
            throw std::invalid_argument("config: '" + key + "' is a GA option but optimizer = gd");
        if (c.optimizer == Optimizer::GA && contains(kGdKeys, key))
            throw std::invalid_argument("config: '" + key + "' is a GD option but optimizer = ga");
    }
    if (c.optimizer == Optimizer::GD && c.spec.init == InitScheme::Singularity)
        throw std::invalid_argument("config: singularity init is GA-only");

    c.ga.threads = c.threads;
    return c;
}

KeyValues ExperimentConfig::to_kv() const {
    KeyValues kv;
    kv.set("name", name);
    kv.set("dataset", dataset);
    if (dataset == "csv") {
        kv.set("train_csv", train_csv);
        kv.set("test_csv", test_csv);
        kv.set("label_column", label_column);
        if (!class_names.empty()) {
            std::string joined;
            for (const auto& n : class_names) joined += (joined.empty() ? "" : ",") + n;
            kv.set("class_names", joined);
        }
    } else {
        kv.set("moons_train", std::to_string(moons_train));
        kv.set("moons_test", std::to_string(moons_test));
        kv.set("moons_noise", fmt_double(moons_noise));
        kv.set("moons_seed", std::to_string(moons_seed));
    }
    kv.set("standardize", standardize_features ? "on" : "off");
    kv.set("optimizer", to_string(optimizer));
    std::string hidden;
    for (auto w : spec.hidden_widths) hidden += (hidden.empty() ? "" : ",") + std::to_string(w);
    kv.set("hidden", hidden);
    kv.set("activation", to_string(spec.activation));
    kv.set("mapping", to_string(spec.mapping.kind));
    if (spec.mapping.kind == MappingKind::Gaussian) kv.set("sigma", fmt_double(spec.mapping.sigma));
    kv.set("init", to_string(spec.init));
    kv.set("groupnorm", spec.groupnorm ? "on" : "off");
    if (spec.group_size > 0) kv.set("group_size", std::to_string(spec.group_size));
    kv.set("weight_standardization", spec.weight_standardization ? "on" : "off");
    kv.set("l1", fmt_double(spec.l1));
    kv.set("l2", fmt_double(spec.l2));
    kv.set("class_weights", uniform_weights ? "uniform" : "inverse-frequency");
    if (optimizer == Optimizer::GA) {
        kv.set("population", ga.population == 0 ? "auto" : std::to_string(ga.population));
        kv.set("generations", std::to_string(ga.generations));
        kv.set("tournament_k", std::to_string(ga.tournament_k));
        kv.set("mutation_rate", fmt_double(ga.mutation_rate));
        kv.set("mutation_scale", fmt_double(ga.mutation_scale));
        kv.set("elitism", std::to_string(ga.elitism));
    } else {
        kv.set("lr", fmt_double(gd.lr));
        kv.set("epochs", std::to_string(gd.epochs));
        kv.set("derivative_mode", to_string(gd.derivative_mode));
        if (gd.batch_size > 0) kv.set("batch_size", std::to_string(gd.batch_size));
        if (gd.full_groupnorm_jacobian) kv.set("full_groupnorm_jacobian", "on");
    }
    std::string s;
    for (auto v : seeds) s += (s.empty() ? "" : ",") + std::to_string(v);
    kv.set("seeds", s);
    if (threads > 0) kv.set("threads", std::to_string(threads));
    return kv;
}

std::size_t SweepAxes::grid_size() const {
    std::size_t n = 1;
    for (const auto& [k, vals] : axes) n *= vals.size();
    return n;
}

SweepAxes sweep_axes_from(const KeyValues& kv) {
    SweepAxes out;
    for (const auto& [key, value] : kv.items) {
        if (key.rfind("sweep.", 0) != 0) continue;
        const std::string target = key.substr(6);
        if (!contains(kSweepable, target))
            throw std::invalid_argument("config: '" + target + "' is not sweepable");
        std::vector<std::string> values;
        for (auto& part : split(value, '|')) {
            part = trim(part);
            if (!part.empty()) values.push_back(part);
        }
        if (values.empty())
            throw std::invalid_argument("config: sweep axis '" + target + "' has no values");
        out.axes.emplace_back(target, values);
    }
    return out;
}

std::vector<KeyValues> expand_grid(const KeyValues& base, const SweepAxes& axes) {
    KeyValues stripped;
    for (const auto& [k, v] : base.items)
        if (k.rfind("sweep.", 0) != 0) stripped.items.emplace_back(k, v);

    std::vector<KeyValues> out;
    const std::size_t total = axes.grid_size();
    out.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        KeyValues point = stripped;
        std::size_t rem = idx;
        // First axis outermost: compute mixed-radix digits from the right.
        std::vector<std::size_t> digit(axes.axes.size(), 0);
        for (std::size_t a = axes.axes.size(); a-- > 0;) {
            digit[a] = rem % axes.axes[a].second.size();
            rem /= axes.axes[a].second.size();
        }
        for (std::size_t a = 0; a < axes.axes.size(); ++a)
            point.set(axes.axes[a].first, axes.axes[a].second[digit[a]]);
        out.push_back(std::move(point));
    }
    return out;
}

}  // namespace debinn
