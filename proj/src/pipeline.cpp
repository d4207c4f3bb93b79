#include "mlas/pipeline.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mlas/gradcheck.hpp"
#include "mlas/serialize.hpp"

namespace mlas {

using nlohmann::json;

namespace {

constexpr std::uint64_t kSaltModelInit = 0x4D4F44454CULL;

std::size_t parse_size(const std::string& v, const std::string& key) {
    try {
        long long x = std::stoll(v);
        if (x < 0) throw ConfigError(key + " must be non-negative");
        return static_cast<std::size_t>(x);
    } catch (const std::logic_error&) {
        throw ConfigError("cannot parse '" + v + "' as an integer for " + key);
    }
}

double parse_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::logic_error&) {
        throw ConfigError("cannot parse '" + v + "' as a number for " + key);
    }
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("cannot parse '" + v + "' as a boolean for " + key);
}

std::vector<std::size_t> parse_size_list(const std::string& v, const std::string& key) {
    std::vector<std::size_t> out;
    std::stringstream ss(v);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (!part.empty()) out.push_back(parse_size(part, key));
    }
    if (out.empty()) throw ConfigError(key + " needs at least one entry");
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

TrainingConfig RunConfig::training() const {
    TrainingConfig t;
    t.margin = margin;
    t.learning_rate = learning_rate;
    t.max_iterations = max_iterations;
    t.convergence_eps = convergence_eps;
    t.l2_lambda = l2_lambda;
    t.validation_fraction = validation_fraction;
    t.seed = seed;
    t.pretrain_omega_a = pretrain_omega_a;
    t.pretrain_epochs = pretrain_epochs;
    t.patience = patience;
    t.per_pair_convergence = per_pair_convergence;
    return t;
}

SynthSpec RunConfig::synth_spec() const {
    return make_separable_spec(groups, per_group, attr_dim, vocab_size, t_min, t_max,
                               attr_separation, attr_spread, transition_sharpness,
                               n_feedback, seed);
}

json RunConfig::echo() const {
    json j;
    j["variant"] = variant;
    j["activation"] = activation;
    j["att_layers"] = att_layers;
    j["seq_hidden"] = seq_hidden;
    j["output_dim"] = output_dim;
    j["margin"] = margin;
    j["learning_rate"] = learning_rate;
    j["max_iterations"] = max_iterations;
    j["convergence_eps"] = convergence_eps;
    j["l2_lambda"] = l2_lambda;
    j["validation_fraction"] = validation_fraction;
    j["patience"] = patience;
    j["per_pair_convergence"] = per_pair_convergence;
    j["pretrain_omega_a"] = pretrain_omega_a;
    j["pretrain_epochs"] = pretrain_epochs;
    j["seed"] = seed;
    j["no_pretrain"] = no_pretrain;
    j["groups"] = groups;
    j["per_group"] = per_group;
    j["attr_dim"] = attr_dim;
    j["vocab_size"] = vocab_size;
    j["t_min"] = t_min;
    j["t_max"] = t_max;
    j["n_feedback"] = n_feedback;
    j["attr_separation"] = attr_separation;
    j["attr_spread"] = attr_spread;
    j["transition_sharpness"] = transition_sharpness;
    j["clusters"] = clusters;
    j["kmeans_max_iters"] = kmeans_max_iters;
    return j;
}

std::filesystem::path RunConfig::resolve(const std::string& file) const {
    std::filesystem::path p(file);
    if (p.is_absolute()) return p;
    return std::filesystem::path(out_dir) / p;
}

void set_config_key(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "variant") c.variant = value;
    else if (key == "activation") c.activation = value;
    else if (key == "att_layers") c.att_layers = parse_size_list(value, key);
    else if (key == "seq_hidden") c.seq_hidden = parse_size(value, key);
    else if (key == "output_dim") c.output_dim = parse_size(value, key);
    else if (key == "margin") c.margin = parse_double(value, key);
    else if (key == "learning_rate") c.learning_rate = parse_double(value, key);
    else if (key == "max_iterations") c.max_iterations = parse_size(value, key);
    else if (key == "convergence_eps") c.convergence_eps = parse_double(value, key);
    else if (key == "l2_lambda") c.l2_lambda = parse_double(value, key);
    else if (key == "validation_fraction") c.validation_fraction = parse_double(value, key);
    else if (key == "patience") c.patience = parse_size(value, key);
    else if (key == "per_pair_convergence") c.per_pair_convergence = parse_bool(value, key);
    else if (key == "pretrain_omega_a") c.pretrain_omega_a = parse_double(value, key);
    else if (key == "pretrain_epochs") c.pretrain_epochs = parse_size(value, key);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_size(value, key));
    else if (key == "no_pretrain") c.no_pretrain = parse_bool(value, key);
    else if (key == "groups") c.groups = parse_size(value, key);
    else if (key == "per_group") c.per_group = parse_size(value, key);
    else if (key == "attr_dim") c.attr_dim = parse_size(value, key);
    else if (key == "vocab_size") c.vocab_size = parse_size(value, key);
    else if (key == "t_min") c.t_min = parse_size(value, key);
    else if (key == "t_max") c.t_max = parse_size(value, key);
    else if (key == "n_feedback") c.n_feedback = parse_size(value, key);
    else if (key == "attr_separation") c.attr_separation = parse_double(value, key);
    else if (key == "attr_spread") c.attr_spread = parse_double(value, key);
    else if (key == "transition_sharpness") c.transition_sharpness = parse_double(value, key);
    else if (key == "clusters") c.clusters = parse_size(value, key);
    else if (key == "kmeans_max_iters") c.kmeans_max_iters = parse_size(value, key);
    else if (key == "out_dir") c.out_dir = value;
    else if (key == "dataset_file") c.dataset_file = value;
    else if (key == "feedback_file") c.feedback_file = value;
    else if (key == "truth_file") c.truth_file = value;
    else if (key == "checkpoint_file") c.checkpoint_file = value;
    else if (key == "embeddings_file") c.embeddings_file = value;
    else if (key == "embeddings_before_file") c.embeddings_before_file = value;
    else if (key == "train_report_file") c.train_report_file = value;
    else if (key == "eval_report_file") c.eval_report_file = value;
    else throw ConfigError("unknown configuration key '" + key + "'");
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path.string() + "'");
    RunConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        set_config_key(config, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return config;
}

namespace {

FusionParams init_from_config(const RunConfig& config, const Dataset& dataset) {
    Rng rng = Rng(config.seed).fork(kSaltModelInit);
    Activation act = config.activation == "relu" ? Activation::Relu : Activation::Tanh;
    if (config.activation != "relu" && config.activation != "tanh") {
        throw ConfigError("unknown activation '" + config.activation +
                          "' (valid: tanh, relu)");
    }
    return init_fusion(fusion_variant_from_string(config.variant), dataset.attr_dim(),
                       dataset.vocab_size(), config.att_layers, config.seq_hidden,
                       config.output_dim, act, rng);
}

} // namespace

void run_synth(const RunConfig& config, std::ostream& out) {
    SynthResult result = generate(config.synth_spec());
    json echo = config.echo();
    write_dataset(config.resolve(config.dataset_file), result.records, echo.dump());
    write_feedback(config.resolve(config.feedback_file), result.feedback,
                   "config: " + echo.dump());
    write_truth(config.resolve(config.truth_file), result.truth,
                "config: " + echo.dump());
    out << "synth: " << result.dataset.size() << " instances, u=" << result.dataset.attr_dim()
        << ", r=" << result.dataset.vocab_size() << ", T=" << result.dataset.padded_length()
        << ", " << result.feedback.size() << " feedback pairs\n";
}

void run_pretrain(const RunConfig& config, std::ostream& out) {
    Dataset dataset = load_dataset(config.resolve(config.dataset_file));
    FusionParams model = init_from_config(config, dataset);
    model = pretrain(std::move(model), dataset, config.training());
    save_checkpoint(config.resolve(config.checkpoint_file), model, config.echo());
    write_embeddings(config.resolve(config.embeddings_before_file),
                     embed_all(model, dataset), config.echo());
    out << "pretrain: " << config.pretrain_epochs << " epochs done, checkpoint at "
        << config.resolve(config.checkpoint_file).string() << "\n";
}

void run_train(const RunConfig& config, std::ostream& out) {
    Dataset dataset = load_dataset(config.resolve(config.dataset_file));
    auto feedback = load_feedback(config.resolve(config.feedback_file), dataset);
    FusionParams model = init_from_config(config, dataset);
    if (!config.no_pretrain) {
        model = pretrain(std::move(model), dataset, config.training());
    }
    write_embeddings(config.resolve(config.embeddings_before_file),
                     embed_all(model, dataset), config.echo());
    auto [trained, report] = train(std::move(model), feedback, dataset, config.training());
    save_checkpoint(config.resolve(config.checkpoint_file), trained, config.echo());
    write_train_report(config.resolve(config.train_report_file), report, config.echo());
    write_embeddings(config.resolve(config.embeddings_file), embed_all(trained, dataset),
                     config.echo());
    out << "train: " << report.iterations << " epochs, stop=" << to_string(report.stop_reason);
    if (!report.train_loss.empty()) {
        out << ", first loss " << report.train_loss.front() << ", last loss "
            << report.train_loss.back();
    }
    out << "\n";
}

void run_embed(const RunConfig& config, std::ostream& out) {
    Dataset dataset = load_dataset(config.resolve(config.dataset_file));
    FusionParams model = load_checkpoint(config.resolve(config.checkpoint_file));
    write_embeddings(config.resolve(config.embeddings_file), embed_all(model, dataset),
                     config.echo());
    out << "embed: " << dataset.size() << " embeddings of dimension " << model.output_dim()
        << "\n";
}

EvalReport run_eval(const RunConfig& config, std::ostream& out) {
    auto embeddings = load_embeddings(config.resolve(config.embeddings_file));
    Partition truth = load_truth(config.resolve(config.truth_file));
    std::size_t k = config.clusters > 0 ? config.clusters : truth.k;

    EvalReport report;
    report.k = k;
    report.config_echo = config.echo();
    report.nmi_value = nmi(kmeans(embeddings, k, config.seed, config.kmeans_max_iters), truth);

    std::filesystem::path before = config.resolve(config.embeddings_before_file);
    if (std::filesystem::exists(before)) {
        auto embeddings_before = load_embeddings(before);
        report.nmi_before =
            nmi(kmeans(embeddings_before, k, config.seed, config.kmeans_max_iters), truth);
    }
    std::filesystem::path feedback_path = config.resolve(config.feedback_file);
    if (std::filesystem::exists(feedback_path)) {
        report.distances = pair_distance_stats(
            embeddings, load_feedback_lines(feedback_path));
    }
    write_eval_report(config.resolve(config.eval_report_file), report);

    out << std::left;
    out << "metric                    value\n";
    out << "------------------------  ----------\n";
    out << std::setw(24) << "nmi" << "  " << report.nmi_value << "\n";
    if (report.nmi_before) {
        out << std::setw(24) << "nmi_before" << "  " << *report.nmi_before << "\n";
        out << std::setw(24) << "nmi_gain" << "  "
            << report.nmi_value - *report.nmi_before << "\n";
    }
    out << std::setw(24) << "k" << "  " << report.k << "\n";
    if (report.distances.mean_similar) {
        out << std::setw(24) << "mean_similar_distance" << "  "
            << *report.distances.mean_similar << "\n";
    }
    if (report.distances.mean_dissimilar) {
        out << std::setw(24) << "mean_dissimilar_distance" << "  "
            << *report.distances.mean_dissimilar << "\n";
    }
    return report;
}

bool run_gradcheck(const RunConfig& config, std::ostream& out) {
    GradCheckOptions options;
    options.seed = config.seed;
    options.instances_per_variant = 10;
    options.corrupt_tensor = config.gradcheck_corrupt;
    auto entries = run_gradient_check(options);
    bool all_ok = true;
    out << std::left << std::setw(14) << "variant" << std::setw(18) << "tensor"
        << std::setw(14) << "max_rel_err" << "status\n";
    for (const auto& e : entries) {
        bool ok = e.max_rel_err < 1e-4;
        all_ok = all_ok && ok;
        out << std::left << std::setw(14) << e.variant << std::setw(18) << e.tensor
            << std::setw(14) << std::scientific << e.max_rel_err << std::defaultfloat
            << (ok ? "ok" : "FAIL") << "\n";
    }
    return all_ok;
}

} // namespace mlas
