#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlas/eval.hpp"
#include "mlas/metric.hpp"
#include "mlas/synth.hpp"

namespace mlas {

/// Resolved run configuration: file values overlaid with flag overrides.
/// Every output artifact embeds the echo() of the configuration that
/// produced it.
struct RunConfig {
    // network
    std::string variant = "balanced";
    std::string activation = "tanh";
    std::vector<std::size_t> att_layers = {4};
    std::size_t seq_hidden = 8;   // d_S
    std::size_t output_dim = 8;   // d

    // training
    double margin = 1.0;
    double learning_rate = 0.05;
    std::size_t max_iterations = 60;
    double convergence_eps = 1e-7;
    double l2_lambda = 0.0;
    double validation_fraction = 0.2;
    std::size_t patience = 5;
    bool per_pair_convergence = false;
    double pretrain_omega_a = 0.5;
    std::size_t pretrain_epochs = 15;
    std::uint64_t seed = 42;
    bool no_pretrain = false;

    // synthetic data
    std::size_t groups = 2;
    std::size_t per_group = 50;
    std::size_t attr_dim = 6;
    std::size_t vocab_size = 10;
    std::size_t t_min = 5;
    std::size_t t_max = 12;
    std::size_t n_feedback = 40;
    double attr_separation = 1.2;
    double attr_spread = 1.0;
    double transition_sharpness = 0.6;

    // evaluation
    std::size_t clusters = 0;  // 0 = take k from the truth file
    std::size_t kmeans_max_iters = 100;

    // io (paths resolve against out_dir when relative)
    std::string out_dir = ".";
    std::string dataset_file = "dataset.jsonl";
    std::string feedback_file = "feedback.csv";
    std::string truth_file = "truth.csv";
    std::string checkpoint_file = "checkpoint.json";
    std::string embeddings_file = "embeddings_after.jsonl";
    std::string embeddings_before_file = "embeddings_before.jsonl";
    std::string train_report_file = "train_report.csv";
    std::string eval_report_file = "eval_report.json";

    // gradcheck hook
    std::string gradcheck_corrupt;

    TrainingConfig training() const;
    SynthSpec synth_spec() const;
    nlohmann::json echo() const;
    std::filesystem::path resolve(const std::string& file) const;
};

/// `key = value` lines; '#' starts a comment.
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies one key=value override; throws ConfigError for unknown keys or
/// unparsable values. Shared by the file parser and CLI flags.
void set_config_key(RunConfig& config, const std::string& key, const std::string& value);

// Subcommand bodies. They throw mlas::Error subclasses; the CLI maps
// those onto exit codes.
void run_synth(const RunConfig& config, std::ostream& out);
void run_pretrain(const RunConfig& config, std::ostream& out);
void run_train(const RunConfig& config, std::ostream& out);
void run_embed(const RunConfig& config, std::ostream& out);
EvalReport run_eval(const RunConfig& config, std::ostream& out);
/// Prints the per-tensor error table; true iff every error is below 1e-4.
bool run_gradcheck(const RunConfig& config, std::ostream& out);

} // namespace mlas
