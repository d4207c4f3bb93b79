#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mlas/pipeline.hpp"

namespace {

int exit_code_for(const mlas::Error& e) {
    switch (e.kind()) {
        case mlas::ErrorKind::Io:
        case mlas::ErrorKind::Parse:
        case mlas::ErrorKind::Schema:
        case mlas::ErrorKind::Reference:
            return 2;
        case mlas::ErrorKind::Divergence:
            return 3;
        default:
            return 1;
    }
}

void apply_set(mlas::RunConfig& config, const std::vector<std::string>& sets) {
    for (const std::string& kv : sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw mlas::ConfigError("--set expects key=value, got '" + kv + "'");
        }
        mlas::set_config_key(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mlas: distance metric learning on attributed sequences"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::string> config_file;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::vector<std::string> sets;
    std::optional<std::string> variant;
    bool no_pretrain = false;
    std::string corrupt;

    app.add_option("--config", config_file, "key = value configuration file");
    app.add_option("--seed", seed, "override the run seed");
    app.add_option("--out-dir", out_dir, "directory for input/output artifacts");
    app.add_option("--set", sets, "override any config key (key=value, repeatable)");

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset with planted groups");
    auto* pretrain_cmd = app.add_subcommand("pretrain", "reconstruction pre-training only");
    auto* train_cmd = app.add_subcommand("train", "pre-train (unless disabled) and run metric learning");
    auto* embed = app.add_subcommand("embed", "forward a dataset through a checkpoint");
    auto* eval = app.add_subcommand("eval", "cluster embeddings and score NMI against the truth");
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of all gradients");

    for (auto* cmd : {pretrain_cmd, train_cmd, embed}) {
        cmd->add_option("--variant", variant, "balanced | att-centric | seq-centric");
    }
    train_cmd->add_flag("--no-pretrain", no_pretrain, "skip reconstruction pre-training");
    gradcheck->add_option("--corrupt", corrupt,
                          "corrupt gradients of matching tensors (negative control)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        mlas::RunConfig config;
        if (config_file) config = mlas::load_run_config(*config_file);
        apply_set(config, sets);
        if (seed) config.seed = *seed;
        if (out_dir) config.out_dir = *out_dir;
        if (variant) config.variant = *variant;
        if (no_pretrain) config.no_pretrain = true;
        config.gradcheck_corrupt = corrupt;

        if (synth->parsed()) {
            mlas::run_synth(config, std::cout);
        } else if (pretrain_cmd->parsed()) {
            mlas::run_pretrain(config, std::cout);
        } else if (train_cmd->parsed()) {
            mlas::run_train(config, std::cout);
        } else if (embed->parsed()) {
            mlas::run_embed(config, std::cout);
        } else if (eval->parsed()) {
            mlas::run_eval(config, std::cout);
        } else if (gradcheck->parsed()) {
            if (!mlas::run_gradcheck(config, std::cout)) {
                std::cerr << "gradcheck failed\n";
                return 4;
            }
        }
        return 0;
    } catch (const mlas::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
