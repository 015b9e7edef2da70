#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace riesne::cli {

struct EmbedOptions {
    std::string input;
    std::string manifold = "euclidean";
    bool project = false;
    std::string target = "euclidean";
    std::string family = "auto";
    int dim = 2;
    double perplexity = 30.0;
    bool sparse = false;
    std::string volume_ratio = "chart";
    double theta = 0.5;
    std::string gradient = "auto";
    int iters = 1000;
    double learning_rate = 200.0;
    double momentum_early = 0.5;
    double momentum_late = 0.8;
    double exaggeration = 12.0;
    int exaggeration_iters = 250;
    std::string sphere_step = "retraction";
    std::uint64_t seed = 42;
    int threads = 1;
    std::string output;
    std::string svg;
    std::string kl_history;
};

struct BaselineOptions {
    std::string input;
    std::string manifold = "sphere";
    bool project = false;
    int dim = 2;
    std::string output;
    std::string svg;
};

struct EvalOptions {
    std::string input;
    std::string manifold = "euclidean";
    bool project = false;
    std::string embedding;
    std::string target = "euclidean";
    std::string family = "auto";
    int k = 10;
    double perplexity = 30.0;
    bool sparse = false;
    std::string volume_ratio = "chart";
    std::uint64_t seed = 42;
    int threads = 1;
    std::string output;
};

struct IngestCovOptions {
    std::string input;
    int window = 20;
    bool log_returns = true;
    std::string output;
};

struct Options {
    EmbedOptions embed;
    BaselineOptions baseline;
    EvalOptions eval;
    IngestCovOptions ingest_cov;
};

/// Subcommand handles, filled by build_app.
struct Verbs {
    CLI::App* embed = nullptr;
    CLI::App* baseline = nullptr;
    CLI::App* eval = nullptr;
    CLI::App* ingest_cov = nullptr;
};

/// Registers every verb and flag on `app`, bound to `opts`. Defaults are
/// shown in --help.
Verbs build_app(CLI::App& app, Options& opts);

/// Turns a JSON config object into command-line tokens for `verb`. Top-level
/// keys are shared between verbs, so those the verb does not define
/// (`has_option` false) are skipped; an object under the verb's name is merged
/// over them and passed through as is. Objects named after other verbs are
/// ignored.
std::vector<std::string> config_tokens(const nlohmann::json& config, const std::string& verb,
                                       const std::function<bool(const std::string&)>& has_option);

}  // namespace riesne::cli
