#include "settings.hpp"

#include <algorithm>
#include <stdexcept>

#include "riesne/errors.hpp"
#include "riesne/io.hpp"

namespace riesne::cli {

namespace {

const char* const kVolumeRatioHelp =
    "Heat-kernel volume ratio: chart = SPD matrix-entry chart densities, uniform = 1 "
    "(recommended for SPD(n) with n above ~4)";

const std::vector<std::string> kVerbs = {"embed", "baseline", "eval", "ingest-cov"};

void add_config_option(CLI::App* sub) {
    // Parsed ahead of CLI11 by main(); registered so it shows in --help.
    sub->add_option("--config", "JSON file of option values; command-line flags take precedence")
        ->check(CLI::ExistingFile);
}

}  // namespace

Verbs build_app(CLI::App& app, Options& opts) {
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    const auto manifolds = CLI::IsMember({"euclidean", "sphere", "spd"});
    const auto targets = CLI::IsMember({"euclidean", "sphere"});
    const auto families = CLI::IsMember({"auto", "student-t", "vmf", "brownian"});
    const auto ratios = CLI::IsMember({"chart", "uniform"});
    Verbs v;

    {
        auto& o = opts.embed;
        auto* s = v.embed = app.add_subcommand("embed", "Embed manifold-valued data into R^d or S^d");
        add_config_option(s);
        s->add_option("--input", o.input, "Input CSV (optional id and label columns)")->required();
        s->add_option("--manifold", o.manifold, "Data manifold")->check(manifolds);
        s->add_flag("--project,!--no-project", o.project,
                    "Project rows onto the manifold instead of rejecting them (default: off)");
        s->add_option("--target", o.target, "Embedding manifold")->check(targets);
        s->add_option("--family", o.family,
                      "Low-dimensional similarity; auto = student-t on euclidean, vmf on sphere")
            ->check(families);
        s->add_option("--dim", o.dim, "Embedding dimension d (sphere targets are S^d in R^(d+1))")
            ->check(CLI::PositiveNumber);
        s->add_option("--perplexity", o.perplexity, "Target perplexity, at least 2")->check(CLI::Range(2.0, 1e9));
        s->add_flag("--sparse,!--no-sparse", o.sparse,
                    "Sparse P over floor(3 * perplexity) VP-tree neighbors (default: off, dense)");
        s->add_option("--volume-ratio", o.volume_ratio, kVolumeRatioHelp)->check(ratios);
        s->add_option("--theta", o.theta, "Barnes-Hut opening angle")->check(CLI::NonNegativeNumber);
        s->add_option("--gradient", o.gradient,
                      "auto = Barnes-Hut when sparse with student-t on R^2 or R^3, else exact")
            ->check(CLI::IsMember({"auto", "exact", "bh"}));
        s->add_option("--iters", o.iters, "Gradient-descent iterations")->check(CLI::NonNegativeNumber);
        s->add_option("--learning-rate", o.learning_rate, "Step size")->check(CLI::PositiveNumber);
        s->add_option("--momentum-early", o.momentum_early, "Momentum during exaggeration")->check(CLI::Range(0.0, 0.999999));
        s->add_option("--momentum-late", o.momentum_late, "Momentum afterwards")->check(CLI::Range(0.0, 0.999999));
        s->add_option("--exaggeration", o.exaggeration, "Early exaggeration factor")->check(CLI::PositiveNumber);
        s->add_option("--exaggeration-iters", o.exaggeration_iters, "Exaggerated iterations (capped at --iters)")
            ->check(CLI::NonNegativeNumber);
        s->add_option("--sphere-step", o.sphere_step, "Sphere update: projection retraction or exponential map")
            ->check(CLI::IsMember({"retraction", "expmap"}));
        s->add_option("--seed", o.seed, "Random seed for the VP-tree and initialization");
        s->add_option("--threads", o.threads, "Worker threads (results do not depend on this)")
            ->check(CLI::PositiveNumber);
        s->add_option("--output", o.output, "Coordinates CSV (id,label,y1..yd)")->required();
        s->add_option("--svg", o.svg, "Optional SVG scatter plot");
        s->add_option("--kl-history", o.kl_history, "Optional CSV of KL divergence by iteration");
    }
    {
        auto& o = opts.baseline;
        auto* s = v.baseline = app.add_subcommand("baseline", "Tangent-space PCA at the intrinsic mean");
        add_config_option(s);
        s->add_option("--input", o.input, "Input CSV")->required();
        s->add_option("--manifold", o.manifold, "Data manifold")->check(manifolds);
        s->add_flag("--project,!--no-project", o.project,
                    "Project rows onto the manifold instead of rejecting them (default: off)");
        s->add_option("--dim", o.dim, "Number of components")->check(CLI::PositiveNumber);
        s->add_option("--output", o.output, "Coordinates CSV (id,label,y1..yd)")->required();
        s->add_option("--svg", o.svg, "Optional SVG scatter plot");
    }
    {
        auto& o = opts.eval;
        auto* s = v.eval = app.add_subcommand("eval", "Score an embedding: kNN label accuracy, trustworthiness, KL");
        add_config_option(s);
        s->add_option("--input", o.input, "Original data CSV")->required();
        s->add_option("--manifold", o.manifold, "Data manifold")->check(manifolds);
        s->add_flag("--project,!--no-project", o.project,
                    "Project rows onto the manifold instead of rejecting them (default: off)");
        s->add_option("--embedding", o.embedding, "Embedding CSV written by embed or baseline")->required();
        s->add_option("--target", o.target, "Manifold the embedding lives on")->check(targets);
        s->add_option("--family", o.family, "Similarity used for final_kl; auto as in embed")->check(families);
        s->add_option("--k", o.k, "Neighborhood size")->check(CLI::PositiveNumber);
        s->add_option("--perplexity", o.perplexity, "Perplexity used to rebuild P for final_kl")
            ->check(CLI::Range(2.0, 1e9));
        s->add_flag("--sparse,!--no-sparse", o.sparse, "Rebuild P in sparse mode (default: off)");
        s->add_option("--volume-ratio", o.volume_ratio, kVolumeRatioHelp)->check(ratios);
        s->add_option("--seed", o.seed, "VP-tree seed for sparse P");
        s->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
        s->add_option("--output", o.output, "Write the JSON report here instead of stdout");
    }
    {
        auto& o = opts.ingest_cov;
        auto* s = v.ingest_cov =
            app.add_subcommand("ingest-cov", "Rolling covariance matrices of a price or return series");
        add_config_option(s);
        s->add_option("--input", o.input, "Series CSV; a leading date/time/timestamp/id column labels rows")
            ->required();
        s->add_option("--window", o.window, "Rolling window length in rows")->check(CLI::Range(2, 1 << 30));
        s->add_flag("--log-returns,!--raw", o.log_returns,
                    "Convert prices to log returns first (default: on; --raw uses the values as given)");
        s->add_option("--output", o.output, "SPD dataset CSV (upper-triangle columns)")->required();
    }
    return v;
}

std::vector<std::string> config_tokens(const nlohmann::json& config, const std::string& verb,
                                       const std::function<bool(const std::string&)>& has_option) {
    if (!config.is_object()) throw InvalidArgument("config file must hold a JSON object");
    nlohmann::json merged = nlohmann::json::object();
    for (const auto& [key, value] : config.items()) {
        const bool is_verb = std::find(kVerbs.begin(), kVerbs.end(), key) != kVerbs.end();
        if (!is_verb && has_option(key)) merged[key] = value;
    }
    if (config.contains(verb)) {
        if (!config[verb].is_object()) throw InvalidArgument("config section '" + verb + "' must be an object");
        for (const auto& [key, value] : config[verb].items()) merged[key] = value;
    }

    std::vector<std::string> tokens;
    for (const auto& [key, value] : merged.items()) {
        if (key == "config") throw InvalidArgument("config files cannot include other config files");
        const std::string flag = "--" + key;
        if (value.is_boolean()) {
            if (key == "log-returns") {
                tokens.push_back(value.get<bool>() ? "--log-returns" : "--raw");
            } else {
                tokens.push_back(value.get<bool>() ? flag : "--no-" + key);
            }
        } else if (value.is_number_integer() || value.is_number_unsigned()) {
            tokens.push_back(flag);
            tokens.push_back(value.dump());
        } else if (value.is_number_float()) {
            tokens.push_back(flag);
            tokens.push_back(format_double(value.get<double>()));
        } else if (value.is_string()) {
            tokens.push_back(flag);
            tokens.push_back(value.get<std::string>());
        } else {
            throw InvalidArgument("config value for '" + key + "' must be a string, number or boolean");
        }
    }
    return tokens;
}

}  // namespace riesne::cli
