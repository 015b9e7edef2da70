#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "riesne/errors.hpp"
#include "settings.hpp"

namespace {

enum ExitCode { kOk = 0, kInvalidArgs = 2, kDataError = 3, kNumericFailure = 4 };

/// Value of --config, looked up before CLI11 runs so that its contents can be
/// placed ahead of the explicit flags.
std::string find_config(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return {};
}

int parse_and_run(std::vector<std::string> args) {
    using namespace riesne::cli;

    CLI::App app{"Stochastic neighbor embedding for data on Riemannian manifolds"};
    app.name("riesne");
    Options opts;
    const Verbs verbs = build_app(app, opts);

    if (!args.empty()) {
        const std::string config_path = find_config(args);
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw riesne::InvalidArgument("cannot read config file '" + config_path + "'");
            nlohmann::json config;
            try {
                config = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw riesne::InvalidArgument("config file '" + config_path + "': " + e.what());
            }
            const CLI::App* sub = nullptr;
            for (const CLI::App* s : app.get_subcommands({})) {
                if (s->get_name() == args.front()) sub = s;
            }
            const auto has_option = [sub](const std::string& key) {
                return sub != nullptr && sub->get_option_no_throw("--" + key) != nullptr;
            };
            // Config values go right after the verb; explicit flags come later
            // and win under the take-last policy.
            const auto tokens = config_tokens(config, args.front(), has_option);
            args.insert(args.begin() + 1, tokens.begin(), tokens.end());
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalidArgs;
    }

    if (verbs.embed->parsed()) return run_embed(opts.embed);
    if (verbs.baseline->parsed()) return run_baseline(opts.baseline);
    if (verbs.eval->parsed()) return run_eval(opts.eval);
    return run_ingest_cov(opts.ingest_cov);
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return parse_and_run(std::move(args));
    } catch (const riesne::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalidArgs;
    } catch (const riesne::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const riesne::IoError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const riesne::DomainError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const riesne::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericFailure;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericFailure;
    }
}
