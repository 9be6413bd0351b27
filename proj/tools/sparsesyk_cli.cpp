// sparsesyk: command-line driver
//
//   sparsesyk <command> [--config run.json] [--set key=value ...] [--out dir]
//   sparsesyk <command> --print-defaults

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparsesyk/commands.hpp"
#include "sparsesyk/error.hpp"
#include "sparsesyk/io.hpp"

namespace {

struct Invocation {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    bool print_defaults = false;
};

} // namespace

int main(int argc, char** argv)
{
    using namespace ssyk;
    CLI::App app{"Sparse SYK simulation toolkit"};
    app.require_subcommand(1);

    std::vector<Invocation> invocations(cli::commands().size());
    std::string chosen;
    for (std::size_t i = 0; i < cli::commands().size(); ++i) {
        const auto& spec = cli::commands()[i];
        Invocation& inv = invocations[i];
        CLI::App* sub = app.add_subcommand(spec.name, spec.summary);
        sub->add_option("-c,--config", inv.config_path, "JSON config file");
        sub->add_option("-s,--set", inv.overrides, "override a config key, key=value (repeatable)");
        sub->add_option("-o,--out", inv.out_dir, "output directory")->default_val("runs/" + spec.name);
        sub->add_flag("--print-defaults", inv.print_defaults, "print the default config and exit");
        sub->callback([&chosen, name = spec.name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::Validation);
    }

    std::size_t index = 0;
    while (cli::commands()[index].name != chosen) ++index;
    const Invocation& inv = invocations[index];
    const auto& spec = cli::commands()[index];

    try {
        if (inv.print_defaults) {
            std::cout << spec.defaults.dump(2) << '\n';
            return 0;
        }
        nlohmann::json config = nlohmann::json::object();
        if (!inv.config_path.empty()) config = io::read_json(inv.config_path);
        for (const auto& o : inv.overrides) cli::apply_override(config, o);
        const nlohmann::json summary = cli::run_command(spec.name, config, inv.out_dir);
        std::cout << summary.dump(2) << '\n';
        return 0;
    } catch (const nlohmann::json::exception& e) {
        // missing key or a value of the wrong type in the config
        std::cerr << "sparsesyk " << spec.name << ": invalid config: " << e.what() << '\n';
        return static_cast<int>(ExitCode::Validation);
    } catch (const std::exception& e) {
        std::cerr << "sparsesyk " << spec.name << ": " << e.what() << '\n';
        return static_cast<int>(exit_code_for(e));
    }
}
