// Command-line entry point: wflab <subcommand> <config.json> [flags]
#include <iostream>

#include <CLI11.hpp>

#include <wflab/experiment.hpp>

int main(int argc, char** argv)
{
    CLI::App app{"Large-deviation lab for pure-jump processes"};
    app.set_version_flag("--version", wflab::kVersion);
    app.require_subcommand(1);

    std::string config;
    std::uint64_t seed = 0;
    std::size_t paths = 0;
    std::string out;
    std::vector<std::string> assignments;

    for (auto const& [name, block] : wflab::kCommandBlocks)
    {
        auto* sub = app.add_subcommand(name, std::string{"run the '"} + block
                                                 + "' block of a config");
        sub->add_option("config", config, "experiment config (JSON)")
            ->required();
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--paths", paths, "override n_paths");
        sub->add_option("--out", out, "override the output directory");
        sub->add_option("--override", assignments,
                        "set a dotted config key: key=value");
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(wflab::ExitStatus::validation);
    }

    auto* sub = app.get_subcommands().front();
    wflab::Overrides ov;
    ov.assignments = assignments;
    if (sub->count("--seed"))
        ov.seed = seed;
    if (sub->count("--paths"))
        ov.paths = paths;
    if (sub->count("--out"))
        ov.out = out;

    try
    {
        auto run = wflab::run_experiment(config, sub->get_name(), ov);
        for (auto const& e : run.report["errors"])
            std::cerr << "wflab: " << e["code"].get<std::string>() << ": "
                      << e["message"].get<std::string>() << "\n";
        if (!run.output_dir.empty())
            std::cout << (run.output_dir / "report.json").string() << "\n";
        return static_cast<int>(run.status);
    }
    catch (std::exception const& e)
    {
        std::cerr << "wflab: " << e.what() << "\n";
        return static_cast<int>(wflab::ExitStatus::failure);
    }
}
