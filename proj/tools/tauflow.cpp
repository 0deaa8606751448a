#include "tauflow/runner.hpp"

#include <CLI11.hpp>

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <iostream>

extern char** environ;

namespace {

using tauflow::RunConfig;
namespace fs = std::filesystem;

std::optional<fs::path> out_override(const std::string& flag) {
    if (const char* env = std::getenv("TAUFLOW_OUT"); env && *env) return fs::path(env);
    if (!flag.empty()) return fs::path(flag);
    return std::nullopt;
}

int run_one(const std::string& path, const std::optional<fs::path>& out, const std::string& profile) {
    RunConfig config;
    try {
        config = RunConfig::load(path);
        tauflow::apply_profile(config, tauflow::tolerance_profile_from_string(profile));
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return tauflow::exit_config;
    }
    const fs::path dir = out ? *out : fs::path(config.output_directory);
    return tauflow::run_experiment(config, dir, std::cout);
}

// Batch mode: one child process per config, at most `jobs` alive.
int run_batch(const std::vector<std::string>& configs, const fs::path& root, const std::string& profile, int jobs) {
    struct Child {
        pid_t pid;
        std::string config;
    };
    std::vector<Child> running;
    int worst = tauflow::exit_ok;
    auto reap = [&] {
        int status = 0;
        const pid_t pid = ::wait(&status);
        if (pid < 0) return;
        const int code = WIFEXITED(status) ? WEXITSTATUS(status) : tauflow::exit_singularity;
        for (auto it = running.begin(); it != running.end(); ++it) {
            if (it->pid == pid) {
                std::cout << it->config << ": exit " << code << "\n";
                running.erase(it);
                break;
            }
        }
        worst = std::max(worst, code);
    };
    for (const auto& config : configs) {
        while (static_cast<int>(running.size()) >= jobs) reap();
        const std::string out = (root / fs::path(config).stem()).string();
        std::vector<std::string> args{"tauflow", "run", "--config", config, "--out", out, "--tolerance-profile",
                                      profile};
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        argv.push_back(nullptr);
        // Children must honor their own --out, so TAUFLOW_OUT is not forwarded.
        std::vector<std::string> env_store;
        for (char** e = environ; *e; ++e) {
            if (std::string_view(*e).rfind("TAUFLOW_OUT=", 0) != 0) env_store.emplace_back(*e);
        }
        std::vector<char*> envp;
        for (auto& e : env_store) envp.push_back(e.data());
        envp.push_back(nullptr);
        pid_t pid = 0;
        if (::posix_spawn(&pid, "/proc/self/exe", nullptr, nullptr, argv.data(), envp.data()) != 0) {
            std::cerr << config << ": could not start worker\n";
            worst = std::max(worst, tauflow::exit_config);
            continue;
        }
        running.push_back({pid, config});
    }
    while (!running.empty()) reap();
    return worst;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tauflow: geometric flow experiments"};
    app.require_subcommand(1);

    std::vector<std::string> configs;
    std::string out;
    std::string profile = "default";
    int jobs = 1;
    auto add_profile = [&](CLI::App* sub) {
        sub->add_option("--tolerance-profile", profile, "diagnostic tolerances")
            ->check(CLI::IsMember({"default", "strict"}));
    };

    auto* run = app.add_subcommand("run", "evolve, analyze and write artifacts");
    run->add_option("--config", configs, "config file (repeat for a batch)")->required();
    run->add_option("--out", out, "output directory (TAUFLOW_OUT overrides)");
    run->add_option("--jobs", jobs, "parallel worker processes for a batch")->check(CLI::PositiveNumber);
    add_profile(run);

    auto* verify = app.add_subcommand("verify", "identity and invariant checks at two resolutions");
    verify->add_option("--config", configs, "config file (repeatable)");
    add_profile(verify);

    std::string checkpoint;
    double extra = 0.0;
    auto* resume = app.add_subcommand("resume", "continue a run from its checkpoint");
    resume->add_option("--checkpoint", checkpoint, "checkpoint.json of a finished run")->required();
    resume->add_option("--extra-horizon", extra, "additional flow time")->required();
    resume->add_option("--out", out, "output directory (default: the checkpoint's)");

    std::string dir;
    auto* report = app.add_subcommand("report", "summarize an output directory");
    report->add_option("dir", dir, "run output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : tauflow::exit_config;
    }

    if (run->parsed()) {
        const auto target = out_override(out);
        if (configs.size() == 1) return run_one(configs.front(), target, profile);
        return run_batch(configs, target ? *target : fs::path("out"), profile, jobs);
    }
    if (verify->parsed()) {
        try {
            return tauflow::verify_configs(configs, tauflow::tolerance_profile_from_string(profile), std::cout);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return tauflow::exit_config;
        }
    }
    if (resume->parsed()) return tauflow::resume_experiment(checkpoint, extra, out_override(out), std::cout);
    return tauflow::report_directory(dir, std::cout);
}
