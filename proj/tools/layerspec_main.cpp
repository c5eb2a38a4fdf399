// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: one subcommand per job kind, each taking a JSON
// config plus an output directory, delegating to jobs::run_job. Exit codes:
// 0 success, 1 configuration problems, 2 numerical or filesystem failures.

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "layerspec/jobs.hpp"

namespace {

const char* describe(const std::string& kind) {
    if (kind == "validate") return "check a domain file against the schema and report violations";
    if (kind == "spectrum") return "locate eigenvalues in a search box, one row per root";
    if (kind == "sweep") return "resolvent norm sweep over real frequencies";
    if (kind == "exterior-sweep") return "cutoff resolvent norm sweep for an unbounded exterior";
    if (kind == "evolve") return "time-domain run with energy trace and decay fit";
    if (kind == "decay-compare") return "same run on two domains, rates side by side";
    if (kind == "dtn-exponent") return "glancing-decay exponent of the outgoing boundary map";
    return "";
}

// --threads beats LAYERSPEC_THREADS beats 1.
bool env_threads(unsigned& threads, std::string& problem) {
    const char* env = std::getenv("LAYERSPEC_THREADS");
    if (env == nullptr || *env == '\0') return true;
    const std::string text(env);
    unsigned parsed = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), parsed);
    if (ec != std::errc{} || ptr != text.data() + text.size() || parsed == 0) {
        problem = "LAYERSPEC_THREADS must be a positive integer, got \"" + text + "\"";
        return false;
    }
    threads = parsed;
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"layerspec: spectra, resolvent norms and energy decay for layered radial media"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("layerspec ") + layerspec::jobs::tool_version);

    layerspec::jobs::job_request req;
    std::string config;
    std::string out_dir = ".";
    unsigned threads = 0;  // 0 = not given on the command line

    for (const auto& kind : layerspec::jobs::job_kinds()) {
        CLI::App* sub = app.add_subcommand(kind, describe(kind));
        sub->add_option("--config", config, "job config (JSON)")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (created if missing)");
        sub->add_option("--threads", threads, "worker threads for sweep/spectrum jobs")
            ->check(CLI::PositiveNumber);
        sub->callback([&req, kind] { req.kind = kind; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (threads == 0) {
        threads = 1;
        std::string problem;
        if (!env_threads(threads, problem)) {
            std::cerr << "layerspec: " << problem << "\n";
            return 1;
        }
    }

    req.config = config;
    req.out_dir = out_dir;
    req.threads = threads;
    return layerspec::jobs::run_job(req);
}
