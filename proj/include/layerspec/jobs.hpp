#pragma once
// SPDX-License-Identifier: Apache-2.0
//
// Batch job orchestration: each job kind reads one fully explicit JSON
// config, validates it before any computation, runs the underlying module,
// and writes its outputs atomically into the chosen directory together with
// a run manifest (tool version, resolved parameters, wall time). Data
// outputs are byte-identical across repeated runs and thread counts; only
// the manifest's wall time varies.

#include <filesystem>
#include <string>
#include <vector>

namespace layerspec::jobs {

inline constexpr const char* tool_version = "0.1.0";

// validate | spectrum | sweep | exterior-sweep | evolve | decay-compare |
// dtn-exponent
const std::vector<std::string>& job_kinds();

struct job_request {
    std::string kind;
    std::filesystem::path config;
    std::filesystem::path out_dir = ".";
    unsigned threads = 1;
};

// Runs one job end to end. Returns the process exit code: 0 on success, 1
// for configuration problems (reported before any computation), 2 for
// numerical or filesystem failures during the run; context goes to stderr.
int run_job(const job_request& req);

}  // namespace layerspec::jobs
