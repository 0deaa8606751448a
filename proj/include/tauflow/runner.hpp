#pragma once

#include "tauflow/config.hpp"
#include "tauflow/diagnostics.hpp"
#include "tauflow/entropy.hpp"
#include "tauflow/flow.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace tauflow {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 1;
inline constexpr int exit_hypothesis = 2;
inline constexpr int exit_singularity = 3;
inline constexpr int exit_checks_failed = 4;

inline constexpr const char* tool_version = "0.3.0";

/// Everything computed from one trajectory.
struct Analysis {
    std::optional<double> entropy_tau;
    std::vector<MuSample> mu;
    std::optional<ConjugatePair> conjugate;
    std::optional<DwDtCheck> dw;
    std::vector<std::string> notes;

    /// Per-sample series on the trajectory's output grid.
    std::vector<TimeSeries> sample_series;
    TimeSeries scalar_evolution;
    /// Same identity with dR/dt from sample differences; resolves fast transients poorly.
    TimeSeries scalar_evolution_sampled;
    TimeSeries volume_identity;
    std::optional<TimeSeries> gauss_bonnet;
    MinScalarReport min_scalar;
    TracelessReport traceless;
    HypothesisReport hypotheses;
    LimitClassification classification;

    bool mu_converged = true;
    /// Largest decrease between consecutive µ samples (0 when nondecreasing).
    double mu_max_decrease = 0.0;
};

Trajectory simulate(const RunConfig& config);
Analysis analyze(const RunConfig& config, const Trajectory& traj);

/// Files written by a run, relative to the output directory, in write order.
struct Artifacts {
    std::vector<std::string> files;
};

/// Writes series, plots, report, µ, conjugate window and checkpoint files
/// (everything but the manifest).
Artifacts write_artifacts(const RunConfig& config, const Trajectory& traj, const Analysis& analysis,
                          const std::filesystem::path& out);

/// run verb: simulate, analyze, write artifacts and manifest. Returns the exit status.
int run_experiment(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);

/// resume verb. The checkpoint's digest must match the manifest next to it.
int resume_experiment(const std::filesystem::path& checkpoint, double extra_horizon,
                      const std::optional<std::filesystem::path>& out, std::ostream& log);

/// verify verb: identity and invariant checks at two resolutions per config.
int verify_configs(const std::vector<std::string>& paths, ToleranceProfile profile, std::ostream& log);

/// report verb: re-checks manifest digests and summarizes report.json.
int report_directory(const std::filesystem::path& dir, std::ostream& log);

}  // namespace tauflow
