#pragma once

#include <filesystem>

#include "asmp/config.hpp"

namespace asmp::cmd {

/// Load the bundle named on the command line or generate the configured
/// synthetic instance; splits come from the bundle when present, otherwise
/// from the config's split spec.
Dataset resolve_dataset(const RunConfig& config, const std::filesystem::path& bundle);

/// Solve the denoising problem on the raw features; writes trace.csv,
/// h_final.csv, s_final.csv, config.resolved.
void denoise(const RunConfig& config, const std::filesystem::path& bundle,
             const std::filesystem::path& out);

/// Independent train/evaluate trials (with the fixed-structure baseline when
/// configured); writes metrics.json, model_trial0.ckpt, config.resolved.
void train_eval(const RunConfig& config, const std::filesystem::path& bundle,
                const std::filesystem::path& out);

/// Perturbation-level sweep over both models; writes sweep.csv,
/// config.resolved.
void attack_sweep(const RunConfig& config, const std::filesystem::path& bundle,
                  const std::filesystem::path& out);

/// Per-layer normalized objective over an extended run; writes report.csv,
/// config.resolved.
void convergence_report(const RunConfig& config, const std::filesystem::path& bundle,
                        const std::filesystem::path& out);

/// Citation-format (.content/.cites) files to a GraphBundle directory.
void convert(const std::filesystem::path& content, const std::filesystem::path& cites,
             const std::filesystem::path& out);

}  // namespace asmp::cmd
