#pragma once

#include "forcefit/refine.hpp"
#include "forcefit/scene.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace forcefit {

/// One refinement run: input scene, optional finger noise, physical
/// overrides and the optimizer configuration.
struct RunSpec {
  std::string scenePath;
  std::string modelPath;  // empty: the scene's own model reference
  std::optional<std::uint64_t> noiseSeed;
  std::optional<double> mass;
  std::optional<double> frameDt;
  RefineConfig config;
};

struct RunOutcome {
  SceneTrajectory truth;    // scene as loaded
  SceneTrajectory initial;  // after noise and overrides
  RefineResult result;
  nlohmann::json manifest;  // deterministic; no timings or output paths
  nlohmann::json timing;
};

/// 64-bit FNV-1a of a byte string, as 16 hex digits.
std::string digest(const std::string& bytes);
std::string fileDigest(const std::string& path);

nlohmann::json configToJson(const RefineConfig& config);
RefineConfig configFromJson(const nlohmann::json& j);
nlohmann::json historyToJson(const std::vector<EpochRecord>& history);

/// Applies noise and overrides to the loaded scene, then refines it.
RunOutcome runRefinement(const RunSpec& spec, const std::function<void(const EpochRecord&)>& onEpoch = {});

/// Writes initial.scene, refined.scene, field.txt, epochs.csv,
/// manifest.json and timing.json into `outDir` (created if missing). The
/// manifest gains digests of the written scene and field files.
void writeRunOutputs(RunOutcome& outcome, const std::string& outDir);

/// The run recorded in a manifest written by writeRunOutputs. Throws if the
/// scene file no longer matches the recorded digest.
RunSpec runSpecFromManifest(const nlohmann::json& manifest);

/// "FIELD 1" text: hidden width, input origin and the flat parameters.
void writeField(const std::string& path, const ForceField& field, const Vec3& origin);
ForceField readField(const std::string& path, Vec3* origin = nullptr);

std::string serializeScene(const SceneTrajectory& scene);

}  // namespace forcefit
