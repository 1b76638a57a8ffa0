#include "forcefit/pipeline.hpp"

#include "forcefit/eval.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace forcefit {

namespace fs = std::filesystem;
using nlohmann::json;

std::string digest(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

namespace {

std::string readAll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void writeAll(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

std::string fileDigest(const std::string& path) { return digest(readAll(path)); }

json configToJson(const RefineConfig& c) {
  return json{
      {"epochs", c.epochs},
      {"batch_frames", c.batchFrames},
      {"sample_vertices", c.sampleVertices},
      {"lr_pose", c.lrPose},
      {"lr_field", c.lrField},
      {"beta1", c.beta1},
      {"beta2", c.beta2},
      {"epsilon_adam", c.epsilonAdam},
      {"share_finger_pose", c.shareFingerPose},
      {"seed", c.seed},
      {"gamma_phy", c.weights.physics},
      {"gamma_fr", c.weights.forceReg},
      {"gamma_pen", c.weights.penetration},
      {"gamma_dev", c.weights.deviation},
      {"gamma_smooth", c.weights.smooth},
      {"d_pen", c.weights.dPen},
      {"z_start", c.zStart},
      {"z_end", c.zEnd},
      {"p0", c.p0},
      {"fmax", c.fMax},
      {"mu", c.mu},
      {"hidden", c.hidden},
      {"include_hand", c.includeHand},
      {"distance_mode", c.distanceMode == DistanceMode::Surface ? "surface" : "vertex"},
  };
}

RefineConfig configFromJson(const json& j) {
  RefineConfig c;
  c.epochs = j.at("epochs").get<int>();
  c.batchFrames = j.at("batch_frames").get<int>();
  c.sampleVertices = j.at("sample_vertices").get<int>();
  c.lrPose = j.at("lr_pose").get<double>();
  c.lrField = j.at("lr_field").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.epsilonAdam = j.at("epsilon_adam").get<double>();
  c.shareFingerPose = j.at("share_finger_pose").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.weights.physics = j.at("gamma_phy").get<double>();
  c.weights.forceReg = j.at("gamma_fr").get<double>();
  c.weights.penetration = j.at("gamma_pen").get<double>();
  c.weights.deviation = j.at("gamma_dev").get<double>();
  c.weights.smooth = j.at("gamma_smooth").get<double>();
  c.weights.dPen = j.at("d_pen").get<double>();
  c.zStart = j.at("z_start").get<double>();
  c.zEnd = j.at("z_end").get<double>();
  c.p0 = j.at("p0").get<double>();
  c.fMax = j.at("fmax").get<double>();
  c.mu = j.at("mu").get<double>();
  c.hidden = j.at("hidden").get<int>();
  c.includeHand = j.at("include_hand").get<bool>();
  const auto mode = j.at("distance_mode").get<std::string>();
  if (mode != "surface" && mode != "vertex") throw std::invalid_argument("unknown distance mode '" + mode + "'");
  c.distanceMode = mode == "surface" ? DistanceMode::Surface : DistanceMode::VertexOnly;
  return c;
}

json historyToJson(const std::vector<EpochRecord>& history) {
  json rows = json::array();
  for (const auto& r : history) {
    rows.push_back({{"epoch", r.epoch},
                    {"z", r.z},
                    {"batches", r.batches},
                    {"physics", r.energy.physics},
                    {"force_reg", r.energy.forceReg},
                    {"penetration", r.energy.penetration},
                    {"deviation", r.energy.deviation},
                    {"smooth", r.energy.smooth},
                    {"total", r.energy.total}});
  }
  return rows;
}

std::string serializeScene(const SceneTrajectory& scene) {
  std::ostringstream out;
  writeScene(out, scene);
  return out.str();
}

RunOutcome runRefinement(const RunSpec& spec, const std::function<void(const EpochRecord&)>& onEpoch) {
  spec.config.validate();
  RunOutcome o;
  o.truth = readScene(spec.scenePath);
  o.initial = o.truth;
  if (!spec.modelPath.empty()) {
    o.initial.hand = loadHandModel(spec.modelPath);
    o.initial.modelRef = fs::absolute(spec.modelPath).string();
  }
  if (spec.mass) o.initial.mass = *spec.mass;
  if (spec.frameDt) o.initial.frameDt = *spec.frameDt;
  if (spec.noiseSeed) o.initial.handDof = injectFingerNoise(o.truth.handDof, *spec.noiseSeed);
  o.initial.certificate.reset();
  o.initial.validate();

  o.result = refine(o.initial, spec.config, onEpoch);

  json& m = o.manifest;
  m["format"] = "forcefit-manifest 1";
  m["command"] = "refine";
  m["scene"] = {{"path", fs::absolute(spec.scenePath).string()}, {"digest", fileDigest(spec.scenePath)}};
  if (!spec.modelPath.empty()) {
    m["model"] = {{"path", fs::absolute(spec.modelPath).string()}, {"digest", fileDigest(spec.modelPath)}};
  }
  m["noise_seed"] = spec.noiseSeed ? json(*spec.noiseSeed) : json(nullptr);
  m["mass"] = o.initial.mass;
  m["frame_dt"] = o.initial.frameDt;
  m["frames"] = o.initial.frameCount();
  m["config"] = configToJson(spec.config);
  m["epochs"] = historyToJson(o.result.history);
  m["warnings"] = o.result.warnings;

  json& t = o.timing;
  double total = 0.0;
  for (double s : o.result.epochSeconds) total += s;
  t["epoch_seconds"] = o.result.epochSeconds;
  t["total_seconds"] = total;
  return o;
}

void writeField(const std::string& path, const ForceField& field, const Vec3& origin) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "FIELD 1\nhidden " << field.hidden() << "\norigin " << origin.x() << ' ' << origin.y() << ' '
      << origin.z() << "\n";
  const Eigen::VectorXd p = field.parameters();
  out << "parameters " << p.size() << "\n";
  for (int k = 0; k < p.size(); ++k) out << p[k] << "\n";
  out << "end\n";
  writeAll(path, out.str());
}

ForceField readField(const std::string& path, Vec3* origin) {
  std::istringstream in(readAll(path));
  std::string word;
  int version = 0, hidden = 0;
  long count = 0;
  Vec3 o;
  if (!(in >> word >> version) || word != "FIELD" || version != 1) throw std::runtime_error(path + ": not a FIELD 1 file");
  if (!(in >> word >> hidden) || word != "hidden" || hidden < 1) throw std::runtime_error(path + ": bad hidden width");
  if (!(in >> word >> o.x() >> o.y() >> o.z()) || word != "origin") throw std::runtime_error(path + ": bad origin");
  if (!(in >> word >> count) || word != "parameters") throw std::runtime_error(path + ": bad parameter count");
  ForceField field(hidden);
  if (count != field.parameterCount()) throw std::runtime_error(path + ": parameter count does not match width");
  Eigen::VectorXd p(count);
  for (long k = 0; k < count; ++k) {
    if (!(in >> p[k])) throw std::runtime_error(path + ": truncated parameters");
  }
  if (!(in >> word) || word != "end") throw std::runtime_error(path + ": missing end");
  field.setParameters(p);
  if (origin) *origin = o;
  return field;
}

void writeRunOutputs(RunOutcome& o, const std::string& outDir) {
  fs::create_directories(outDir);
  const fs::path dir(outDir);
  // Scene files reference meshes relative to their own directory; builtin
  // references need no rewriting, file references become absolute.
  auto portable = [](SceneTrajectory s, const std::string& sceneDir) {
    if (s.objectMeshRef.rfind("builtin:", 0) != 0 && !fs::path(s.objectMeshRef).is_absolute()) {
      s.objectMeshRef = fs::absolute(fs::path(sceneDir) / s.objectMeshRef).lexically_normal().string();
    }
    if (s.modelRef.rfind("builtin:", 0) != 0 && !fs::path(s.modelRef).is_absolute()) {
      s.modelRef = fs::absolute(fs::path(sceneDir) / s.modelRef).lexically_normal().string();
    }
    return s;
  };
  const std::string sceneDir = fs::path(o.manifest.at("scene").at("path").get<std::string>()).parent_path().string();
  const std::string initialText = serializeScene(portable(o.initial, sceneDir));
  const std::string refinedText = serializeScene(portable(o.result.scene, sceneDir));
  writeAll((dir / "initial.scene").string(), initialText);
  writeAll((dir / "refined.scene").string(), refinedText);
  writeField((dir / "field.txt").string(), o.result.field, o.result.fieldOrigin);

  std::ostringstream csv;
  csv << std::setprecision(17) << "epoch,z,batches,physics,force_reg,penetration,deviation,smooth,total\n";
  for (const auto& r : o.result.history) {
    csv << r.epoch << ',' << r.z << ',' << r.batches << ',' << r.energy.physics << ',' << r.energy.forceReg << ','
        << r.energy.penetration << ',' << r.energy.deviation << ',' << r.energy.smooth << ',' << r.energy.total
        << '\n';
  }
  writeAll((dir / "epochs.csv").string(), csv.str());

  o.manifest["outputs"] = {{"initial.scene", digest(initialText)},
                           {"refined.scene", digest(refinedText)},
                           {"field.txt", fileDigest((dir / "field.txt").string())},
                           {"epochs.csv", digest(csv.str())}};
  writeAll((dir / "manifest.json").string(), o.manifest.dump(2) + "\n");
  writeAll((dir / "timing.json").string(), o.timing.dump(2) + "\n");
}

RunSpec runSpecFromManifest(const json& m) {
  if (m.value("format", "") != "forcefit-manifest 1") throw std::invalid_argument("not a forcefit manifest");
  RunSpec spec;
  spec.scenePath = m.at("scene").at("path").get<std::string>();
  const std::string recorded = m.at("scene").at("digest").get<std::string>();
  if (fileDigest(spec.scenePath) != recorded) {
    throw std::runtime_error("scene " + spec.scenePath + " changed since the manifest was written");
  }
  if (m.contains("model")) {
    spec.modelPath = m.at("model").at("path").get<std::string>();
    if (fileDigest(spec.modelPath) != m.at("model").at("digest").get<std::string>()) {
      throw std::runtime_error("model " + spec.modelPath + " changed since the manifest was written");
    }
  }
  if (!m.at("noise_seed").is_null()) spec.noiseSeed = m.at("noise_seed").get<std::uint64_t>();
  spec.mass = m.at("mass").get<double>();
  spec.frameDt = m.at("frame_dt").get<double>();
  spec.config = configFromJson(m.at("config"));
  return spec;
}

}  // namespace forcefit
