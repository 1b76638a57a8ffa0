#include "forcefit/pipeline.hpp"
#include "forcefit/scene.hpp"
#include "forcefit/scenegen.hpp"
#include "forcefit/shapes.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace forcefit;
namespace fs = std::filesystem;

namespace {

fs::path tempDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("forcefit_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const SceneTrajectory& grasp() {
  static const SceneTrajectory s = generateStaticGrasp(ObjectShape::Cylinder, GraspStyle::Wrap, 4, 8).scene;
  return s;
}

}  // namespace

TEST(SceneIo, RoundTripIsExact) {
  std::stringstream ss;
  writeScene(ss, grasp());
  const SceneTrajectory back = readScene(ss);
  EXPECT_EQ(back.objectDof, grasp().objectDof);
  EXPECT_EQ(back.handDof, grasp().handDof);
  EXPECT_EQ(back.truthContact, grasp().truthContact);
  EXPECT_EQ(back.mass, grasp().mass);
  EXPECT_EQ(back.frameDt, grasp().frameDt);
  ASSERT_TRUE(back.certificate.has_value());
  ASSERT_EQ(back.certificate->forces.size(), grasp().certificate->forces.size());
  EXPECT_EQ(back.certificate->meanForce(), grasp().certificate->meanForce());
  EXPECT_EQ(serializeScene(back), serializeScene(grasp()));
}

TEST(SceneIo, RejectsMalformedInput) {
  std::istringstream bad("SCENE 2\n");
  EXPECT_THROW(readScene(bad), std::runtime_error);
  std::istringstream unknown("SCENE 1\nframes 1\nbogus 3\n");
  EXPECT_THROW(readScene(unknown), std::runtime_error);
  std::istringstream truncated("SCENE 1\nframes 2\nobject_dof\n0 0 0 0 0 0\n");
  EXPECT_THROW(readScene(truncated), std::runtime_error);
}

TEST(SceneIo, ExternalMeshIsRelativeToSceneFile) {
  const fs::path dir = tempDir("mesh");
  writeObj((dir / "cube.obj").string(), makeBox(Vec3::Zero(), Vec3(0.02, 0.02, 0.02), {2, 2, 2}));
  SceneTrajectory s;
  s.objectMesh = readObj((dir / "cube.obj").string());
  s.objectMeshRef = "cube.obj";
  s.hand = builtinHand();
  s.objectDof = Eigen::MatrixXd::Zero(3, kObjectDof);
  s.handDof = Eigen::MatrixXd::Zero(3, kHandDof);
  writeScene((dir / "s.scene").string(), s);
  const SceneTrajectory back = readScene((dir / "s.scene").string());
  EXPECT_EQ(back.objectMesh.vertexCount(), s.objectMesh.vertexCount());
  EXPECT_THROW(loadObjectMesh("builtin:torus"), std::exception);
}

TEST(Digest, Fnv1a) {
  EXPECT_EQ(digest(""), "cbf29ce484222325");
  EXPECT_EQ(digest("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(digest("foobar"), "85944171f73967e8");
}

TEST(Config, JsonRoundTrip) {
  RefineConfig c;
  c.epochs = 17;
  c.lrPose = 3e-5;
  c.weights.smooth = 123.0;
  c.distanceMode = DistanceMode::VertexOnly;
  c.shareFingerPose = false;
  c.seed = 0xfffffffffffull;
  const RefineConfig back = configFromJson(configToJson(c));
  EXPECT_EQ(configToJson(back), configToJson(c));
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.distanceMode, DistanceMode::VertexOnly);
  nlohmann::json bad = configToJson(c);
  bad["distance_mode"] = "psychic";
  EXPECT_ANY_THROW(configFromJson(bad));
}

TEST(Field, FileRoundTrip) {
  const fs::path dir = tempDir("field");
  ForceField f(6, 3);
  writeField((dir / "f.txt").string(), f, Vec3(0.1, -0.2, 0.3));
  Vec3 origin;
  const ForceField g = readField((dir / "f.txt").string(), &origin);
  EXPECT_EQ(g.parameters(), f.parameters());
  EXPECT_EQ(origin, Vec3(0.1, -0.2, 0.3));
}

TEST(Pipeline, OutputsAndManifestRerun) {
  const fs::path dir = tempDir("pipeline");
  writeScene((dir / "in.scene").string(), grasp());
  RunSpec spec;
  spec.scenePath = (dir / "in.scene").string();
  spec.noiseSeed = 5;
  spec.config.epochs = 2;
  spec.config.batchFrames = 2;
  spec.config.sampleVertices = 100;
  spec.config.hidden = 8;
  RunOutcome a = runRefinement(spec);
  EXPECT_NE(a.initial.handDof, a.truth.handDof);
  EXPECT_EQ(a.result.history.size(), 2u);
  writeRunOutputs(a, (dir / "a").string());
  for (const char* f : {"initial.scene", "refined.scene", "field.txt", "epochs.csv", "manifest.json", "timing.json"}) {
    EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
  }
  nlohmann::json manifest;
  std::ifstream((dir / "a" / "manifest.json").string()) >> manifest;
  EXPECT_EQ(manifest.dump().find((dir / "a").string()), std::string::npos);
  RunOutcome b = runRefinement(runSpecFromManifest(manifest));
  writeRunOutputs(b, (dir / "b").string());
  std::ifstream ma((dir / "a" / "manifest.json").string()), mb((dir / "b" / "manifest.json").string());
  std::stringstream sa, sb;
  sa << ma.rdbuf();
  sb << mb.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
  const SceneTrajectory refined = readScene((dir / "a" / "refined.scene").string());
  EXPECT_EQ(refined.handDof, a.result.scene.handDof);

  // A changed scene file no longer matches the manifest.
  std::ofstream((dir / "in.scene").string(), std::ios::app) << "\n";
  EXPECT_ANY_THROW(runSpecFromManifest(manifest));
}
