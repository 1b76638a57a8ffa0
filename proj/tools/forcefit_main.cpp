#include "forcefit/eval.hpp"
#include "forcefit/parallel.hpp"
#include "forcefit/pipeline.hpp"
#include "forcefit/report.hpp"
#include "forcefit/scenegen.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace forcefit;

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::mutex ioMutex;

void say(const std::string& line) {
  std::lock_guard<std::mutex> lock(ioMutex);
  std::cout << line << std::endl;
}

void warn(const std::string& line) {
  std::lock_guard<std::mutex> lock(ioMutex);
  std::cerr << line << std::endl;
}

void writeText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string shape = "sphere";
  std::string grasp = "pinch";
  int frames = 30;
  std::uint64_t seed = 0;
  int count = 1;
  std::string out = ".";
  std::optional<double> mu, mass, fmax, frameDt;
  int jobs = 1;
};

int runSynth(const SynthArgs& a) {
  ObjectShape shape;
  GraspStyle style;
  try {
    shape = parseObjectShape(a.shape);
    style = parseGraspStyle(a.grasp);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (a.frames < 3) throw UsageError("--frames must be at least 3");
  if (a.count < 1) throw UsageError("--count must be at least 1");
  GraspOptions options;
  if (a.mu) options.consts.mu = *a.mu;
  if (a.mass) options.consts.mass = *a.mass;
  if (a.fmax) options.consts.fMax = *a.fmax;
  if (a.frameDt) options.consts.frameDt = *a.frameDt;
  try {
    options.consts.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  fs::create_directories(a.out);
  std::vector<std::string> errors(a.count);
  parallelFor(
      static_cast<std::size_t>(a.count),
      [&](std::size_t k) {
        const std::uint64_t seed = a.seed + k;
        try {
          const SyntheticScene s = generateStaticGrasp(shape, style, a.frames, seed, options);
          const fs::path path = fs::path(a.out) / (a.shape + "_" + a.grasp + "_" + std::to_string(seed) + ".scene");
          writeScene(path.string(), s.scene);
          say(path.string());
        } catch (const std::exception& e) {
          errors[k] = "seed " + std::to_string(seed) + ": " + e.what();
        }
      },
      static_cast<unsigned>(std::max(1, a.jobs)));
  int failed = 0;
  for (const auto& e : errors) {
    if (!e.empty()) {
      warn("error: " + e);
      ++failed;
    }
  }
  return failed ? kRuntimeError : 0;
}

// ---------------------------------------------------------------- refine

struct RefineArgs {
  std::vector<std::string> scenes;
  std::string model;
  std::string out = "refine_out";
  std::string manifest;
  std::optional<std::uint64_t> noiseSeed;
  std::optional<double> mass, frameDt;
  RefineConfig config;
  int jobs = 1;
  bool progress = false;
};

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

int runRefine(RefineArgs a) {
  std::vector<RunSpec> specs;
  if (!a.manifest.empty()) {
    if (!a.scenes.empty()) throw UsageError("--manifest and --scene are exclusive");
    std::ifstream in(a.manifest);
    if (!in) throw std::runtime_error("cannot open " + a.manifest);
    nlohmann::json m;
    try {
      m = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(a.manifest + ": " + e.what());
    }
    RunSpec spec = runSpecFromManifest(m);
    spec.config.threads = a.config.threads;
    specs.push_back(spec);
  } else {
    if (a.scenes.empty()) throw UsageError("--scene or --manifest is required");
    try {
      a.config.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (a.mass && !(*a.mass > 0.0)) throw UsageError("--mass must be positive");
    if (a.frameDt && !(*a.frameDt > 0.0)) throw UsageError("--frame-dt must be positive");
    for (const auto& s : a.scenes) {
      if (!fs::exists(s)) throw UsageError("scene file not found: " + s);
      RunSpec spec;
      spec.scenePath = s;
      spec.modelPath = a.model;
      spec.noiseSeed = a.noiseSeed;
      spec.mass = a.mass;
      spec.frameDt = a.frameDt;
      spec.config = a.config;
      specs.push_back(spec);
    }
  }
  if (!a.model.empty() && !fs::exists(a.model)) throw UsageError("model file not found: " + a.model);

  std::vector<std::string> errors(specs.size());
  parallelFor(
      specs.size(),
      [&](std::size_t k) {
        const RunSpec& spec = specs[k];
        const fs::path outDir = specs.size() == 1 ? fs::path(a.out) : fs::path(a.out) / stem(spec.scenePath);
        try {
          auto onEpoch = [&](const EpochRecord& r) {
            if (!a.progress) return;
            std::ostringstream line;
            line << stem(spec.scenePath) << " epoch " << r.epoch << " z " << r.z << " E " << r.energy.total;
            say(line.str());
          };
          RunOutcome o = runRefinement(spec, onEpoch);
          writeRunOutputs(o, outDir.string());
          for (const auto& w : o.result.warnings) warn("warning: " + spec.scenePath + ": " + w);
          std::ostringstream line;
          line << outDir.string() << " final E " << o.result.history.back().energy.total;
          say(line.str());
        } catch (const RefineError& e) {
          errors[k] = spec.scenePath + ": " + e.what() + " (term " + e.term() + ")";
        } catch (const std::exception& e) {
          errors[k] = spec.scenePath + ": " + e.what();
        }
      },
      static_cast<unsigned>(std::max(1, a.jobs)));
  int failed = 0;
  for (const auto& e : errors) {
    if (!e.empty()) {
      warn("error: " + e);
      ++failed;
    }
  }
  return failed ? kRuntimeError : 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::vector<std::string> runs;
  std::string truth;
  std::string initial;
  std::string refined;
  std::string out;
  double z = 0.002;
  double p0 = 0.5;
  int bins = 10;
  bool plotCurves = false;
};

struct EvalInput {
  std::string name;
  std::string truth, initial, refined;
};

int runEval(const EvalArgs& a) {
  std::vector<EvalInput> inputs;
  for (const auto& run : a.runs) {
    const fs::path dir(run);
    std::ifstream in(dir / "manifest.json");
    if (!in) throw UsageError("no manifest.json in " + run);
    const auto m = nlohmann::json::parse(in);
    inputs.push_back({dir.filename().string(), m.at("scene").at("path").get<std::string>(),
                      (dir / "initial.scene").string(), (dir / "refined.scene").string()});
  }
  if (!a.truth.empty()) {
    if (a.refined.empty()) throw UsageError("--truth needs --refined");
    inputs.push_back({stem(a.truth), a.truth, a.initial, a.refined});
  }
  if (inputs.empty() && !a.plotCurves) throw UsageError("nothing to evaluate: give --run or --truth/--refined");
  const ContactParams contact{a.z, a.p0};
  try {
    contact.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (a.bins < 1) throw UsageError("--bins must be positive");

  std::vector<EvalRow> rows;
  std::vector<EvalDelta> deltas;
  int skipped = 0;
  for (const auto& in : inputs) {
    const SceneTrajectory truth = readScene(in.truth);
    std::optional<EvalRow> initialRow;
    if (!in.initial.empty()) {
      initialRow = evaluateRow(in.name, "initial", readScene(in.initial), truth, contact);
      rows.push_back(*initialRow);
    }
    const EvalRow refinedRow = evaluateRow(in.name, "refined", readScene(in.refined), truth, contact);
    rows.push_back(refinedRow);
    if (!refinedRow.metrics || (initialRow && !initialRow->metrics)) {
      warn("warning: " + in.name + ": skipped (" + (refinedRow.metrics ? initialRow->note : refinedRow.note) + ")");
      ++skipped;
      continue;
    }
    if (initialRow) {
      deltas.push_back({in.name, initialRow->metrics->mpjpe, refinedRow.metrics->mpjpe - initialRow->metrics->mpjpe,
                        refinedRow.metrics->prAuc - initialRow->metrics->prAuc,
                        refinedRow.metrics->rocAuc - initialRow->metrics->rocAuc});
    }
  }
  const EvalSummary summary = summarize(deltas, skipped);
  std::vector<double> dMpjpe, dPr;
  for (const auto& d : deltas) {
    dMpjpe.push_back(d.mpjpe);
    dPr.push_back(d.prAuc);
  }
  const std::string rowsCsv = formatRowsCsv(rows);
  const std::string summaryCsv = formatSummaryCsv(summary);
  std::cout << rowsCsv;
  if (!deltas.empty()) std::cout << "\n" << summaryCsv;
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    const fs::path dir(a.out);
    writeText(dir / "metrics.csv", rowsCsv);
    if (!deltas.empty()) {
      writeText(dir / "deltas.csv", formatDeltasCsv(deltas));
      writeText(dir / "delta_histogram.csv",
                formatHistogramCsv(histogram(dMpjpe, a.bins), histogram(dPr, a.bins)));
      writeText(dir / "summary.csv", summaryCsv);
    }
  }
  if (a.plotCurves) {
    const fs::path dir(a.out.empty() ? "." : a.out);
    fs::create_directories(dir);
    const std::vector<double> widths{0.030, 0.015, 0.008, 0.004, 0.002};
    writeText(dir / "contact_curves.csv", contactCurvesCsv(widths, a.p0, -0.01, 0.03, 201));
    writeText(dir / "contact_curves.svg", contactCurvesSvg(widths, a.p0, -0.01, 0.03, 201));
  }
  return 0;
}

void addRefineFlags(CLI::App* cmd, RefineArgs& a) {
  RefineConfig& c = a.config;
  cmd->add_option("--scene", a.scenes, "Input scene file(s)");
  cmd->add_option("--model", a.model, "Skinning model file overriding the scene's model");
  cmd->add_option("--out", a.out, "Output directory")->capture_default_str();
  cmd->add_option("--manifest", a.manifest, "Re-run the configuration recorded in a manifest");
  cmd->add_option("--epochs", c.epochs)->capture_default_str();
  cmd->add_option("--batch-frames", c.batchFrames)->capture_default_str();
  cmd->add_option("--sample-vertices", c.sampleVertices)->capture_default_str();
  cmd->add_option("--z-start", c.zStart, "Initial contact width (m)")->capture_default_str();
  cmd->add_option("--z-end", c.zEnd, "Final contact width (m)")->capture_default_str();
  cmd->add_option("--p0", c.p0)->capture_default_str();
  cmd->add_option("--fmax", c.fMax, "Normal force cap (N)")->capture_default_str();
  cmd->add_option("--mu", c.mu, "Static friction coefficient")->capture_default_str();
  cmd->add_option("--mass", a.mass, "Object mass override (kg)");
  cmd->add_option("--frame-dt", a.frameDt, "Frame interval override (s)");
  cmd->add_option("--gamma-phy", c.weights.physics)->capture_default_str();
  cmd->add_option("--gamma-fr", c.weights.forceReg)->capture_default_str();
  cmd->add_option("--gamma-pen", c.weights.penetration)->capture_default_str();
  cmd->add_option("--gamma-dev", c.weights.deviation)->capture_default_str();
  cmd->add_option("--gamma-smooth", c.weights.smooth)->capture_default_str();
  cmd->add_option("--lr-pose", c.lrPose)->capture_default_str();
  cmd->add_option("--lr-field", c.lrField)->capture_default_str();
  cmd->add_option("--hidden", c.hidden, "Force-field hidden width")->capture_default_str();
  cmd->add_option("--seed", c.seed, "Field initialization and sampling seed")->capture_default_str();
  cmd->add_option("--noise-seed", a.noiseSeed, "Multiply finger pose coefficients by N(1, 0.1) noise");
  cmd->add_option("--share-finger-pose", c.shareFingerPose)->capture_default_str();
  cmd->add_option("--jobs", a.jobs, "Scenes refined concurrently")->capture_default_str();
  cmd->add_flag("--progress", a.progress, "Print one line per epoch");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-based refinement of hand-object poses with a learned contact force field"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synthCmd = app.add_subcommand("synth", "Generate synthetic static-grasp scenes");
  synthCmd->add_option("--shape", synth.shape, "sphere, box or cylinder")->capture_default_str();
  synthCmd->add_option("--grasp", synth.grasp, "pinch, wrap or wrap-side")->capture_default_str();
  synthCmd->add_option("--frames", synth.frames)->capture_default_str();
  synthCmd->add_option("--seed", synth.seed)->capture_default_str();
  synthCmd->add_option("--count", synth.count, "Scenes with seeds seed, seed+1, ...")->capture_default_str();
  synthCmd->add_option("--out", synth.out, "Output directory")->capture_default_str();
  synthCmd->add_option("--mu", synth.mu);
  synthCmd->add_option("--mass", synth.mass);
  synthCmd->add_option("--fmax", synth.fmax);
  synthCmd->add_option("--frame-dt", synth.frameDt);
  synthCmd->add_option("--jobs", synth.jobs)->capture_default_str();

  RefineArgs refineArgs;
  auto* refineCmd = app.add_subcommand("refine", "Refine scene poses by energy minimization");
  addRefineFlags(refineCmd, refineArgs);

  EvalArgs evalArgs;
  auto* evalCmd = app.add_subcommand("eval", "Compare initial and refined poses with the truth");
  evalCmd->add_option("--run", evalArgs.runs, "Refine output directories");
  evalCmd->add_option("--truth", evalArgs.truth, "Truth scene");
  evalCmd->add_option("--initial", evalArgs.initial, "Initial scene");
  evalCmd->add_option("--refined", evalArgs.refined, "Refined scene");
  evalCmd->add_option("--out", evalArgs.out, "Directory for CSV reports");
  evalCmd->add_option("--z", evalArgs.z, "Contact width for predicted maps (m)")->capture_default_str();
  evalCmd->add_option("--p0", evalArgs.p0)->capture_default_str();
  evalCmd->add_option("--bins", evalArgs.bins, "Delta histogram bins")->capture_default_str();
  evalCmd->add_flag("--plot-curves", evalArgs.plotCurves, "Write contact probability curves (CSV and SVG)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*synthCmd) return runSynth(synth);
    if (*refineCmd) return runRefine(refineArgs);
    if (*evalCmd) return runEval(evalArgs);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << std::endl;
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kRuntimeError;
  }
  return kUsageError;
}
