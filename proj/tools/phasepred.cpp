/*
 * Copyright 2026 The phasepred Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// phasepred command-line driver.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "phasepred/phasepred.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace phasepred;

namespace {

constexpr const char* kOutputDirEnv = "PHASEPRED_OUTPUT_DIR";

struct FrontEnd {
  double window_ms = 25.0;
  double hop_ms = 10.0;
  int fft = 512;
  int sr = 16000;
  std::string window = "hann";

  StftConfig config() const {
    StftConfig c = StftConfig::from_ms(sr, window_ms, hop_ms, fft);
    c.window_kind = parse_window_kind(window);
    validate(c);
    return c;
  }

  json to_json() const {
    const StftConfig c = config();
    return {{"sample_rate", sr},        {"window_length", c.window_length},
            {"hop_length", c.hop_length}, {"fft_size", c.fft_size},
            {"window", to_string(c.window_kind)}, {"drop_dc", c.drop_dc}};
  }
};

struct ArchOptions {
  std::vector<int> channels{4, 8};
  int kernel = 3;
  int embedding_dim = 16;
  int pool = 2;
  int frames = 96;
  std::string heads = "phase";

  ArchConfig build(const StftConfig& cfg) const {
    ArchConfig a;
    a.channels = channels;
    a.kernel = kernel;
    a.embedding_dim = embedding_dim;
    a.pool = pool;
    a.heads = parse_heads(heads);
    a.input_frames = frames;
    a.input_bins = cfg.bins();
    validate(a);
    return a;
  }
};

json arch_json(const ArchConfig& a) {
  return {{"channels", a.channels},        {"kernel", a.kernel},
          {"embedding_dim", a.embedding_dim}, {"pool", a.pool},
          {"heads", to_string(a.heads)},   {"input_frames", a.input_frames},
          {"input_bins", a.input_bins}};
}

/// Files written by one command. Removed again if the command fails.
class Outputs {
 public:
  fs::path dir;

  fs::path add(const std::string& name) {
    fs::path p = dir / name;
    written_.push_back(p);
    return p;
  }
  void write(const std::string& name, const std::string& bytes) { detail::write_file(add(name), bytes); }
  void discard() {
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
  }
  json names() const {
    json out = json::array();
    for (const auto& p : written_) out.push_back(p.filename().string());
    return out;
  }

 private:
  std::vector<fs::path> written_;
};

struct Invocation {
  std::vector<std::string> argv;  // without the program name
  std::string out_dir;
  FrontEnd fe;
};

void write_manifest(Outputs& out, const Invocation& inv, const std::string& command,
                    json config, json seeds, json inputs) {
  json m;
  m["tool"] = "phasepred";
  m["version"] = PHASEPRED_VERSION;
  m["command"] = command;
  m["argv"] = inv.argv;
  m["output_dir"] = inv.out_dir;
  m["front_end"] = inv.fe.to_json();
  m["config"] = std::move(config);
  m["seeds"] = std::move(seeds);
  m["inputs"] = std::move(inputs);
  const fs::path path = out.add(command + ".manifest.json");
  m["outputs"] = out.names();
  detail::write_file(path, m.dump(2) + "\n");
}

std::vector<fs::path> list_wavs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<AudioClip> load_slices(const fs::path& dir, const StftConfig& cfg, int frames) {
  std::vector<AudioClip> slices;
  for (const auto& f : list_wavs(dir)) {
    for (auto& s : slice_clip(load_wav(f, cfg.sample_rate), cfg.samples_for(frames))) {
      slices.push_back(std::move(s));
    }
  }
  if (slices.empty()) {
    throw Error("empty corpus: no WAV slices of " + std::to_string(cfg.samples_for(frames)) +
                " samples in " + dir.string());
  }
  return slices;
}

MeanGroupDelay corpus_tau(const std::vector<AudioClip>& slices, const StftConfig& cfg) {
  std::vector<PhaseMap> phases;
  for (const auto& s : slices) phases.push_back(decompose(stft(s, cfg)).phase);
  return estimate_mean_group_delay(phases);
}

/// The first `frames` frames of the clip's spectrogram.
ComplexSpectrogram crop_frames(const ComplexSpectrogram& spec, const ArchConfig& arch) {
  if (spec.frames() < static_cast<std::size_t>(arch.input_frames) ||
      spec.bins() != static_cast<std::size_t>(arch.input_bins)) {
    throw Error("input spectrogram " + std::to_string(spec.frames()) + "x" +
                std::to_string(spec.bins()) + " does not fit the model input " +
                std::to_string(arch.input_frames) + "x" + std::to_string(arch.input_bins));
  }
  ComplexSpectrogram out{Grid<std::complex<double>>(arch.input_frames, spec.bins()), spec.config};
  std::copy_n(spec.values.data().begin(), out.values.size(), out.values.data().begin());
  return out;
}

std::string loss_csv(const std::vector<double>& history) {
  std::string s = "step,loss\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    s += std::to_string(i) + "," + format_double(history[i]) + "\n";
  }
  return s;
}

double tail_mean(const std::vector<double>& h, std::size_t n) {
  n = std::min(n, h.size());
  double s = 0.0;
  for (std::size_t i = h.size() - n; i < h.size(); ++i) s += h[i];
  return s / static_cast<double>(n);
}

/// --tau-bar, then the checkpoint's calibration, then the input itself.
MeanGroupDelay resolve_tau(std::optional<double> flag, const std::optional<Checkpoint>& ckpt,
                           const PhaseMap& phase, std::string& source) {
  if (flag) {
    source = "flag";
    return {wrap_angle(*flag)};
  }
  if (ckpt && ckpt->tau_bar) {
    source = "checkpoint";
    return {*ckpt->tau_bar};
  }
  source = "input";
  return estimate_mean_group_delay(std::span<const PhaseMap>(&phase, 1));
}

InstFreqMap model_if(const Checkpoint& ckpt, const MagnitudeMap& mag) {
  return forward(ckpt.params, normalize_magnitude(mag)).phase;
}

// ---- commands -------------------------------------------------------------

struct AnalyzeArgs {
  std::string input;
  bool csv = false;
};

void cmd_analyze(const AnalyzeArgs& a, const Invocation& inv, Outputs& out) {
  const StftConfig cfg = inv.fe.config();
  const auto spec = stft(load_wav(a.input, cfg.sample_rate), cfg);
  const auto [mag, phase] = decompose(spec);
  const MagnitudeMap norm = normalize_magnitude(mag);
  const InstFreqMap psi = smoothed_if(phase);
  const std::vector<std::pair<std::string, const RealGrid*>> grids = {
      {"magnitude", &mag.values}, {"magnitude_norm", &norm.values},
      {"phase", &phase.values},   {"if", &psi.values}};
  const GroupDelayMap gd = group_delay(phase);
  const WeightMap smooth = smoothness_weights(psi);
  auto emit = [&](const std::string& name, const RealGrid& g) {
    out.write(name + ".grid", encode_grid(g));
    if (a.csv) out.write(name + ".csv", grid_to_csv(g));
  };
  for (const auto& [name, g] : grids) emit(name, *g);
  emit("group_delay", gd.values);
  emit("smoothness", smooth.values);
  write_manifest(out, inv, "analyze",
                 {{"csv", a.csv}, {"norm_mean", norm.stats.mean}, {"norm_std", norm.stats.std}},
                 json::object(), {a.input});
  std::cout << "T=" << spec.frames() << " F=" << spec.bins() << "\n";
}

struct TrainArgs {
  std::string corpus;
  ArchOptions arch;
  double lr = 3e-3;
  int steps = 2000;
  int batch_size = 1;
  std::string optimizer = "adam";
  std::string weighting = "mag";
  double lambda_mag = 1.0;
  std::uint64_t seed = 0;
  std::string name = "model";
};

void cmd_train(const TrainArgs& a, const Invocation& inv, Outputs& out) {
  const StftConfig cfg = inv.fe.config();
  const ArchConfig arch = a.arch.build(cfg);
  TrainConfig tc;
  tc.learning_rate = a.lr;
  tc.steps = a.steps;
  tc.batch_size = a.batch_size;
  tc.optimizer = parse_optimizer(a.optimizer);
  tc.weight_strategy = parse_weight_strategy(a.weighting);
  tc.hybrid.lambda_mag = a.lambda_mag;
  tc.seed = a.seed;
  validate(tc);

  const auto slices = load_slices(a.corpus, cfg, arch.input_frames);
  std::vector<TrainExample> dataset;
  for (const auto& s : slices) dataset.push_back(make_example(stft(s, cfg), tc.weight_strategy));
  const MeanGroupDelay tau = corpus_tau(slices, cfg);

  TrainResult r = train(init_model(arch, a.seed), dataset, tc);
  out.write(a.name + ".ckpt", encode_checkpoint({r.params, tau.value}));
  out.write(a.name + ".loss.csv", loss_csv(r.loss_history));
  const double final_loss = tail_mean(r.loss_history, 20);
  write_manifest(out, inv, "train",
                 {{"arch", arch_json(arch)},
                  {"learning_rate", tc.learning_rate},
                  {"steps", tc.steps},
                  {"batch_size", tc.batch_size},
                  {"optimizer", to_string(tc.optimizer)},
                  {"weighting", to_string(tc.weight_strategy)},
                  {"lambda_mag", tc.hybrid.lambda_mag},
                  {"slices", slices.size()},
                  {"tau_bar", tau.value},
                  {"initial_loss", r.loss_history.front()},
                  {"final_loss", final_loss}},
                 {{"seed", a.seed}}, {a.corpus});
  std::cout << "slices=" << slices.size() << " tau_bar=" << format_double(tau.value)
            << " initial_loss=" << format_double(r.loss_history.front())
            << " final_loss=" << format_double(final_loss) << "\n";
}

struct InitArgs {
  ArchOptions arch;
  std::uint64_t seed = 0;
  bool zero = false;
  std::optional<double> tau_bar;
  std::string name = "model";
};

void cmd_init(const InitArgs& a, const Invocation& inv, Outputs& out) {
  const ArchConfig arch = a.arch.build(inv.fe.config());
  Checkpoint ck{a.zero ? zero_model(arch) : init_model(arch, a.seed), a.tau_bar};
  if (a.zero && !ck.tau_bar) ck.tau_bar = 0.0;
  if (ck.tau_bar) ck.tau_bar = wrap_angle(*ck.tau_bar);
  out.write(a.name + ".ckpt", encode_checkpoint(ck));
  json cfg = {{"arch", arch_json(arch)}, {"zero", a.zero}};
  cfg["tau_bar"] = ck.tau_bar ? json(*ck.tau_bar) : json(nullptr);
  write_manifest(out, inv, "init", cfg, {{"seed", a.seed}}, json::array());
  std::cout << "parameters=" << param_count(ck.params) << "\n";
}

struct CalibrateArgs {
  std::string corpus;
  int frames = 96;
};

void cmd_calibrate(const CalibrateArgs& a, const Invocation& inv, Outputs& out) {
  const StftConfig cfg = inv.fe.config();
  const auto slices = load_slices(a.corpus, cfg, a.frames);
  const MeanGroupDelay tau = corpus_tau(slices, cfg);
  out.write("tau_bar.json", json{{"tau_bar", tau.value}, {"slices", slices.size()}}.dump(2) + "\n");
  write_manifest(out, inv, "calibrate", {{"frames", a.frames}}, json::object(), {a.corpus});
  std::cout << "tau_bar=" << format_double(tau.value) << "\n";
}

struct InvertArgs {
  std::string input;
  std::string checkpoint;
  bool oracle = false;
  int gl_iters = 32;
  std::optional<double> tau_bar;
  std::string name = "reconstructed";
};

void cmd_invert(const InvertArgs& a, const Invocation& inv, Outputs& out) {
  const StftConfig cfg = inv.fe.config();
  if (a.checkpoint.empty() && !a.oracle) {
    throw Error("invert: pass --checkpoint or --oracle-phase");
  }
  std::optional<Checkpoint> ckpt;
  if (!a.checkpoint.empty()) ckpt = load_checkpoint(a.checkpoint);
  ComplexSpectrogram spec = stft(load_wav(a.input, cfg.sample_rate), cfg);
  if (ckpt) spec = crop_frames(spec, ckpt->params.arch);
  const auto [mag, phase] = decompose(spec);

  const InstFreqMap psi = a.oracle ? smoothed_if(phase) : model_if(*ckpt, mag);
  std::string tau_source;
  const MeanGroupDelay tau = resolve_tau(a.tau_bar, ckpt, phase, tau_source);
  const Reconstruction rec = reconstruct_waveform(mag, psi, tau, a.gl_iters, cfg);

  save_wav(out.add(a.name + ".wav"), rec.audio);
  out.write(a.name + ".trace.csv", trace_to_csv(rec.trace));
  json inputs = {a.input};
  if (ckpt) inputs.push_back(a.checkpoint);
  write_manifest(out, inv, "invert",
                 {{"gl_iters", a.gl_iters},
                  {"phase_source", a.oracle ? "oracle" : "model"},
                  {"tau_bar", tau.value},
                  {"tau_bar_source", tau_source},
                  {"frames", spec.frames()},
                  {"samples", rec.audio.size()}},
                 json::object(), inputs);
  std::cout << "frames=" << spec.frames() << " samples=" << rec.audio.size()
            << " log_sc_k0=" << format_double(rec.trace.records.front().log_sc)
            << " log_sc_final=" << format_double(rec.trace.records.back().log_sc) << "\n";
}

struct GlbenchArgs {
  std::string input;
  std::vector<std::string> checkpoints;
  std::vector<std::string> labels;
  bool oracle = false;
  int iters = 100;
  std::uint64_t seed = 0;
  std::optional<double> tau_bar;
};

void cmd_glbench(const GlbenchArgs& a, const Invocation& inv, Outputs& out) {
  const StftConfig cfg = inv.fe.config();
  if (!a.labels.empty() && a.labels.size() != a.checkpoints.size()) {
    throw Error("glbench: --label count must match --checkpoint count");
  }
  std::vector<Checkpoint> ckpts;
  for (const auto& c : a.checkpoints) ckpts.push_back(load_checkpoint(c));
  for (const auto& c : ckpts) {
    if (c.params.arch.input_frames != ckpts.front().params.arch.input_frames) {
      throw Error("glbench: checkpoints disagree on the input frame count");
    }
  }
  ComplexSpectrogram spec = stft(load_wav(a.input, cfg.sample_rate), cfg);
  if (!ckpts.empty()) spec = crop_frames(spec, ckpts.front().params.arch);
  const auto [mag, phase] = decompose(spec);

  std::vector<std::pair<std::string, ConvergenceTrace>> curves;
  curves.emplace_back("zero", griffin_lim(mag, PhaseMap{RealGrid(mag.frames(), mag.bins())},
                                          a.iters, cfg).trace);
  Rng rng(a.seed);
  PhaseMap random{RealGrid(mag.frames(), mag.bins())};
  for (double& v : random.values.data()) v = rng.uniform(-kPi, kPi);
  curves.emplace_back("random", griffin_lim(mag, random, a.iters, cfg).trace);

  json tau_sources = json::object();
  if (a.oracle) {
    std::string src;
    const MeanGroupDelay tau = resolve_tau(a.tau_bar, std::nullopt, phase, src);
    tau_sources["oracle"] = src;
    curves.emplace_back("oracle", reconstruct_waveform(mag, smoothed_if(phase), tau, a.iters, cfg).trace);
  }
  for (std::size_t i = 0; i < ckpts.size(); ++i) {
    const std::string label =
        a.labels.empty() ? fs::path(a.checkpoints[i]).stem().string() : a.labels[i];
    std::string src;
    const MeanGroupDelay tau = resolve_tau(a.tau_bar, ckpts[i], phase, src);
    tau_sources[label] = src;
    curves.emplace_back(label, reconstruct_waveform(mag, model_if(ckpts[i], mag), tau, a.iters, cfg).trace);
  }

  std::string table = "k";
  for (const auto& [label, trace] : curves) table += "," + label;
  table += "\n";
  for (int k = 0; k <= a.iters; ++k) {
    table += std::to_string(k);
    for (const auto& [label, trace] : curves) table += "," + format_double(trace.records[k].log_sc);
    table += "\n";
  }
  out.write("glbench.csv", table);
  for (const auto& [label, trace] : curves) out.write("trace_" + label + ".csv", trace_to_csv(trace));

  json inputs = {a.input};
  for (const auto& c : a.checkpoints) inputs.push_back(c);
  write_manifest(out, inv, "glbench",
                 {{"iters", a.iters}, {"oracle_phase", a.oracle}, {"tau_bar_source", tau_sources},
                  {"frames", spec.frames()}},
                 {{"seed", a.seed}}, inputs);
  std::cout << "rows=" << a.iters + 1;
  for (const auto& [label, trace] : curves) {
    std::cout << " " << label << "_k0=" << format_double(trace.records.front().log_sc);
  }
  std::cout << "\n";
}

struct ProbeArgs {
  std::string checkpoint;
  std::string split;
  bool shuffle = false;
  std::uint64_t seed = 0;
};

struct SplitRow {
  fs::path path;
  std::string label;
  bool train = true;
};

std::vector<SplitRow> read_split(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("missing split file: " + file.string());
  std::vector<SplitRow> rows;
  std::string line;
  std::getline(in, line);
  if (line.rfind("path,label,split", 0) != 0) {
    throw Error("split file must start with the header path,label,split");
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string path, label, which;
    std::getline(ss, path, ',');
    std::getline(ss, label, ',');
    std::getline(ss, which, ',');
    if (which != "train" && which != "test") {
      throw Error("split file: split must be train or test, got '" + which + "'");
    }
    fs::path p(path);
    if (p.is_relative()) p = file.parent_path() / p;
    rows.push_back({p, label, which == "train"});
  }
  return rows;
}

void cmd_probe(const ProbeArgs& a, const Invocation& inv, Outputs& out) {
  const StftConfig cfg = inv.fe.config();
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const auto rows = read_split(a.split);
  std::map<std::string, int> classes;
  for (const auto& r : rows) classes.emplace(r.label, 0);
  int next = 0;
  for (auto& [name, id] : classes) id = next++;

  std::vector<std::vector<double>> train_x, test_x;
  std::vector<int> train_y, test_y;
  const std::size_t slice_len = cfg.samples_for(ck.params.arch.input_frames);
  for (const auto& r : rows) {
    const auto slices = slice_clip(load_wav(r.path, cfg.sample_rate), slice_len);
    if (slices.empty()) throw Error("probe: clip shorter than one slice: " + r.path.string());
    for (const auto& s : slices) {
      const auto spec = crop_frames(stft(s, cfg), ck.params.arch);
      auto e = embed(ck.params, normalize_magnitude(decompose(spec).magnitude)).values;
      (r.train ? train_x : test_x).push_back(std::move(e));
      (r.train ? train_y : test_y).push_back(classes.at(r.label));
    }
  }
  if (a.shuffle) {
    Rng rng(a.seed);
    rng.shuffle(train_y);
  }
  const ProbeResult pr = linear_probe(train_x, train_y, test_x, test_y);
  json report = {{"train_accuracy", pr.train_accuracy}, {"test_accuracy", pr.test_accuracy},
                 {"classes", classes.size()},           {"train_size", train_x.size()},
                 {"test_size", test_x.size()},          {"iterations", pr.iterations},
                 {"shuffled_labels", a.shuffle}};
  out.write("probe.json", report.dump(2) + "\n");
  write_manifest(out, inv, "probe", {{"shuffle_labels", a.shuffle}}, {{"seed", a.seed}},
                 {a.checkpoint, a.split});
  std::cout << "train_accuracy=" << format_double(pr.train_accuracy)
            << " test_accuracy=" << format_double(pr.test_accuracy)
            << " classes=" << classes.size() << "\n";
}

struct SynthArgs {
  std::string kind = "tones";
  int count = 20;
  std::uint64_t seed = 0;
};

void cmd_synth(const SynthArgs& a, const Invocation& inv, Outputs& out) {
  detail::require(a.count > 0, "synth: --count must be > 0");
  char name[64];
  if (a.kind == "tones") {
    const auto clips = synth::tone_corpus(a.count, a.seed);
    for (std::size_t i = 0; i < clips.size(); ++i) {
      std::snprintf(name, sizeof name, "tone_%03zu.wav", i);
      save_wav(out.add(name), clips[i]);
    }
  } else if (a.kind == "families") {
    const auto clips = synth::family_corpus(a.count, a.seed);
    std::string split = "path,label,split\n";
    for (std::size_t i = 0; i < clips.size(); ++i) {
      const char* family = synth::kFamilyNames[clips[i].label];
      std::snprintf(name, sizeof name, "%s_%03zu.wav", family, i / 3);
      save_wav(out.add(name), clips[i].clip);
      split += std::string(name) + "," + family + "," + ((i / 3) % 3 == 2 ? "test" : "train") + "\n";
    }
    out.write("split.csv", split);
  } else {
    throw Error("synth: --kind must be tones or families");
  }
  write_manifest(out, inv, "synth", {{"kind", a.kind}, {"count", a.count}}, {{"seed", a.seed}},
                 json::array());
}

int run(std::vector<std::string> args);

int cmd_rerun(const std::string& manifest_path, const std::string& out_override) {
  const json m = json::parse(detail::read_file(manifest_path));
  std::vector<std::string> args = m.at("argv").get<std::vector<std::string>>();
  if (!args.empty() && args.front() == "rerun") throw Error("rerun: manifest records a rerun");
  args.push_back("--out");
  args.push_back(out_override.empty() ? m.at("output_dir").get<std::string>() : out_override);
  return run(std::move(args));
}

// ---- option wiring --------------------------------------------------------

void add_front_end(CLI::App* c, FrontEnd& fe) {
  c->add_option("--window-ms", fe.window_ms, "Analysis window length in ms")->capture_default_str();
  c->add_option("--hop-ms", fe.hop_ms, "Hop length in ms")->capture_default_str();
  c->add_option("--fft", fe.fft, "FFT size")->capture_default_str();
  c->add_option("--sr", fe.sr, "Expected sample rate in Hz")->capture_default_str();
  c->add_option("--window", fe.window, "hann | hamming | rectangular")->capture_default_str();
}

void add_arch(CLI::App* c, ArchOptions& a) {
  c->add_option("--channels", a.channels, "Encoder channels per layer")
      ->delimiter(',')
      ->capture_default_str();
  c->add_option("--kernel", a.kernel, "Convolution kernel size")->capture_default_str();
  c->add_option("--embedding-dim", a.embedding_dim, "Embedding size d")->capture_default_str();
  c->add_option("--pool", a.pool, "Max-pool factor per layer")->capture_default_str();
  c->add_option("--frames", a.frames, "Input frames T")->capture_default_str();
  c->add_option("--heads", a.heads, "phase | hybrid")->capture_default_str();
}

std::string default_out_dir() {
  const char* env = std::getenv(kOutputDirEnv);
  return env && *env ? env : "phasepred_out";
}

int run(std::vector<std::string> args) {
  CLI::App app{"Phase prediction from STFT magnitudes"};
  app.set_version_flag("--version", PHASEPRED_VERSION);
  app.require_subcommand(1);

  Invocation inv;
  inv.argv = args;
  std::string out_dir;
  auto common = [&](CLI::App* c) {
    add_front_end(c, inv.fe);
    c->add_option("--out", out_dir,
                  std::string("Output directory (default $") + kOutputDirEnv + " or phasepred_out)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  };

  AnalyzeArgs analyze;
  auto* c_analyze = app.add_subcommand("analyze", "Write magnitude, phase, IF, group-delay and weight grids");
  c_analyze->add_option("input", analyze.input, "Input WAV")->required();
  c_analyze->add_flag("--csv", analyze.csv, "Also write CSV copies of every grid");
  common(c_analyze);

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train the phase predictor on a WAV corpus");
  c_train->add_option("corpus", tr.corpus, "Directory of WAV files")->required();
  add_arch(c_train, tr.arch);
  c_train->add_option("--lr", tr.lr, "Learning rate")->capture_default_str();
  c_train->add_option("--steps", tr.steps, "Optimizer steps")->capture_default_str();
  c_train->add_option("--batch-size", tr.batch_size, "Examples per step")->capture_default_str();
  c_train->add_option("--optimizer", tr.optimizer, "adam | sgd")->capture_default_str();
  c_train->add_option("--weighting", tr.weighting, "none | mag | sqrtmag | smoothness")
      ->capture_default_str();
  c_train->add_option("--lambda-mag", tr.lambda_mag, "Magnitude term weight (hybrid)")
      ->capture_default_str();
  c_train->add_option("--seed", tr.seed, "Initialization and shuffling seed")->capture_default_str();
  c_train->add_option("--name", tr.name, "Output file stem")->capture_default_str();
  common(c_train);

  InitArgs in;
  auto* c_init = app.add_subcommand("init", "Write an untrained checkpoint");
  add_arch(c_init, in.arch);
  c_init->add_option("--seed", in.seed, "Initialization seed")->capture_default_str();
  c_init->add_flag("--zero", in.zero, "All-zero parameters (tau_bar 0 unless given)");
  c_init->add_option("--tau-bar", in.tau_bar, "Mean group delay to store");
  c_init->add_option("--name", in.name, "Output file stem")->capture_default_str();
  common(c_init);

  CalibrateArgs cal;
  auto* c_cal = app.add_subcommand("calibrate", "Estimate the mean group delay of a corpus");
  c_cal->add_option("corpus", cal.corpus, "Directory of WAV files")->required();
  c_cal->add_option("--frames", cal.frames, "Frames per slice")->capture_default_str();
  common(c_cal);

  InvertArgs iv;
  auto* c_inv = app.add_subcommand("invert", "Reconstruct audio from magnitude and predicted phase");
  c_inv->add_option("input", iv.input, "Input WAV")->required();
  c_inv->add_option("--checkpoint", iv.checkpoint, "Model checkpoint");
  c_inv->add_flag("--oracle-phase", iv.oracle, "Use the true IF instead of the model");
  c_inv->add_option("--gl-iters", iv.gl_iters, "Griffin-Lim iterations")->capture_default_str();
  c_inv->add_option("--tau-bar", iv.tau_bar, "Override the mean group delay");
  c_inv->add_option("--name", iv.name, "Output file stem")->capture_default_str();
  common(c_inv);

  GlbenchArgs gb;
  auto* c_gb = app.add_subcommand("glbench", "Griffin-Lim convergence for several initializations");
  c_gb->add_option("input", gb.input, "Input WAV")->required();
  c_gb->add_option("--checkpoint", gb.checkpoints, "Model checkpoint (repeatable)");
  c_gb->add_option("--label", gb.labels, "Column label per checkpoint (repeatable)");
  c_gb->add_flag("--oracle-phase", gb.oracle, "Add a column initialized from the true IF");
  c_gb->add_option("--iters", gb.iters, "Griffin-Lim iterations")->capture_default_str();
  c_gb->add_option("--seed", gb.seed, "Random-phase seed")->capture_default_str();
  c_gb->add_option("--tau-bar", gb.tau_bar, "Override the mean group delay");
  common(c_gb);

  ProbeArgs pb;
  auto* c_probe = app.add_subcommand("probe", "Linear probe on frozen embeddings");
  c_probe->add_option("--checkpoint", pb.checkpoint, "Model checkpoint")->required();
  c_probe->add_option("--split", pb.split, "CSV with header path,label,split")->required();
  c_probe->add_flag("--shuffle-labels", pb.shuffle, "Permute training labels (control)");
  c_probe->add_option("--seed", pb.seed, "Label permutation seed")->capture_default_str();
  common(c_probe);

  SynthArgs sy;
  auto* c_synth = app.add_subcommand("synth", "Write a synthetic tone corpus");
  c_synth->add_option("--kind", sy.kind, "tones | families")->capture_default_str();
  c_synth->add_option("--count", sy.count, "Clips (tones) or clips per class (families)")
      ->capture_default_str();
  c_synth->add_option("--seed", sy.seed, "Corpus seed")->capture_default_str();
  common(c_synth);

  std::string manifest, rerun_out;
  auto* c_rerun = app.add_subcommand("rerun", "Repeat the command recorded in a manifest");
  c_rerun->add_option("manifest", manifest, "Manifest JSON")->required();
  c_rerun->add_option("--out", rerun_out, "Write to this directory instead");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (c_rerun->parsed()) {
    try {
      return cmd_rerun(manifest, rerun_out);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }

  inv.out_dir = out_dir.empty() ? default_out_dir() : out_dir;
  if (out_dir.empty()) {
    inv.argv.push_back("--out");
    inv.argv.push_back(inv.out_dir);
  }
  Outputs out;
  out.dir = inv.out_dir;
  try {
    fs::create_directories(out.dir);
    if (c_analyze->parsed()) cmd_analyze(analyze, inv, out);
    else if (c_train->parsed()) cmd_train(tr, inv, out);
    else if (c_init->parsed()) cmd_init(in, inv, out);
    else if (c_cal->parsed()) cmd_calibrate(cal, inv, out);
    else if (c_inv->parsed()) cmd_invert(iv, inv, out);
    else if (c_gb->parsed()) cmd_glbench(gb, inv, out);
    else if (c_probe->parsed()) cmd_probe(pb, inv, out);
    else if (c_synth->parsed()) cmd_synth(sy, inv, out);
  } catch (const std::exception& e) {
    out.discard();
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  return run(std::vector<std::string>(argv + 1, argv + argc));
}
