// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// fastfit command line: analyze / vocode / noise / metric / benchmark.

#include <CLI11.hpp>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fastfit/fastfit.hpp"

namespace {

using nlohmann::json;

// Reports go to a file as JSON lines, or to stdout for "-".
class ReportSink {
 public:
  explicit ReportSink(const std::string& path) : path_(path) {
    if (path_.empty() || path_ == "-") return;
    out_.open(path_, std::ios::app);
    if (!out_) fastfit::raise(fastfit::ErrorKind::io, "cannot open report file '" + path_ + "'");
  }
  void line(const json& j) {
    if (path_.empty()) return;
    if (path_ == "-") {
      std::printf("%s\n", j.dump().c_str());
      return;
    }
    out_ << j.dump() << "\n";
    if (!out_) fastfit::raise(fastfit::ErrorKind::io, "short write to report file '" + path_ + "'");
  }
  bool enabled() const { return !path_.empty(); }

 private:
  std::string path_;
  std::ofstream out_;
};

fastfit::PriorMode prior_from_string(const std::string& s) {
  if (s == "spectrogram") return fastfit::PriorMode::spectrogram;
  if (s == "envelope") return fastfit::PriorMode::envelope;
  if (s == "griffin-lim") return fastfit::PriorMode::griffin_lim;
  if (s == "identity") return fastfit::PriorMode::identity;
  fastfit::raise(fastfit::ErrorKind::usage, "unknown prior mode '" + s + "'");
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string input;
  std::string output;
  int n_fft = 1024;
  int hop = 256;
  int win = 1024;
  int n_mels = 100;
  double fmin = 0.0;
  double fmax = 12000.0;
};

int cmd_analyze(const AnalyzeArgs& a) {
  const fastfit::AudioBuffer audio = fastfit::read_wav(a.input);
  const fastfit::StftParams params = fastfit::make_stft_params(a.n_fft, a.hop, a.win);
  const fastfit::MelFilterbank fb =
      fastfit::mel_filterbank(audio.sample_rate, a.n_fft, a.n_mels, a.fmin, a.fmax);
  const fastfit::MelSpectrogram mel = fastfit::log_mel(audio, params, fb);
  fastfit::write_mel(a.output, mel);
  fastfit::log_info("analyze: " + a.input + " -> " + a.output + " (" +
                    std::to_string(mel.frames) + " frames)");
  return 0;
}

// ---------------------------------------------------------------------------

struct VocodeArgs {
  std::vector<std::string> inputs;
  std::string out;
  std::string out_dir;
  std::string weights_path;
  std::uint64_t random_seed = 0;
  bool random_seed_set = false;
  bool weights_set = false;
  int iterations = 3;
  std::string prior = "spectrogram";
  double gain_exponent = 0.5;
  std::string encoder = "stft";
  std::string representation = "cartesian";
  bool encoder_set = false;
  bool representation_set = false;
  std::uint64_t seed = 0;
  std::string report;
  int jobs = 1;
};

struct FileRecord {
  std::string input;
  std::string output;
  std::size_t frames = 0;
  double duration_s = 0.0;
  double wall_time_s = 0.0;
  double rtf = 0.0;
};

std::string output_path_for(const VocodeArgs& a, const std::string& input) {
  namespace fs = std::filesystem;
  if (!a.out.empty()) return a.out;
  fs::path p(input);
  p.replace_extension(".wav");
  if (!a.out_dir.empty()) p = fs::path(a.out_dir) / p.filename();
  return p.string();
}

// Builds the model and weights for a vocode/benchmark invocation. When a
// weights file is given the stored config wins; explicit flags that disagree
// with it are an error rather than silently ignored.
fastfit::WeightStore resolve_weights(const VocodeArgs& a) {
  if (a.weights_set && a.random_seed_set)
    fastfit::raise(fastfit::ErrorKind::usage, "--weights and --random-seed are mutually exclusive");
  if (a.iterations < 1)
    fastfit::raise(fastfit::ErrorKind::parameter, "--iterations must be at least 1");
  if (a.gain_exponent != 0.5 && a.gain_exponent != 1.0)
    fastfit::raise(fastfit::ErrorKind::parameter, "--gain-exponent must be 0.5 or 1.0");

  if (a.weights_set) {
    fastfit::WeightStore store = fastfit::read_weights(a.weights_path);
    if (a.encoder_set &&
        fastfit::encoder_kind_from_string(a.encoder) != store.config.encoder_kind)
      fastfit::raise(fastfit::ErrorKind::config,
                     "--encoder disagrees with the encoder stored in the weights file");
    if (a.representation_set &&
        fastfit::representation_from_string(a.representation) != store.config.stft_representation)
      fastfit::raise(fastfit::ErrorKind::config,
                     "--representation disagrees with the weights file");
    store.config.t_max = a.iterations;
    return store;
  }

  fastfit::ModelConfig config;
  config.encoder_kind = fastfit::encoder_kind_from_string(a.encoder);
  config.stft_representation = fastfit::representation_from_string(a.representation);
  config.t_max = a.iterations;
  fastfit::validate_config(config);
  fastfit::WeightStore store = fastfit::init_weights(config, a.random_seed);
  store.config.t_max = a.iterations;
  return store;
}

int cmd_vocode(const VocodeArgs& a) {
  if (a.inputs.empty()) fastfit::raise(fastfit::ErrorKind::usage, "no input mel files given");
  if (!a.out.empty() && a.inputs.size() > 1)
    fastfit::raise(fastfit::ErrorKind::usage, "--out needs exactly one input; use --out-dir");
  if (a.jobs < 1) fastfit::raise(fastfit::ErrorKind::usage, "--jobs must be at least 1");

  const fastfit::WeightStore store = resolve_weights(a);
  const fastfit::ModelConfig& config = store.config;
  fastfit::VocodeOptions options;
  options.prior = prior_from_string(a.prior);
  options.gain_exponent = a.gain_exponent;

  std::vector<FileRecord> records(a.inputs.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= a.inputs.size()) return;
      try {
        const fastfit::MelSpectrogram mel = fastfit::read_mel(a.inputs[i]);
        fastfit::VocodeStats stats;
        const fastfit::AudioBuffer wav =
            fastfit::vocode(mel, config, store, a.seed, options, &stats);
        const std::string out = output_path_for(a, a.inputs[i]);
        fastfit::write_wav(out, wav);
        FileRecord& r = records[i];
        r.input = a.inputs[i];
        r.output = out;
        r.frames = mel.frames;
        r.duration_s = wav.duration_s();
        r.wall_time_s = stats.prior_seconds + stats.denoise_seconds;
        r.rtf = r.wall_time_s > 0.0 ? r.duration_s / r.wall_time_s : 0.0;
        fastfit::log_info("vocode: " + r.input + " -> " + r.output + " (" +
                          std::to_string(stats.forward_calls) + " forward calls)");
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(a.inputs.size());
        return;
      }
    }
  };

  const std::size_t n_threads = std::min<std::size_t>(a.jobs, a.inputs.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  ReportSink sink(a.report);
  double rtf_sum = 0.0;
  for (const FileRecord& r : records) {
    rtf_sum += r.rtf;
    sink.line(json{{"type", "record"},
                   {"input", r.input},
                   {"output", r.output},
                   {"frames", r.frames},
                   {"duration_s", r.duration_s},
                   {"wall_time_s", r.wall_time_s},
                   {"rtf", r.rtf}});
  }
  sink.line(json{{"type", "aggregate"},
                 {"mean_rtf", rtf_sum / static_cast<double>(records.size())},
                 {"params", fastfit::param_count(config)},
                 {"encoder_kind", fastfit::to_string(config.encoder_kind)},
                 {"T", config.t_max},
                 {"files", records.size()}});
  return 0;
}

// ---------------------------------------------------------------------------

struct NoiseArgs {
  std::string input;
  std::string output;
  std::string prior = "spectrogram";
  std::uint64_t seed = 0;
};

int cmd_noise(const NoiseArgs& a) {
  const fastfit::MelSpectrogram mel = fastfit::read_mel(a.input);
  const fastfit::StftParams params =
      fastfit::make_stft_params(mel.n_fft, mel.hop, mel.win_length);
  const fastfit::MelFilterbank fb =
      fastfit::mel_filterbank(mel.sample_rate, mel.n_fft, mel.n_mels, mel.fmin, mel.fmax);
  fastfit::VocodeOptions options;
  options.prior = prior_from_string(a.prior);
  const std::size_t length = mel.frames * static_cast<std::size_t>(mel.hop);
  const fastfit::AudioBuffer y =
      fastfit::make_prior(mel, fb, params, length, options, a.seed);
  fastfit::write_wav(a.output, y);
  fastfit::log_info("noise: " + a.input + " -> " + a.output);
  return 0;
}

// ---------------------------------------------------------------------------

struct MetricArgs {
  std::string reference;
  std::string test;
  std::string report;
};

int cmd_metric(const MetricArgs& a) {
  const fastfit::AudioBuffer ref = fastfit::read_wav(a.reference);
  const fastfit::AudioBuffer test = fastfit::read_wav(a.test);
  const double value = fastfit::mr_stft(ref, test);
  const json j{{"type", "metric"},
               {"mr_stft", value},
               {"reference", a.reference},
               {"test", a.test}};
  std::printf("%s\n", j.dump().c_str());
  if (!a.report.empty() && a.report != "-") {
    ReportSink sink(a.report);
    sink.line(j);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchmarkArgs {
  double seconds = 6.0;
  int runs = 20;
  int iterations = 3;
  std::string encoder = "both";
  std::uint64_t seed = 0;
  std::string report;
};

// A mel with frames * hop == length, taken from seeded noise so the
// benchmark needs no dataset. The trailing centered frame is dropped to
// keep the vocoder's length contract.
fastfit::MelSpectrogram synthetic_mel(double seconds, std::uint64_t seed) {
  if (!(seconds > 0.0)) fastfit::raise(fastfit::ErrorKind::parameter, "--seconds must be positive");
  const fastfit::ModelConfig config;
  const int hop = config.analysis_hop;
  std::size_t length = static_cast<std::size_t>(std::llround(seconds * 24000.0));
  length = (length + hop - 1) / hop * hop;
  if (length == 0) length = hop;

  fastfit::NoiseStream stream(seed, 0);
  fastfit::AudioBuffer audio;
  audio.sample_rate = 24000;
  audio.samples.resize(length);
  for (float& v : audio.samples) v = static_cast<float>(0.1 * stream.gaussian());

  const fastfit::MelFilterbank fb =
      fastfit::mel_filterbank(24000, config.analysis_n_fft, config.n_mels, 0.0, 12000.0);
  fastfit::MelSpectrogram mel = fastfit::log_mel(audio, config.analysis_params(), fb);
  mel.frames = length / static_cast<std::size_t>(hop);
  mel.values.resize(mel.frames * static_cast<std::size_t>(mel.n_mels));
  return mel;
}

struct BenchVariant {
  fastfit::ModelConfig config;
  fastfit::WeightStore store;
  std::vector<double> walls;
};

BenchVariant make_variant(fastfit::EncoderKind kind, const BenchmarkArgs& a) {
  BenchVariant v;
  v.config.encoder_kind = kind;
  v.config.t_max = a.iterations;
  fastfit::validate_config(v.config);
  v.store = fastfit::init_weights(v.config, a.seed);
  return v;
}

struct VariantResult {
  std::string name;
  std::size_t params = 0;
  double mean_wall_s = 0.0;
  double mean_rtf = 0.0;
};

double timed_vocode(BenchVariant& v, const fastfit::MelSpectrogram& mel, std::uint64_t seed) {
  fastfit::VocodeStats stats;
  fastfit::vocode(mel, v.config, v.store, seed, {}, &stats);
  return stats.denoise_seconds;
}

VariantResult summarize_variant(const BenchVariant& v, const fastfit::MelSpectrogram& mel,
                                const BenchmarkArgs& a, ReportSink& sink) {
  const double duration = static_cast<double>(mel.frames) *
                          static_cast<double>(v.config.analysis_hop) / 24000.0;
  VariantResult result;
  result.name = fastfit::to_string(v.config.encoder_kind);
  result.params = fastfit::param_count(v.config);
  result.mean_wall_s = std::accumulate(v.walls.begin(), v.walls.end(), 0.0) /
                       static_cast<double>(v.walls.size());
  result.mean_rtf = result.mean_wall_s > 0.0 ? duration / result.mean_wall_s : 0.0;
  sink.line(json{{"type", "variant"},
                 {"encoder", result.name},
                 {"params", result.params},
                 {"runs", a.runs},
                 {"seconds", duration},
                 {"T", a.iterations},
                 {"mean_wall_time_s", result.mean_wall_s},
                 {"mean_rtf", result.mean_rtf},
                 {"measured_region", "denoise-loop"}});
  return result;
}

int cmd_benchmark(const BenchmarkArgs& a) {
  if (a.runs < 1) fastfit::raise(fastfit::ErrorKind::parameter, "--runs must be at least 1");
  if (a.iterations < 1)
    fastfit::raise(fastfit::ErrorKind::parameter, "--iterations must be at least 1");
  const fastfit::MelSpectrogram mel = synthetic_mel(a.seconds, a.seed);

  ReportSink sink(a.report.empty() ? "-" : a.report);
  const bool run_stft = a.encoder == "both" || a.encoder == "stft";
  const bool run_neural = a.encoder == "both" || a.encoder == "neural";

  std::vector<BenchVariant> variants;
  if (run_stft) variants.push_back(make_variant(fastfit::EncoderKind::stft_bank, a));
  if (run_neural) variants.push_back(make_variant(fastfit::EncoderKind::neural, a));

  // One discarded warm-up per variant, then the timed runs. Runs are
  // interleaved across variants so machine noise hits both alike; only the
  // denoising loop counts toward wall time.
  for (BenchVariant& v : variants) timed_vocode(v, mel, a.seed);
  for (int run = 0; run < a.runs; ++run) {
    for (BenchVariant& v : variants) {
      const double wall = timed_vocode(v, mel, a.seed + static_cast<std::uint64_t>(run) + 1);
      v.walls.push_back(wall);
      fastfit::log_debug("benchmark run " + std::to_string(run) + " (" +
                         fastfit::to_string(v.config.encoder_kind) +
                         "): " + std::to_string(wall) + " s");
    }
  }

  std::optional<VariantResult> stft_result, neural_result;
  for (const BenchVariant& v : variants) {
    const VariantResult r = summarize_variant(v, mel, a, sink);
    if (v.config.encoder_kind == fastfit::EncoderKind::stft_bank)
      stft_result = r;
    else
      neural_result = r;
  }

  fastfit::ModelConfig stft_config, neural_config;
  stft_config.encoder_kind = fastfit::EncoderKind::stft_bank;
  neural_config.encoder_kind = fastfit::EncoderKind::neural;
  const std::size_t params_stft = fastfit::param_count(stft_config);
  const std::size_t params_neural = fastfit::param_count(neural_config);

  json summary{{"type", "benchmark"},
               {"seconds", a.seconds},
               {"runs", a.runs},
               {"T", a.iterations},
               {"jobs", 1},
               {"params_stft", params_stft},
               {"params_neural", params_neural},
               {"param_ratio",
                static_cast<double>(params_stft) / static_cast<double>(params_neural)},
               {"measured_region", "denoise-loop"}};
  if (stft_result) {
    summary["mean_wall_stft_s"] = stft_result->mean_wall_s;
    summary["rtf_stft"] = stft_result->mean_rtf;
  }
  if (neural_result) {
    summary["mean_wall_neural_s"] = neural_result->mean_wall_s;
    summary["rtf_neural"] = neural_result->mean_rtf;
  }
  if (stft_result && neural_result && stft_result->mean_wall_s > 0.0)
    summary["speed_ratio"] = neural_result->mean_wall_s / stft_result->mean_wall_s;
  sink.line(summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FastFit vocoder tools"};
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  CLI::App* an = app.add_subcommand("analyze", "Extract a log-mel spectrogram from a WAV file");
  an->add_option("input", analyze.input, "24 kHz mono 16-bit WAV input")->required();
  an->add_option("output", analyze.output, "output .fmel path")->required();
  an->add_option("--n-fft", analyze.n_fft, "FFT size");
  an->add_option("--hop", analyze.hop, "frame shift in samples");
  an->add_option("--win", analyze.win, "window length in samples");
  an->add_option("--n-mels", analyze.n_mels, "mel channel count");
  an->add_option("--fmin", analyze.fmin, "lowest filter frequency in Hz");
  an->add_option("--fmax", analyze.fmax, "highest filter frequency in Hz");

  VocodeArgs vocode;
  CLI::App* vo = app.add_subcommand("vocode", "Synthesize waveforms from .fmel inputs");
  vo->add_option("inputs", vocode.inputs, ".fmel inputs")->required();
  vo->add_option("--out", vocode.out, "output WAV path (single input only)");
  vo->add_option("--out-dir", vocode.out_dir, "output directory for WAV files");
  CLI::Option* w = vo->add_option("--weights", vocode.weights_path, "weights .ffw file");
  CLI::Option* rs =
      vo->add_option("--random-seed", vocode.random_seed, "draw fresh weights from this seed");
  vo->add_option("--iterations", vocode.iterations, "denoising steps T");
  vo->add_option("--prior", vocode.prior, "prior noise shaping")
      ->check(CLI::IsMember({"spectrogram", "envelope", "griffin-lim", "identity"}));
  vo->add_option("--gain-exponent", vocode.gain_exponent, "power correction exponent (0.5 or 1.0)");
  CLI::Option* enc = vo->add_option("--encoder", vocode.encoder, "encoder variant")
                         ->check(CLI::IsMember({"stft", "neural", "no-skip"}));
  CLI::Option* rep =
      vo->add_option("--representation", vocode.representation, "STFT feature representation")
          ->check(CLI::IsMember({"cartesian", "magnitude"}));
  vo->add_option("--seed", vocode.seed, "noise seed");
  vo->add_option("--report", vocode.report, "append JSON-lines run report here ('-' for stdout)");
  vo->add_option("--jobs", vocode.jobs, "parallel worker count (file level)");

  NoiseArgs noise;
  CLI::App* no = app.add_subcommand("noise", "Emit the shaped prior noise for a mel input");
  no->add_option("input", noise.input, ".fmel input")->required();
  no->add_option("output", noise.output, "output WAV path")->required();
  no->add_option("--prior", noise.prior, "prior noise shaping")
      ->check(CLI::IsMember({"spectrogram", "envelope", "griffin-lim", "identity"}));
  no->add_option("--seed", noise.seed, "noise seed");

  MetricArgs metric;
  CLI::App* me = app.add_subcommand("metric", "Multi-resolution STFT distance between two WAVs");
  me->add_option("reference", metric.reference, "reference WAV")->required();
  me->add_option("test", metric.test, "WAV under test")->required();
  me->add_option("--report", metric.report, "also append the JSON line here");

  BenchmarkArgs bench;
  CLI::App* be = app.add_subcommand("benchmark", "Time both encoder variants on synthetic input");
  be->add_option("--seconds", bench.seconds, "synthetic segment length in seconds");
  be->add_option("--runs", bench.runs, "timed runs per variant (plus one warm-up)");
  be->add_option("--iterations", bench.iterations, "denoising steps T");
  be->add_option("--encoder", bench.encoder, "which variants to time")
      ->check(CLI::IsMember({"stft", "neural", "both"}));
  be->add_option("--seed", bench.seed, "seed for weights and synthetic input");
  be->add_option("--report", bench.report, "append JSON lines here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error(usage): %s\n", e.what());
    return 2;
  }

  try {
    vocode.weights_set = w->count() > 0;
    vocode.random_seed_set = rs->count() > 0;
    vocode.encoder_set = enc->count() > 0;
    vocode.representation_set = rep->count() > 0;
    if (an->parsed()) return cmd_analyze(analyze);
    if (vo->parsed()) return cmd_vocode(vocode);
    if (no->parsed()) return cmd_noise(noise);
    if (me->parsed()) return cmd_metric(metric);
    if (be->parsed()) return cmd_benchmark(bench);
  } catch (const fastfit::Error& e) {
    std::fprintf(stderr, "error(%s): %s\n", fastfit::error_kind_name(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error(internal): %s\n", e.what());
    return 3;
  }
  return 0;
}
