// astrodeconv: command-line front end for the deconvolution toolkit.
// Every run prints its fully resolved configuration to stderr first, so a
// log line is enough to reproduce the run bit for bit.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "astro/bench.hpp"
#include "astro/classical.hpp"
#include "astro/cnn.hpp"
#include "astro/cnn_io.hpp"
#include "astro/dataset.hpp"
#include "astro/degrade.hpp"
#include "astro/image.hpp"
#include "astro/image_io.hpp"
#include "astro/predict.hpp"
#include "astro/psf.hpp"
#include "astro/rng.hpp"
#include "astro/synth.hpp"
#include "astro/threads.hpp"

#ifndef ASTRODECONV_VERSION
#define ASTRODECONV_VERSION "0.0.0"
#endif

namespace {

using astro::Image;

using KvList = std::vector<std::pair<std::string, std::string>>;

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void echo_config(const std::string& sub, const KvList& kv) {
  std::ostringstream os;
  os << "# astrodeconv " << ASTRODECONV_VERSION << " " << sub
     << " threads=" << astro::max_threads();
  for (const auto& [k, v] : kv) os << " " << k << "=" << v;
  std::cerr << os.str() << "\n";
}

struct Corpus {
  std::vector<Image> images;
  std::vector<std::string> names;
};

bool has_image_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".imf1" || ext == ".pgm";
}

// Loads every *.imf1 / *.pgm in the directory, sorted by filename so image
// indices are stable, and max-normalizes each one (the pipeline treats corpus
// images as clean references with peak 1).
Corpus load_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error("corpus path is not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && has_image_extension(entry.path())) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw std::runtime_error("no corpus images (*.imf1, *.pgm) found in " + dir);
  Corpus corpus;
  for (const auto& f : files) {
    corpus.images.push_back(astro::normalize_max(astro::read_image(f.string())));
    corpus.names.push_back(f.filename().string());
  }
  return corpus;
}

void echo_corpus(const Corpus& corpus) {
  for (size_t i = 0; i < corpus.names.size(); ++i)
    std::cerr << "# corpus[" << i << "] = " << corpus.names[i] << "\n";
}

// --exclude accepts either a corpus index or a filename from the corpus dir.
std::optional<int> resolve_exclude(const std::string& arg, const Corpus& corpus) {
  if (arg.empty()) return std::nullopt;
  if (std::all_of(arg.begin(), arg.end(), [](unsigned char c) { return std::isdigit(c); })) {
    int idx = std::stoi(arg);
    if (idx < 0 || idx >= static_cast<int>(corpus.images.size()))
      throw std::runtime_error("--exclude index " + arg + " out of range for a corpus of " +
                               std::to_string(corpus.images.size()) + " images");
    return idx;
  }
  for (size_t i = 0; i < corpus.names.size(); ++i)
    if (corpus.names[i] == arg) return static_cast<int>(i);
  throw std::runtime_error("--exclude '" + arg + "' matches no corpus file");
}

astro::Psf load_psf(const std::string& path) {
  Image kernel = astro::read_image(path);
  return astro::Psf{kernel, 0.0, kernel.height};
}

// ---- subcommand option bags ------------------------------------------------

struct PsfOpts {
  int support = 64;
  double fwhm = 8.0;
  std::string out;
  std::string preview;
};

struct DegradeOpts {
  std::string psf, in, out;
  double sigma = 0.01;
  uint64_t seed = 0;
};

struct DatasetOpts {
  std::string corpus, psf, out, exclude;
  double sigma = 0.01;
  uint64_t seed = 0;
  int samples = 100000;
  int val = 50000;
};

struct TrainOpts {
  std::string corpus, psf, out, exclude, dataset, arch = "3cnn";
  double sigma = 0.01;
  uint64_t seed = 0;
  int samples = 100000;
  int val = 50000;
  double lr = 0.01;
  double momentum = 0.9;
  int batch = 50;
  int epochs = 30;
  bool no_early_stop = false;
};

struct PredictOpts {
  std::string model, in, out;
};

struct DeconvOpts {
  std::string method, psf, in, out, ref;
  double lambda = -1.0;  // <0 means "default for the method"
  int iters = -1;
  bool autotune = false;
};

struct FeatureMapOpts {
  std::string model, in, outdir;
  int layer = 1;
};

struct BenchOpts {
  std::string corpus, out, psf;
  std::string methods = "none,wiener,rl,tv,cnn1,cnn3";
  uint64_t seed = 0;
  double sigma = 0.01;
  int support = 64;
  double fwhm = 8.0;
  int samples = 100000;
  int val = 50000;
  double lr = 0.01;
  double momentum = 0.9;
  int batch = 50;
  int epochs = 30;
  bool quiet = false;
};

struct SynthOpts {
  std::string outdir;
  int count = 6;
  int size = 512;
  uint64_t seed = 0;
};

// ---- handlers ---------------------------------------------------------------

void run_psf(const PsfOpts& o) {
  echo_config("psf", {{"support", std::to_string(o.support)},
                      {"fwhm", fmt(o.fwhm)},
                      {"out", o.out},
                      {"preview", o.preview.empty() ? "-" : o.preview}});
  astro::Psf psf = astro::airy_kernel(o.support, o.fwhm);
  astro::write_imf1(psf.kernel, o.out);
  if (!o.preview.empty()) {
    Image mag = psf.kernel;
    float peak = astro::image_max(mag);
    for (float& v : mag.data) v = std::sqrt(v / peak);
    astro::write_pgm(mag, o.preview);
  }
  std::cerr << "# wrote " << o.out << " (sum=" << astro::image_sum(psf.kernel) << ")\n";
}

void run_degrade(const DegradeOpts& o) {
  echo_config("degrade", {{"psf", o.psf},
                          {"sigma", fmt(o.sigma)},
                          {"seed", std::to_string(o.seed)},
                          {"in", o.in},
                          {"out", o.out}});
  astro::Psf psf = load_psf(o.psf);
  Image img = astro::read_image(o.in);
  Image observed = astro::degrade(img, psf, astro::NoiseSpec{o.sigma, o.seed});
  astro::write_image(observed, o.out);
}

void run_dataset(const DatasetOpts& o) {
  Corpus corpus = load_corpus(o.corpus);
  std::optional<int> excluded = resolve_exclude(o.exclude, corpus);
  echo_config("dataset",
              {{"corpus", o.corpus},
               {"exclude", excluded ? std::to_string(*excluded) : "none"},
               {"psf", o.psf},
               {"sigma", fmt(o.sigma)},
               {"seed", std::to_string(o.seed)},
               {"samples", std::to_string(o.samples)},
               {"val", std::to_string(o.val)},
               {"out", o.out}});
  echo_corpus(corpus);
  astro::Psf psf = load_psf(o.psf);
  astro::DatasetSpec spec;
  spec.n_train = o.samples;
  spec.n_val = o.val;
  spec.seed = o.seed;
  spec.excluded_image = excluded;
  astro::Dataset ds =
      astro::build_dataset(corpus.images, psf, astro::NoiseSpec{o.sigma, o.seed}, spec);
  astro::save_dataset(ds, o.out);
  std::cerr << "# wrote " << o.out << " (" << ds.train.size() << " train, " << ds.val.size()
            << " val pairs)\n";
}

void run_train(const TrainOpts& o) {
  astro::Dataset ds;
  std::string exclude_echo = "none";
  if (!o.dataset.empty()) {
    ds = astro::load_dataset(o.dataset);
  } else {
    if (o.corpus.empty() || o.psf.empty())
      throw std::runtime_error("train needs either --dataset or both --corpus and --psf");
    Corpus corpus = load_corpus(o.corpus);
    std::optional<int> excluded = resolve_exclude(o.exclude, corpus);
    if (excluded) exclude_echo = std::to_string(*excluded);
    echo_corpus(corpus);
    astro::DatasetSpec spec;
    spec.n_train = o.samples;
    spec.n_val = o.val;
    spec.seed = o.seed;
    spec.excluded_image = excluded;
    ds = astro::build_dataset(corpus.images, load_psf(o.psf), astro::NoiseSpec{o.sigma, o.seed},
                              spec);
  }
  echo_config("train", {{"corpus", o.corpus.empty() ? "-" : o.corpus},
                        {"dataset", o.dataset.empty() ? "-" : o.dataset},
                        {"exclude", exclude_echo},
                        {"psf", o.psf.empty() ? "-" : o.psf},
                        {"sigma", fmt(o.sigma)},
                        {"arch", o.arch},
                        {"seed", std::to_string(o.seed)},
                        {"samples", std::to_string(o.samples)},
                        {"val", std::to_string(o.val)},
                        {"lr", fmt(o.lr)},
                        {"momentum", fmt(o.momentum)},
                        {"batch", std::to_string(o.batch)},
                        {"epochs", std::to_string(o.epochs)},
                        {"early_stop", o.no_early_stop ? "off" : "on"},
                        {"out", o.out}});

  astro::CnnModel init = o.arch == "1cnn" ? astro::build_1cnn(astro::derive_seed(o.seed, 1))
                                          : astro::build_3cnn(astro::derive_seed(o.seed, 1));
  astro::TrainConfig cfg;
  cfg.learning_rate = o.lr;
  cfg.momentum = o.momentum;
  cfg.batch_size = o.batch;
  cfg.max_epochs = o.epochs;
  cfg.early_stop = !o.no_early_stop;
  cfg.seed = astro::derive_seed(o.seed, 2);
  astro::TrainHistory history;
  astro::CnnModel model = astro::train(init, ds.train, ds.val, cfg, &history);
  for (int e = 0; e < history.epochs_run; ++e)
    std::cerr << "# epoch " << (e + 1) << " train_loss=" << history.train_loss[e]
              << " val_loss=" << history.val_loss[e] << "\n";
  std::cerr << "# best epoch " << history.best_epoch
            << (history.stopped_early ? " (early stop)" : "") << "\n";
  astro::save_model(model, o.out);
  std::cerr << "# wrote " << o.out << " (" << model.param_count() << " parameters)\n";
}

void run_predict(const PredictOpts& o) {
  echo_config("predict", {{"model", o.model}, {"in", o.in}, {"out", o.out}});
  astro::CnnModel model = astro::load_model(o.model);
  Image img = astro::read_image(o.in);
  astro::write_image(astro::predict_image(model, img), o.out);
}

void run_deconv(const DeconvOpts& o) {
  double lambda = o.lambda >= 0 ? o.lambda : 0.01;
  int iters = o.iters > 0 ? o.iters : (o.method == "tv" ? 100 : 10);
  echo_config("deconv", {{"method", o.method},
                         {"psf", o.psf},
                         {"lambda", fmt(lambda)},
                         {"iters", std::to_string(iters)},
                         {"autotune", o.autotune ? "on" : "off"},
                         {"ref", o.ref.empty() ? "-" : o.ref},
                         {"in", o.in},
                         {"out", o.out}});
  astro::Psf psf = load_psf(o.psf);
  Image y = astro::read_image(o.in);
  Image ref;
  if (!o.ref.empty()) ref = astro::read_image(o.ref);

  Image x;
  if (o.method == "wiener") {
    if (o.autotune) {
      auto tuned = astro::autotune_wiener(y, psf, ref);
      lambda = tuned.lambda;
      std::cerr << "# autotune lambda=" << lambda << " psnr=" << tuned.psnr_db << " dB\n";
    }
    x = astro::wiener_deconvolve(y, psf, astro::WienerParams{lambda});
  } else if (o.method == "rl") {
    if (o.autotune) {
      auto tuned = astro::autotune_rl(y, psf, ref);
      iters = tuned.iterations;
      std::cerr << "# autotune iterations=" << iters << " psnr=" << tuned.psnr_db << " dB\n";
    }
    astro::RlParams p;
    p.iterations = iters;
    x = astro::richardson_lucy(y, psf, p);
  } else {  // tv
    if (o.autotune) {
      auto tuned = astro::autotune_tv(y, psf, ref);
      lambda = tuned.lambda;
      std::cerr << "# autotune lambda=" << lambda << " psnr=" << tuned.psnr_db << " dB\n";
    }
    astro::TvParams p;
    p.lambda = lambda;
    p.iterations = iters;
    x = astro::tv_deconvolve(y, psf, p);
  }
  astro::write_image(x, o.out);
  if (!o.ref.empty()) std::cout << "psnr_db " << astro::psnr(ref, x) << "\n";
}

void run_featuremaps(const FeatureMapOpts& o) {
  echo_config("featuremaps", {{"model", o.model},
                              {"in", o.in},
                              {"layer", std::to_string(o.layer)},
                              {"outdir", o.outdir}});
  astro::CnnModel model = astro::load_model(o.model);
  Image img = astro::read_image(o.in);
  std::vector<Image> maps = astro::extract_feature_maps(model, img, o.layer);
  std::filesystem::create_directories(o.outdir);
  for (size_t c = 0; c < maps.size(); ++c) {
    Image vis = maps[c];
    float peak = astro::image_max(vis);
    if (peak > 0) {
      for (float& v : vis.data) v /= peak;
    }
    std::ostringstream name;
    name << "layer" << o.layer << "_map" << (c < 10 ? "0" : "") << c << ".pgm";
    astro::write_pgm(vis, (std::filesystem::path(o.outdir) / name.str()).string());
  }
  std::cerr << "# wrote " << maps.size() << " feature maps to " << o.outdir << "\n";
}

void run_bench(const BenchOpts& o) {
  Corpus corpus = load_corpus(o.corpus);
  echo_config("bench", {{"corpus", o.corpus},
                        {"methods", o.methods},
                        {"psf", o.psf.empty() ? "airy" : o.psf},
                        {"support", std::to_string(o.support)},
                        {"fwhm", fmt(o.fwhm)},
                        {"sigma", fmt(o.sigma)},
                        {"seed", std::to_string(o.seed)},
                        {"samples", std::to_string(o.samples)},
                        {"val", std::to_string(o.val)},
                        {"lr", fmt(o.lr)},
                        {"momentum", fmt(o.momentum)},
                        {"batch", std::to_string(o.batch)},
                        {"epochs", std::to_string(o.epochs)},
                        {"out", o.out}});
  echo_corpus(corpus);
  astro::Psf psf = o.psf.empty() ? astro::airy_kernel(o.support, o.fwhm) : load_psf(o.psf);

  astro::BenchConfig cfg;
  cfg.methods.clear();
  std::stringstream ss(o.methods);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) cfg.methods.push_back(tok);
  cfg.sigma = o.sigma;
  cfg.seed = o.seed;
  cfg.n_train = o.samples;
  cfg.n_val = o.val;
  cfg.train.learning_rate = o.lr;
  cfg.train.momentum = o.momentum;
  cfg.train.batch_size = o.batch;
  cfg.train.max_epochs = o.epochs;
  cfg.verbose = !o.quiet;

  astro::BenchReport report = astro::run_benchmark(corpus.images, psf, cfg);
  astro::write_csv(report, o.out);

  std::cout << "method        mean_psnr_db  mean_time_s\n";
  for (const auto& agg : astro::aggregate(report)) {
    std::ostringstream line;
    line << agg.method;
    while (line.str().size() < 14) line << ' ';
    std::cout << line.str() << agg.mean_psnr_db << "  " << agg.mean_time_s << "\n";
  }
  std::cerr << "# wrote " << o.out << " (" << report.rows.size() << " rows)\n";
}

void run_synth(const SynthOpts& o) {
  echo_config("synth", {{"outdir", o.outdir},
                        {"count", std::to_string(o.count)},
                        {"size", std::to_string(o.size)},
                        {"seed", std::to_string(o.seed)}});
  std::filesystem::create_directories(o.outdir);
  std::vector<Image> corpus = astro::synth_corpus(o.seed, o.count, o.size);
  for (size_t i = 0; i < corpus.size(); ++i) {
    std::ostringstream name;
    name << "synth" << (i < 10 ? "0" : "") << i << ".imf1";
    astro::write_imf1(corpus[i], (std::filesystem::path(o.outdir) / name.str()).string());
  }
  std::cerr << "# wrote " << corpus.size() << " images to " << o.outdir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"astrodeconv: astronomical image deconvolution toolkit"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.set_version_flag("--version", ASTRODECONV_VERSION);

  int threads = 0;
  app.add_option("--threads", threads,
                 "worker thread cap; 1 guarantees bit-reproducible output (0 = auto, honors "
                 "ASTRODECONV_THREADS)");

  std::map<const CLI::App*, std::function<void()>> handlers;

  auto psf_opts = std::make_shared<PsfOpts>();
  CLI::App* psf_cmd = app.add_subcommand("psf", "generate an Airy point spread function");
  psf_cmd->add_option("--support", psf_opts->support, "kernel side length, pixels")
      ->capture_default_str();
  psf_cmd->add_option("--fwhm", psf_opts->fwhm, "full width at half maximum, pixels")
      ->capture_default_str();
  psf_cmd->add_option("--out", psf_opts->out, "output kernel (IMF1)")->required();
  psf_cmd->add_option("--preview", psf_opts->preview, "optional sqrt-magnitude PGM");
  handlers[psf_cmd] = [psf_opts] { run_psf(*psf_opts); };

  auto deg_opts = std::make_shared<DegradeOpts>();
  CLI::App* deg_cmd = app.add_subcommand("degrade", "blur with a PSF and add Gaussian noise");
  deg_cmd->add_option("--psf", deg_opts->psf, "PSF kernel image")->required();
  deg_cmd->add_option("--sigma", deg_opts->sigma, "noise standard deviation")
      ->capture_default_str();
  deg_cmd->add_option("--seed", deg_opts->seed, "noise seed")->capture_default_str();
  deg_cmd->add_option("--in", deg_opts->in, "input image")->required();
  deg_cmd->add_option("--out", deg_opts->out, "output image")->required();
  handlers[deg_cmd] = [deg_opts] { run_degrade(*deg_opts); };

  auto ds_opts = std::make_shared<DatasetOpts>();
  CLI::App* ds_cmd = app.add_subcommand("dataset", "build and cache a patch dataset");
  ds_cmd->add_option("--corpus", ds_opts->corpus, "directory of clean images")->required();
  ds_cmd->add_option("--exclude", ds_opts->exclude, "leave-one-out image (index or filename)");
  ds_cmd->add_option("--psf", ds_opts->psf, "PSF kernel image")->required();
  ds_cmd->add_option("--sigma", ds_opts->sigma, "noise standard deviation")
      ->capture_default_str();
  ds_cmd->add_option("--seed", ds_opts->seed, "dataset seed")->capture_default_str();
  ds_cmd->add_option("--samples", ds_opts->samples, "training pairs")->capture_default_str();
  ds_cmd->add_option("--val", ds_opts->val, "validation pairs")->capture_default_str();
  ds_cmd->add_option("--out", ds_opts->out, "output cache (DSC1)")->required();
  handlers[ds_cmd] = [ds_opts] { run_dataset(*ds_opts); };

  auto tr_opts = std::make_shared<TrainOpts>();
  CLI::App* tr_cmd = app.add_subcommand("train", "train a CNN on leave-one-out patches");
  tr_cmd->add_option("--corpus", tr_opts->corpus, "directory of clean images");
  tr_cmd->add_option("--exclude", tr_opts->exclude, "leave-one-out image (index or filename)");
  tr_cmd->add_option("--psf", tr_opts->psf, "PSF kernel image");
  tr_cmd->add_option("--dataset", tr_opts->dataset, "pre-built DSC1 cache (replaces --corpus/--psf)");
  tr_cmd->add_option("--sigma", tr_opts->sigma, "noise standard deviation")
      ->capture_default_str();
  tr_cmd->add_option("--arch", tr_opts->arch, "architecture")
      ->check(CLI::IsMember({"3cnn", "1cnn"}))
      ->capture_default_str();
  tr_cmd->add_option("--seed", tr_opts->seed, "master seed (init, sampling, shuffling)")
      ->capture_default_str();
  tr_cmd->add_option("--samples", tr_opts->samples, "training pairs")->capture_default_str();
  tr_cmd->add_option("--val", tr_opts->val, "validation pairs")->capture_default_str();
  tr_cmd->add_option("--lr", tr_opts->lr, "learning rate")->capture_default_str();
  tr_cmd->add_option("--momentum", tr_opts->momentum, "Nesterov momentum")->capture_default_str();
  tr_cmd->add_option("--batch", tr_opts->batch, "minibatch size")->capture_default_str();
  tr_cmd->add_option("--epochs", tr_opts->epochs, "maximum epochs")->capture_default_str();
  tr_cmd->add_flag("--no-early-stop", tr_opts->no_early_stop, "disable early stopping");
  tr_cmd->add_option("--out", tr_opts->out, "output model (CNN1)")->required();
  handlers[tr_cmd] = [tr_opts] { run_train(*tr_opts); };

  auto pr_opts = std::make_shared<PredictOpts>();
  CLI::App* pr_cmd = app.add_subcommand("predict", "reconstruct a full image with a CNN model");
  pr_cmd->add_option("--model", pr_opts->model, "CNN1 model file")->required();
  pr_cmd->add_option("--in", pr_opts->in, "degraded input image")->required();
  pr_cmd->add_option("--out", pr_opts->out, "output image")->required();
  handlers[pr_cmd] = [pr_opts] { run_predict(*pr_opts); };

  auto dc_opts = std::make_shared<DeconvOpts>();
  CLI::App* dc_cmd = app.add_subcommand("deconv", "classical deconvolution baselines");
  dc_cmd->add_option("--method", dc_opts->method, "solver")
      ->check(CLI::IsMember({"wiener", "rl", "tv"}))
      ->required();
  dc_cmd->add_option("--psf", dc_opts->psf, "PSF kernel image")->required();
  dc_cmd->add_option("--lambda", dc_opts->lambda, "regularization weight (wiener, tv; default 0.01)");
  dc_cmd->add_option("--iters", dc_opts->iters, "iterations (rl default 10, tv default 100)");
  CLI::Option* ref_opt = dc_cmd->add_option("--ref", dc_opts->ref, "clean reference image");
  dc_cmd->add_flag("--autotune", dc_opts->autotune, "grid-search the parameter against --ref")
      ->needs(ref_opt);
  dc_cmd->add_option("--in", dc_opts->in, "degraded input image")->required();
  dc_cmd->add_option("--out", dc_opts->out, "output image")->required();
  handlers[dc_cmd] = [dc_opts] { run_deconv(*dc_opts); };

  auto fm_opts = std::make_shared<FeatureMapOpts>();
  CLI::App* fm_cmd = app.add_subcommand("featuremaps", "dump per-channel activations as PGMs");
  fm_cmd->add_option("--model", fm_opts->model, "CNN1 model file")->required();
  fm_cmd->add_option("--in", fm_opts->in, "input image")->required();
  fm_cmd->add_option("--layer", fm_opts->layer, "layer index, 1-based")->capture_default_str();
  fm_cmd->add_option("--outdir", fm_opts->outdir, "output directory")->required();
  handlers[fm_cmd] = [fm_opts] { run_featuremaps(*fm_opts); };

  auto be_opts = std::make_shared<BenchOpts>();
  CLI::App* be_cmd = app.add_subcommand("bench", "PSNR/time benchmark over a corpus");
  be_cmd->add_option("--corpus", be_opts->corpus, "directory of clean images")->required();
  be_cmd->add_option("--methods", be_opts->methods,
                     "comma list of none,wiener,rl,tv,cnn1,cnn3")
      ->capture_default_str();
  be_cmd->add_option("--psf", be_opts->psf, "PSF kernel image (default: generated Airy)");
  be_cmd->add_option("--support", be_opts->support, "generated PSF support")
      ->capture_default_str();
  be_cmd->add_option("--fwhm", be_opts->fwhm, "generated PSF FWHM")->capture_default_str();
  be_cmd->add_option("--sigma", be_opts->sigma, "noise standard deviation")
      ->capture_default_str();
  be_cmd->add_option("--seed", be_opts->seed, "master seed")->capture_default_str();
  be_cmd->add_option("--samples", be_opts->samples, "training pairs per model")
      ->capture_default_str();
  be_cmd->add_option("--val", be_opts->val, "validation pairs per model")->capture_default_str();
  be_cmd->add_option("--lr", be_opts->lr, "learning rate")->capture_default_str();
  be_cmd->add_option("--momentum", be_opts->momentum, "Nesterov momentum")
      ->capture_default_str();
  be_cmd->add_option("--batch", be_opts->batch, "minibatch size")->capture_default_str();
  be_cmd->add_option("--epochs", be_opts->epochs, "maximum epochs")->capture_default_str();
  be_cmd->add_flag("--quiet", be_opts->quiet, "suppress progress lines");
  be_cmd->add_option("--out", be_opts->out, "output CSV")->required();
  handlers[be_cmd] = [be_opts] { run_bench(*be_opts); };

  auto sy_opts = std::make_shared<SynthOpts>();
  CLI::App* sy_cmd = app.add_subcommand("synth", "generate a synthetic star-field corpus");
  sy_cmd->add_option("--outdir", sy_opts->outdir, "output directory")->required();
  sy_cmd->add_option("--count", sy_opts->count, "number of images")->capture_default_str();
  sy_cmd->add_option("--size", sy_opts->size, "image side length")->capture_default_str();
  sy_cmd->add_option("--seed", sy_opts->seed, "corpus seed")->capture_default_str();
  handlers[sy_cmd] = [sy_opts] { run_synth(*sy_opts); };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (threads > 0) astro::set_max_threads(threads);
  try {
    for (const CLI::App* sub : app.get_subcommands()) handlers.at(sub)();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
