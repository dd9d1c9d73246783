#include "astro/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "astro/classical.hpp"
#include "astro/dataset.hpp"
#include "astro/degrade.hpp"
#include "astro/predict.hpp"
#include "astro/rng.hpp"

namespace astro {

namespace {

constexpr uint64_t kDegradeSalt = 0x500;
constexpr uint64_t kDatasetSalt = 0x600;
constexpr uint64_t kInitSalt = 0x700;
constexpr uint64_t kTrainSalt = 0x800;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string format_g(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<MethodAggregate> aggregate(const BenchReport& report) {
  std::vector<MethodAggregate> out;
  std::vector<int> counts;
  for (const auto& row : report.rows) {
    size_t k = 0;
    for (; k < out.size(); ++k) {
      if (out[k].method == row.method) break;
    }
    if (k == out.size()) {
      out.push_back(MethodAggregate{row.method, 0.0, 0.0});
      counts.push_back(0);
    }
    out[k].mean_psnr_db += row.psnr_db;
    out[k].mean_time_s += row.wall_time_s;
    ++counts[k];
  }
  for (size_t k = 0; k < out.size(); ++k) {
    out[k].mean_psnr_db /= counts[k];
    out[k].mean_time_s /= counts[k];
  }
  return out;
}

BenchReport run_benchmark(const std::vector<Image>& corpus, const Psf& psf,
                          const BenchConfig& cfg) {
  if (corpus.empty()) throw std::invalid_argument("benchmark corpus is empty");
  const std::vector<std::string> known{"none", "wiener", "rl", "tv", "cnn1", "cnn3"};
  bool wants_cnn = false;
  for (const auto& m : cfg.methods) {
    if (std::find(known.begin(), known.end(), m) == known.end()) {
      throw std::invalid_argument("unknown benchmark method '" + m +
                                  "' (valid: none,wiener,rl,tv,cnn1,cnn3)");
    }
    wants_cnn = wants_cnn || m == "cnn1" || m == "cnn3";
  }
  if (wants_cnn && corpus.size() < 2) {
    throw std::invalid_argument("leave-one-out CNN rows need at least 2 corpus images");
  }

  BenchReport report;
  for (int i = 0; i < static_cast<int>(corpus.size()); ++i) {
    const Image& clean = corpus[i];
    NoiseSpec noise{cfg.sigma, derive_seed(cfg.seed, kDegradeSalt + static_cast<uint64_t>(i))};
    const Image degraded = degrade(clean, psf, noise);

    // one leave-one-out dataset per target image, shared by both CNN rows
    Dataset ds;
    if (wants_cnn) {
      if (cfg.verbose) {
        std::cerr << "[bench] image " << i + 1 << "/" << corpus.size() << ": building dataset\n";
      }
      DatasetSpec dspec;
      dspec.n_train = cfg.n_train;
      dspec.n_val = cfg.n_val;
      dspec.seed = derive_seed(cfg.seed, kDatasetSalt + static_cast<uint64_t>(i));
      dspec.excluded_image = i;
      NoiseSpec dnoise{cfg.sigma, 0};
      ds = build_dataset(corpus, psf, dnoise, dspec);
    }

    for (const auto& method : cfg.methods) {
      if (cfg.verbose) {
        std::cerr << "[bench] image " << i + 1 << "/" << corpus.size() << ": " << method << "\n";
      }
      BenchRow row;
      row.image_id = i;
      row.method = method;
      if (method == "none") {
        row.psnr_db = psnr(clean, degraded);
      } else if (method == "wiener") {
        WienerTune tune = autotune_wiener(degraded, psf, clean);
        auto t0 = std::chrono::steady_clock::now();
        Image rec = wiener_deconvolve(degraded, psf, WienerParams{tune.lambda});
        row.wall_time_s = seconds_since(t0);
        row.psnr_db = psnr(clean, rec);
        row.params = "lambda=" + format_g(tune.lambda);
      } else if (method == "rl") {
        RlTune tune = autotune_rl(degraded, psf, clean);
        RlParams p;
        p.iterations = tune.iterations;
        auto t0 = std::chrono::steady_clock::now();
        Image rec = richardson_lucy(degraded, psf, p);
        row.wall_time_s = seconds_since(t0);
        row.psnr_db = psnr(clean, rec);
        row.params = "iterations=" + std::to_string(tune.iterations);
      } else if (method == "tv") {
        TvTune tune = autotune_tv(degraded, psf, clean);
        TvParams p;
        p.lambda = tune.lambda;
        auto t0 = std::chrono::steady_clock::now();
        Image rec = tv_deconvolve(degraded, psf, p);
        row.wall_time_s = seconds_since(t0);
        row.psnr_db = psnr(clean, rec);
        row.params = "lambda=" + format_g(tune.lambda) + ";iterations=" + std::to_string(p.iterations);
      } else {  // cnn1 / cnn3
        const bool deep = method == "cnn3";
        const uint64_t arch_salt = deep ? 1 : 0;
        CnnModel init = deep ? build_3cnn(derive_seed(cfg.seed, kInitSalt + 2 * i + arch_salt))
                             : build_1cnn(derive_seed(cfg.seed, kInitSalt + 2 * i + arch_salt));
        TrainConfig tc = cfg.train;
        tc.seed = derive_seed(cfg.seed, kTrainSalt + 2 * i + arch_salt);
        TrainHistory hist;
        CnnModel model = train(init, ds.train, ds.val, tc, &hist);
        if (cfg.verbose) {
          std::cerr << "[bench]   trained " << method << ": epochs=" << hist.epochs_run
                    << " best=" << hist.best_epoch << " val=" << hist.val_loss[hist.best_epoch - 1]
                    << (hist.stopped_early ? " (early stop)" : "") << "\n";
        }
        auto t0 = std::chrono::steady_clock::now();
        Image rec = predict_image(model, degraded);
        row.wall_time_s = seconds_since(t0);
        row.psnr_db = psnr(clean, rec);
        row.params = "epochs=" + std::to_string(hist.epochs_run) +
                     ";best=" + std::to_string(hist.best_epoch);
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

void write_csv(const BenchReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "image_id,method,psnr_db,wall_time_s,params\n";
  for (const auto& row : report.rows) {
    out << row.image_id << "," << row.method << "," << format_g(row.psnr_db) << ","
        << format_g(row.wall_time_s) << "," << row.params << "\n";
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

BenchReport read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "image_id,method,psnr_db,wall_time_s,params") {
    throw std::runtime_error(path + ": missing benchmark CSV header");
  }
  BenchReport report;
  auto parse_double = [&](const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::runtime_error(path + ": malformed number '" + s + "'");
    return v;
  };
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    size_t c1 = line.find(',');
    size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    size_t c3 = c2 == std::string::npos ? std::string::npos : line.find(',', c2 + 1);
    size_t c4 = c3 == std::string::npos ? std::string::npos : line.find(',', c3 + 1);
    if (c4 == std::string::npos) {
      throw std::runtime_error(path + ": malformed CSV row at line " + std::to_string(lineno));
    }
    BenchRow row;
    row.image_id = std::stoi(line.substr(0, c1));
    row.method = line.substr(c1 + 1, c2 - c1 - 1);
    row.psnr_db = parse_double(line.substr(c2 + 1, c3 - c2 - 1));
    row.wall_time_s = parse_double(line.substr(c3 + 1, c4 - c3 - 1));
    row.params = line.substr(c4 + 1);
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace astro
