#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <string>

#include <astro/cnn.hpp>
#include <astro/cnn_io.hpp>
#include <astro/image_io.hpp>
#include <astro/synth.hpp>
#include <doctest.h>

#include "test_util.hpp"

using namespace astro;
using astro::testutil::TempDir;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Runs the installed binary through the shell, capturing both streams.
RunResult run_cli(const TempDir& dir, const std::string& args, const std::string& env = "") {
  std::string out_path = dir.file("stdout.txt");
  std::string err_path = dir.file("stderr.txt");
  std::string cmd = env + (env.empty() ? "" : " ") + ASTRODECONV_BIN + " " + args + " >" +
                    out_path + " 2>" + err_path;
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

CnnModel delta_1cnn() {
  CnnModel m = build_1cnn(1);
  std::fill(m.layers[0].weights.begin(), m.layers[0].weights.end(), 0.0f);
  m.layers[0].weights[9 * 19 + 9] = 1.0f;
  m.layers[0].biases[0] = 0.0f;
  return m;
}

}  // namespace

TEST_CASE("cli: no subcommand is a usage error") {
  TempDir dir;
  RunResult r = run_cli(dir, "");
  CHECK(r.exit_code == 1);

  r = run_cli(dir, "frobnicate");
  CHECK(r.exit_code == 1);

  r = run_cli(dir, "--version");
  CHECK(r.exit_code == 0);
  CHECK_FALSE(r.out.empty());
}

TEST_CASE("cli: psf generates a kernel and echoes its configuration") {
  TempDir dir;
  std::string out = dir.file("k.imf1");
  RunResult r = run_cli(dir, "psf --support 32 --fwhm 4 --out " + out);
  REQUIRE(r.exit_code == 0);
  CHECK(contains(r.err, "# astrodeconv"));
  CHECK(contains(r.err, " psf "));
  CHECK(contains(r.err, "support=32"));
  CHECK(contains(r.err, "fwhm=4"));
  CHECK(contains(r.err, "threads="));

  Image k = read_imf1(out);
  CHECK(k.height == 32);
  CHECK(k.width == 32);
  CHECK(image_sum(k) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("cli: defaults are materialized in the config echo") {
  TempDir dir;
  std::string out = dir.file("k.imf1");
  RunResult r = run_cli(dir, "psf --out " + out);
  REQUIRE(r.exit_code == 0);
  CHECK(contains(r.err, "support=64"));
  CHECK(contains(r.err, "fwhm=8"));
}

TEST_CASE("cli: thread cap comes from the env var unless the flag overrides it") {
  TempDir dir;
  std::string out = dir.file("k.imf1");
  RunResult r = run_cli(dir, "psf --out " + out, "ASTRODECONV_THREADS=3");
  REQUIRE(r.exit_code == 0);
  CHECK(contains(r.err, "threads=3"));

  r = run_cli(dir, "--threads 2 psf --out " + out, "ASTRODECONV_THREADS=3");
  REQUIRE(r.exit_code == 0);
  CHECK(contains(r.err, "threads=2"));
}

TEST_CASE("cli: invalid option values are usage errors") {
  TempDir dir;
  std::string any = dir.file("x.imf1");
  RunResult r = run_cli(dir, "deconv --method sparse --psf " + any + " --in " + any + " --out " + any);
  CHECK(r.exit_code == 1);

  // --autotune requires --ref
  r = run_cli(dir, "deconv --method rl --autotune --psf " + any + " --in " + any + " --out " + any);
  CHECK(r.exit_code == 1);

  // missing required --out
  r = run_cli(dir, "psf");
  CHECK(r.exit_code == 1);
}

TEST_CASE("cli: runtime failures exit 2 with a diagnostic") {
  TempDir dir;
  std::string psf = dir.file("k.imf1");
  REQUIRE(run_cli(dir, "psf --support 16 --fwhm 4 --out " + psf).exit_code == 0);

  RunResult r = run_cli(dir, "degrade --psf " + psf + " --in " + dir.file("absent.imf1") +
                                 " --out " + dir.file("y.imf1"));
  CHECK(r.exit_code == 2);
  CHECK(contains(r.err, "error:"));

  r = run_cli(dir, "predict --model " + dir.file("no.cnn1") + " --in " + psf + " --out " +
                       dir.file("z.imf1"));
  CHECK(r.exit_code == 2);
}

TEST_CASE("cli: degrade-deconv pipeline reports a PSNR gain") {
  TempDir dir;
  std::string psf = dir.file("k.imf1");
  std::string clean = dir.file("clean.imf1");
  std::string noisy = dir.file("noisy.imf1");
  std::string rec = dir.file("rec.imf1");
  REQUIRE(run_cli(dir, "psf --support 32 --fwhm 6 --out " + psf).exit_code == 0);
  write_imf1(synth_image(44, 64), clean);

  RunResult r = run_cli(dir, "degrade --psf " + psf + " --sigma 0.01 --seed 9 --in " + clean +
                                 " --out " + noisy);
  REQUIRE(r.exit_code == 0);

  r = run_cli(dir, "deconv --method wiener --autotune --ref " + clean + " --psf " + psf +
                       " --in " + noisy + " --out " + rec);
  REQUIRE(r.exit_code == 0);
  CHECK(contains(r.err, "# autotune lambda="));
  CHECK(contains(r.out, "psnr_db "));

  Image x = read_imf1(rec);
  CHECK(x.height == 64);
  CHECK(all_finite(x));
}

TEST_CASE("cli: predict with a handcrafted identity model round-trips the image") {
  TempDir dir;
  std::string model = dir.file("id.cnn1");
  std::string in = dir.file("in.imf1");
  std::string out = dir.file("out.imf1");
  save_model(delta_1cnn(), model);
  Image img = synth_image(3, 64);
  write_imf1(img, in);

  RunResult r = run_cli(dir, "predict --model " + model + " --in " + in + " --out " + out);
  REQUIRE(r.exit_code == 0);
  Image y = read_imf1(out);
  CHECK(y.data == img.data);
}

TEST_CASE("cli: featuremaps dumps one PGM per channel") {
  TempDir dir;
  std::string model = dir.file("m.cnn1");
  std::string in = dir.file("in.imf1");
  std::string outdir = dir.file("maps");
  save_model(build_3cnn(5), model);
  write_imf1(synth_image(4, 64), in);

  RunResult r = run_cli(dir, "featuremaps --model " + model + " --in " + in +
                                 " --layer 2 --outdir " + outdir);
  REQUIRE(r.exit_code == 0);
  int found = 0;
  for (int c = 0; c < 16; ++c) {
    std::string name = outdir + "/layer2_map" + (c < 10 ? "0" : "") + std::to_string(c) + ".pgm";
    std::ifstream f(name);
    found += f.good() ? 1 : 0;
  }
  CHECK(found == 16);

  r = run_cli(dir, "featuremaps --model " + model + " --in " + in + " --layer 9 --outdir " + outdir);
  CHECK(r.exit_code == 2);
  CHECK(contains(r.err, "out of range"));
}

TEST_CASE("cli: synth and bench cooperate on a toy corpus") {
  TempDir dir;
  std::string corpus = dir.file("corpus");
  std::string csv = dir.file("bench.csv");
  RunResult r = run_cli(dir, "synth --outdir " + corpus + " --count 2 --size 64 --seed 5");
  REQUIRE(r.exit_code == 0);

  r = run_cli(dir, "bench --corpus " + corpus + " --methods none,wiener --support 32 --fwhm 6" +
                       " --sigma 0.01 --seed 1 --quiet --out " + csv);
  REQUIRE(r.exit_code == 0);
  CHECK(contains(r.out, "method"));
  CHECK(contains(r.out, "wiener"));

  std::string content = slurp(csv);
  CHECK(contains(content, "image_id,method,psnr_db,wall_time_s,params"));
  CHECK(contains(content, "0,none,"));
  CHECK(contains(content, "1,wiener,"));
}
