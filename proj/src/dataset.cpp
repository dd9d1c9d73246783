#include "astro/dataset.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "astro/image_io.hpp"
#include "astro/rng.hpp"
#include "astro/threads.hpp"

namespace astro {

namespace {

constexpr int kInputWindow = 32;
constexpr int kTargetWindow = 14;
constexpr int kTargetOffset = (kInputWindow - kTargetWindow) / 2;  // 9

// Salts for the independent RNG streams derived from the dataset seed.
constexpr uint64_t kNoiseSalt = 0x100;
constexpr uint64_t kTrainSalt = 0x200;
constexpr uint64_t kValSalt = 0x300;

std::vector<PatchPair> sample_split(const std::vector<int>& ids,
                                    const std::vector<const Image*>& degraded,
                                    const std::vector<const Image*>& clean, int count,
                                    uint64_t seed, uint64_t stream_salt) {
  const int k = static_cast<int>(ids.size());
  // round-robin assignment: sample s comes from image slot s % k
  std::vector<int> per_image(k);
  for (int s = 0; s < count; ++s) ++per_image[s % k];

  std::vector<std::vector<PatchPair>> buckets(k);
  parallel_for(k, [&](int64_t slot) {
    // per-image stream keyed by the original corpus id, so exclusion of one
    // image never shifts another image's draws
    Rng rng(derive_seed(seed, stream_salt + static_cast<uint64_t>(ids[slot])));
    const Image& deg = *degraded[slot];
    const Image& cln = *clean[slot];
    const uint64_t top_range = static_cast<uint64_t>(deg.height - kInputWindow + 1);
    const uint64_t left_range = static_cast<uint64_t>(deg.width - kInputWindow + 1);
    auto& out = buckets[slot];
    out.reserve(per_image[slot]);
    for (int s = 0; s < per_image[slot]; ++s) {
      const int top = static_cast<int>(rng.below(top_range));
      const int left = static_cast<int>(rng.below(left_range));
      PatchPair p;
      p.input = extract_patch(deg, top, left, kInputWindow, kInputWindow);
      p.target = extract_patch(cln, top + kTargetOffset, left + kTargetOffset, kTargetWindow,
                               kTargetWindow);
      p.source_id = ids[slot];
      p.top = top;
      p.left = left;
      out.push_back(std::move(p));
    }
  });

  std::vector<PatchPair> split;
  split.reserve(count);
  std::vector<size_t> next(k, 0);
  for (int s = 0; s < count; ++s) {
    split.push_back(std::move(buckets[s % k][next[s % k]++]));
  }
  return split;
}

}  // namespace

Dataset build_dataset(const std::vector<Image>& corpus, const Psf& psf, const NoiseSpec& noise,
                      const DatasetSpec& spec) {
  if (spec.n_train < 1 || spec.n_val < 1) {
    throw std::invalid_argument("dataset sample counts must be positive");
  }
  std::vector<int> ids;
  for (int i = 0; i < static_cast<int>(corpus.size()); ++i) {
    if (spec.excluded_image && *spec.excluded_image == i) continue;
    if (corpus[i].height < kInputWindow || corpus[i].width < kInputWindow) {
      throw std::invalid_argument("corpus image " + std::to_string(i) + " is " +
                                  std::to_string(corpus[i].height) + "x" +
                                  std::to_string(corpus[i].width) + ", smaller than the " +
                                  std::to_string(kInputWindow) + "x" +
                                  std::to_string(kInputWindow) + " sampling window");
    }
    ids.push_back(i);
  }
  if (ids.empty()) throw std::invalid_argument("corpus is empty after exclusion");

  std::vector<Image> degraded(ids.size());
  std::vector<const Image*> deg_ptr(ids.size()), clean_ptr(ids.size());
  for (size_t slot = 0; slot < ids.size(); ++slot) {
    NoiseSpec per_image = noise;
    per_image.seed = derive_seed(spec.seed, kNoiseSalt + static_cast<uint64_t>(ids[slot]));
    degraded[slot] = degrade(corpus[ids[slot]], psf, per_image);
    deg_ptr[slot] = &degraded[slot];
    clean_ptr[slot] = &corpus[ids[slot]];
  }

  Dataset ds;
  ds.train = sample_split(ids, deg_ptr, clean_ptr, spec.n_train, spec.seed, kTrainSalt);
  ds.val = sample_split(ids, deg_ptr, clean_ptr, spec.n_val, spec.seed, kValSalt);
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "DSC1 " << ds.train.size() << " " << ds.val.size() << "\n";
  auto dump = [&](const std::vector<PatchPair>& split) {
    for (const auto& p : split) {
      out << p.source_id << " " << p.top << " " << p.left << "\n";
      std::string in_bytes = imf1_bytes(p.input);
      std::string tgt_bytes = imf1_bytes(p.target);
      out.write(in_bytes.data(), static_cast<std::streamsize>(in_bytes.size()));
      out.write(tgt_bytes.data(), static_cast<std::streamsize>(tgt_bytes.size()));
    }
  };
  dump(ds.train);
  dump(ds.val);
  if (!out) throw std::runtime_error("write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  const char* cursor = bytes.data();
  size_t left = bytes.size();
  auto read_line = [&]() {
    const char* nl = static_cast<const char*>(memchr(cursor, '\n', left));
    if (!nl) throw std::runtime_error(path + ": truncated dataset index");
    std::string line(cursor, nl);
    left -= static_cast<size_t>(nl - cursor) + 1;
    cursor = nl + 1;
    return line;
  };

  long long n_train = 0, n_val = 0;
  if (std::sscanf(read_line().c_str(), "DSC1 %lld %lld", &n_train, &n_val) != 2 || n_train < 0 ||
      n_val < 0 || n_train + n_val > (1LL << 32)) {
    throw std::runtime_error(path + ": malformed dataset header");
  }

  Dataset ds;
  auto slurp = [&](std::vector<PatchPair>& split, long long count) {
    split.reserve(static_cast<size_t>(count));
    for (long long s = 0; s < count; ++s) {
      PatchPair p;
      if (std::sscanf(read_line().c_str(), "%d %d %d", &p.source_id, &p.top, &p.left) != 3) {
        throw std::runtime_error(path + ": malformed pair index at record " + std::to_string(s));
      }
      p.input = parse_imf1_block(cursor, left, path);
      p.target = parse_imf1_block(cursor, left, path);
      split.push_back(std::move(p));
    }
  };
  slurp(ds.train, n_train);
  slurp(ds.val, n_val);
  if (left != 0) throw std::runtime_error(path + ": trailing data after dataset payload");
  return ds;
}

}  // namespace astro
