// tests/test_util.hpp
//
// Shared builders for the unit suites: seeded random models, utterances and
// a self-cleaning temp directory.

#ifndef CHANFUSE_TESTS_TEST_UTIL_HPP_
#define CHANFUSE_TESTS_TEST_UTIL_HPP_

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>

#include "chanfuse/chansel.hpp"
#include "chanfuse/featkit.hpp"
#include "chanfuse/gmm.hpp"
#include "chanfuse/rng.hpp"

namespace testutil {

inline chanfuse::GmmModel random_gmm(int num_components, int dim, std::uint64_t seed) {
  chanfuse::Rng rng(seed);
  chanfuse::GmmModel model;
  model.weights.resize(num_components);
  model.means.resize(num_components, dim);
  model.vars.resize(num_components, dim);
  for (int m = 0; m < num_components; ++m) {
    model.weights[m] = 0.5 + rng.uniform();
    for (int d = 0; d < dim; ++d) {
      model.means(m, d) = rng.uniform(-1.5, 1.5);
      model.vars(m, d) = rng.uniform(0.3, 1.5);
    }
  }
  model.weights /= model.weights.sum();
  return model;
}

inline chanfuse::FeatureMatrix random_features(Eigen::Index frames, Eigen::Index dim,
                                               std::uint64_t seed,
                                               chanfuse::NormState norm = chanfuse::NormState::kRaw) {
  chanfuse::Rng rng(seed);
  chanfuse::FeatureMatrix f;
  f.frames.resize(frames, dim);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index d = 0; d < dim; ++d) f.frames(t, d) = rng.normal();
  }
  f.norm = norm;
  return f;
}

inline chanfuse::MultichannelUtterance random_utterance(int channels, Eigen::Index frames,
                                                        Eigen::Index dim, std::uint64_t seed) {
  chanfuse::MultichannelUtterance u;
  for (int c = 0; c < channels; ++c) {
    u.channels.push_back(random_features(frames, dim, chanfuse::Rng::mix(seed, c)));
  }
  return u;
}

/// Unique temp directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("chanfuse_" + tag + "_" + std::to_string(++counter) + "_" +
             std::to_string(static_cast<std::uint64_t>(
                 std::chrono::steady_clock::now().time_since_epoch().count())));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  os << content;
}

}  // namespace testutil

#endif  // CHANFUSE_TESTS_TEST_UTIL_HPP_
