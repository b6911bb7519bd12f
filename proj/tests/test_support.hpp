#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "morphlab/latent.hpp"
#include "morphlab/scores.hpp"
#include "oracles.hpp"

namespace testing_support {

namespace fs = std::filesystem;

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "morphlab") {
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            (tag + "-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

/// Float32-representable components, like latents emitted by an encoder.
inline morphlab::Matrix random_matrix(std::mt19937_64& rng, std::size_t rows,
                                      std::size_t cols, double scale = 1.0) {
  std::normal_distribution<float> n(0.0f, static_cast<float>(scale));
  morphlab::Matrix m(rows, cols);
  for (auto& x : m.values()) x = n(rng);
  return m;
}

inline morphlab::LatentCode random_latent(std::mt19937_64& rng) {
  return morphlab::LatentCode(random_matrix(rng, morphlab::kStyleRows, morphlab::kStyleWidth));
}

inline morphlab::ScoreTable to_table(const oracle::GmapInstance& in) {
  morphlab::ScoreTable t;
  for (std::size_t d = 0; d < in.morphs.size(); ++d) {
    for (std::size_t f = 0; f < in.frs; ++f) {
      for (std::size_t m = 0; m < in.morphs[d]; ++m) {
        for (std::size_t a = 0; a < in.attempts[d]; ++a) {
          for (int s = 0; s < 2; ++s) {
            t.add({oracle::name("g", d), oracle::name("f", f),
                   oracle::name("g", d) + "_m" + std::to_string(m),
                   static_cast<std::uint32_t>(a), s + 1},
                  in.scores[d][f][m][a][static_cast<std::size_t>(s)]);
          }
        }
      }
    }
  }
  return t;
}

inline morphlab::ThresholdMap to_thresholds(const oracle::GmapInstance& in) {
  morphlab::ThresholdMap out;
  for (std::size_t f = 0; f < in.frs; ++f) {
    morphlab::Threshold t;
    t.frs = oracle::name("f", f);
    t.tau = in.taus[f];
    out.emplace(t.frs, t);
  }
  return out;
}

inline morphlab::FtarTable to_ftar(const oracle::GmapInstance& in) {
  morphlab::FtarTable out;
  for (std::size_t a = 0; a < in.ftar.size(); ++a) {
    for (std::size_t f = 0; f < in.frs; ++f) {
      out.set(static_cast<std::uint32_t>(a), oracle::name("f", f), in.ftar[a][f]);
    }
  }
  return out;
}

}  // namespace testing_support
