#pragma once

// JSON reports for the evaluate and quality commands. Key order is fixed so
// reports can be diffed against golden files.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "morphlab/manifest.hpp"
#include "morphlab/metrics.hpp"
#include "morphlab/parallel.hpp"
#include "morphlab/quality.hpp"
#include "morphlab/scores.hpp"

namespace morphlab {

using ordered_json = nlohmann::ordered_json;

/// 64-bit FNV-1a, used to fingerprint a run's inputs and flags.
class Fnv1a {
 public:
  Fnv1a& update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      hash_ ^= c;
      hash_ *= 0x100000001b3ULL;
    }
    // Field separator so ("ab","c") and ("a","bc") differ.
    hash_ ^= 0xff;
    hash_ *= 0x100000001b3ULL;
    return *this;
  }

  std::string hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 0; i < 16; ++i) out[15 - i] = digits[(hash_ >> (4 * i)) & 0xf];
    return out;
  }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

enum class Metric { gmap, mmpmr, fmmpmr };

struct EvaluationOptions {
  bool gmap = true;
  bool mmpmr = true;
  bool fmmpmr = true;
  GmapMode mode = GmapMode::eq5_min;
  std::vector<Slice> slices = {Slice::male, Slice::female, Slice::combined};
  std::optional<std::string> timestamp;
  std::string config_hash;
};

inline ordered_json threshold_json(const Threshold& t) {
  ordered_json j;
  j["frs"] = t.frs;
  j["tau"] = t.tau;
  j["source"] = t.source;
  j["calibrated"] = t.target_fmr.has_value();
  if (t.target_fmr) {
    j["target_fmr"] = *t.target_fmr;
    j["achieved_fmr"] = *t.achieved_fmr;
    j["impostor_count"] = t.impostor_count;
  }
  return j;
}

namespace detail {

inline ordered_json slice_json(const ScoreTable& table, Slice slice,
                               const ThresholdMap& thresholds, const FtarTable& ftar,
                               const EvaluationOptions& opt) {
  ordered_json j;
  j["slice"] = to_string(slice);
  j["morph_count"] = table.morphs().size();
  j["per_frs"] = ordered_json::array();
  j["multi_frs"] = ordered_json::array();
  if (table.empty()) {
    j["all_generators"] = nullptr;
    return j;
  }
  const auto blocks = arrange(table);
  for (const auto& b : blocks) {
    for (const auto& frs : b.frs) {
      const double tau = thresholds.at(frs).tau;
      const ScoreTable cell = table.restrict_to(b.generator, frs);
      ordered_json c;
      c["generator"] = b.generator;
      c["frs"] = frs;
      c["morphs"] = b.morphs.size();
      c["attempts"] = b.attempts;
      if (opt.mmpmr) c["mmpmr"] = to_double(mmpmr(cell, tau));
      if (opt.fmmpmr) c["fmmpmr"] = to_double(fmmpmr(cell, tau));
      if (opt.gmap) c["gmap"] = to_double(gmap(cell, thresholds, ftar, GmapMode::eq5_min));
      j["per_frs"].push_back(std::move(c));
    }
  }
  if (!opt.gmap) {
    j["all_generators"] = nullptr;
    return j;
  }
  for (const auto& b : blocks) {
    const ScoreTable gen =
        table.filter([&](const ScoreKey& k) { return k.generator == b.generator; });
    ordered_json c;
    c["generator"] = b.generator;
    c["frs"] = b.frs;
    c["mode"] = to_string(opt.mode);
    c["gmap"] = to_double(gmap(gen, thresholds, ftar, opt.mode));
    j["multi_frs"].push_back(std::move(c));
  }
  ordered_json all;
  all["generators"] = blocks.size();
  all["mode"] = to_string(opt.mode);
  all["gmap"] = to_double(gmap(table, thresholds, ftar, opt.mode));
  j["all_generators"] = std::move(all);
  return j;
}

}  // namespace detail

/// Per-slice report. For each slice: single-FRS metrics per (generator, FRS),
/// G-MAP across all FRS per generator, and G-MAP across all generators.
inline ordered_json evaluation_report(const MorphManifest& manifest, const ScoreTable& scores,
                                      const ThresholdMap& thresholds, const FtarTable& ftar,
                                      const EvaluationOptions& opt) {
  for (const auto& frs : scores.frs()) {
    if (!thresholds.count(frs)) throw ConfigError("no threshold for FRS '" + frs + "'");
  }
  // Validates the whole table once before slicing.
  arrange(scores);

  std::vector<ScoreTable> sliced(opt.slices.size());
  for (std::size_t i = 0; i < opt.slices.size(); ++i) {
    sliced[i] = slice_scores(scores, manifest, opt.slices[i]);
  }
  std::vector<ordered_json> parts(opt.slices.size());
  parallel_for(opt.slices.size(), [&](std::size_t i) {
    parts[i] = detail::slice_json(sliced[i], opt.slices[i], thresholds, ftar, opt);
  });

  ordered_json j;
  j["report"] = "morphlab-evaluation";
  j["format_version"] = 1;
  if (opt.timestamp) j["timestamp"] = *opt.timestamp;
  j["config_hash"] = opt.config_hash;
  j["gmap_mode"] = to_string(opt.mode);
  ordered_json metrics = ordered_json::array();
  if (opt.mmpmr) metrics.push_back("mmpmr");
  if (opt.fmmpmr) metrics.push_back("fmmpmr");
  if (opt.gmap) metrics.push_back("gmap");
  j["metrics"] = std::move(metrics);
  j["thresholds"] = ordered_json::array();
  for (const auto& [frs, t] : thresholds) {
    if (scores.frs().count(frs)) j["thresholds"].push_back(threshold_json(t));
  }
  j["slices"] = std::move(parts);
  return j;
}

inline ordered_json boxplot_json(const BoxPlotStats& s) {
  ordered_json j;
  j["n"] = s.n;
  j["minimum"] = s.minimum;
  j["lower_whisker"] = s.lower_whisker;
  j["q1"] = s.q1;
  j["median"] = s.median;
  j["q3"] = s.q3;
  j["upper_whisker"] = s.upper_whisker;
  j["maximum"] = s.maximum;
  j["outliers"] = s.outliers;
  return j;
}

struct ImagePair {
  std::filesystem::path ref;
  std::filesystem::path test;
};

/// Reads `ref_path,test_path` lines; relative paths resolve against the
/// list file's directory. Blank lines and '#' comments are skipped.
inline std::vector<ImagePair> read_pair_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  const auto base = path.parent_path();
  std::vector<ImagePair> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto t = csv::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = csv::split(t);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw InputError(path.string() + ": line " + std::to_string(n) +
                       ": expected 'ref_path,test_path'");
    }
    auto resolve = [&](const std::string& p) {
      std::filesystem::path fp(p);
      return fp.is_absolute() ? fp : base / fp;
    };
    out.push_back({resolve(fields[0]), resolve(fields[1])});
  }
  return out;
}

/// Per-pair PSNR and box-plot statistics over the finite values. Identical
/// pairs (infinite PSNR) are counted separately.
inline ordered_json quality_report(const std::vector<ImagePair>& pairs,
                                   const std::optional<std::string>& timestamp,
                                   const std::string& config_hash,
                                   const std::filesystem::path& display_base = {}) {
  std::vector<double> values(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    const auto a = read_image(pairs[i].ref);
    const auto b = read_image(pairs[i].test);
    try {
      values[i] = psnr(a, b);
    } catch (const InputError& e) {
      throw InputError(pairs[i].ref.string() + " vs " + pairs[i].test.string() + ": " +
                       e.what());
    }
  });

  auto shown = [&](const std::filesystem::path& p) {
    return display_base.empty() ? p.generic_string()
                                : p.lexically_relative(display_base).generic_string();
  };

  ordered_json j;
  j["report"] = "morphlab-quality";
  j["format_version"] = 1;
  if (timestamp) j["timestamp"] = *timestamp;
  j["config_hash"] = config_hash;
  j["pairs"] = ordered_json::array();
  std::vector<double> finite;
  std::size_t identical = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    ordered_json p;
    p["ref"] = shown(pairs[i].ref);
    p["test"] = shown(pairs[i].test);
    if (std::isinf(values[i])) {
      p["psnr_db"] = "inf";
      ++identical;
    } else {
      p["psnr_db"] = values[i];
      finite.push_back(values[i]);
    }
    j["pairs"].push_back(std::move(p));
  }
  j["pair_count"] = pairs.size();
  j["identical_pairs"] = identical;
  j["stats"] = finite.empty() ? ordered_json(nullptr) : boxplot_json(boxplot_stats(finite));
  return j;
}

}  // namespace morphlab
