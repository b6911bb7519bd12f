#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "morphlab/csv.hpp"
#include "morphlab/error.hpp"

namespace morphlab {

// Two contributory subjects per morph.
inline constexpr int kSubjectSlots = 2;

struct ScoreKey {
  std::string generator;
  std::string frs;
  std::string morph;
  std::uint32_t attempt = 0;
  int slot = 1;  // 1 or 2

  auto operator<=>(const ScoreKey&) const = default;
};

/// Mated similarity scores of morphs against subject probes, keyed by
/// (generator, FRS, morph, attempt, subject slot). Higher is more similar.
class ScoreTable {
 public:
  void declare_frs(const std::string& frs) { frs_.insert(frs); }

  void add(ScoreKey key, double score) {
    if (key.slot < 1 || key.slot > kSubjectSlots) {
      throw InputError("subject slot " + std::to_string(key.slot) + " outside {1,2}");
    }
    if (!std::isfinite(score)) throw InputError("non-finite score for morph " + key.morph);
    frs_.insert(key.frs);
    auto [it, inserted] = entries_.emplace(std::move(key), score);
    if (!inserted) {
      throw InputError("duplicate score for generator " + it->first.generator + ", frs " +
                       it->first.frs + ", morph " + it->first.morph + ", attempt " +
                       std::to_string(it->first.attempt) + ", slot " +
                       std::to_string(it->first.slot));
    }
  }

  std::optional<double> find(const ScoreKey& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  const std::map<ScoreKey, double>& entries() const noexcept { return entries_; }
  const std::set<std::string>& frs() const noexcept { return frs_; }
  bool empty() const noexcept { return entries_.empty(); }

  std::set<std::string> generators() const {
    std::set<std::string> out;
    for (const auto& [k, v] : entries_) out.insert(k.generator);
    return out;
  }

  std::set<std::string> morphs() const {
    std::set<std::string> out;
    for (const auto& [k, v] : entries_) out.insert(k.morph);
    return out;
  }

  /// Entries whose key satisfies `keep`; the declared FRS set is carried over.
  ScoreTable filter(const std::function<bool(const ScoreKey&)>& keep) const {
    ScoreTable out;
    out.frs_ = frs_;
    for (const auto& [k, v] : entries_) {
      if (keep(k)) out.entries_.emplace(k, v);
    }
    return out;
  }

  ScoreTable restrict_to(const std::string& generator, const std::string& frs) const {
    ScoreTable out = filter([&](const ScoreKey& k) {
      return k.generator == generator && k.frs == frs;
    });
    out.frs_ = {frs};
    return out;
  }

 private:
  std::map<ScoreKey, double> entries_;
  std::set<std::string> frs_;
};

/// Failure-to-acquire rate per (attempt, FRS); absent entries are 0.
class FtarTable {
 public:
  void set(std::uint32_t attempt, const std::string& frs, double rate) {
    if (!(rate >= 0.0 && rate <= 1.0)) {
      throw InputError("FTAR " + std::to_string(rate) + " outside [0,1]");
    }
    rates_[{attempt, frs}] = rate;
  }

  double get(std::uint32_t attempt, const std::string& frs) const {
    auto it = rates_.find({attempt, frs});
    return it == rates_.end() ? 0.0 : it->second;
  }

  bool empty() const noexcept { return rates_.empty(); }
  const auto& entries() const noexcept { return rates_; }

 private:
  std::map<std::pair<std::uint32_t, std::string>, double> rates_;
};

/// Acceptance bound of one FRS: a mated comparison succeeds iff score > tau.
struct Threshold {
  std::string frs;
  double tau = 0.0;
  // Present when tau came from calibration.
  std::optional<double> target_fmr;
  std::optional<double> achieved_fmr;
  std::size_t impostor_count = 0;
  // Where tau came from, e.g. the threshold or impostor file.
  std::string source;
};

using ThresholdMap = std::map<std::string, Threshold>;

/// Scores of one generator arranged densely as [frs][morph][attempt][slot].
struct GeneratorBlock {
  std::string generator;
  std::vector<std::string> frs;
  std::vector<std::string> morphs;
  std::size_t attempts = 0;
  std::vector<double> scores;

  double at(std::size_t f, std::size_t m, std::size_t a, int slot) const {
    return scores[((f * morphs.size() + m) * attempts + a) * kSubjectSlots +
                  static_cast<std::size_t>(slot - 1)];
  }
};

/// Checks the table invariants and lays each generator out densely:
/// every (morph, attempt) carries both slots under every declared FRS, and
/// every morph of a generator has attempts 0..T-1 for the same T.
inline std::vector<GeneratorBlock> arrange(const ScoreTable& table) {
  if (table.empty()) throw InputError("score table is empty");
  const std::vector<std::string> frs(table.frs().begin(), table.frs().end());

  // generator -> morph -> attempts seen
  std::map<std::string, std::map<std::string, std::set<std::uint32_t>>> seen;
  for (const auto& [k, v] : table.entries()) seen[k.generator][k.morph].insert(k.attempt);

  std::vector<GeneratorBlock> blocks;
  for (const auto& [gen, morphs] : seen) {
    GeneratorBlock b;
    b.generator = gen;
    b.frs = frs;
    std::optional<std::size_t> count;
    for (const auto& [morph, attempts] : morphs) {
      b.morphs.push_back(morph);
      if (*attempts.rbegin() + 1 != attempts.size()) {
        throw InputError("generator " + gen + ", morph " + morph +
                         ": attempt indices are not dense from 0");
      }
      if (count && *count != attempts.size()) {
        throw InputError("generator " + gen + ": morph " + morph + " has " +
                         std::to_string(attempts.size()) + " attempts, expected " +
                         std::to_string(*count));
      }
      count = attempts.size();
    }
    b.attempts = *count;
    b.scores.resize(frs.size() * b.morphs.size() * b.attempts * kSubjectSlots);
    for (std::size_t f = 0; f < frs.size(); ++f) {
      for (std::size_t m = 0; m < b.morphs.size(); ++m) {
        for (std::size_t a = 0; a < b.attempts; ++a) {
          for (int s = 1; s <= kSubjectSlots; ++s) {
            ScoreKey key{gen, frs[f], b.morphs[m], static_cast<std::uint32_t>(a), s};
            auto v = table.find(key);
            if (!v) {
              throw InputError("missing score: generator " + gen + ", frs " + frs[f] +
                               ", morph " + b.morphs[m] + ", attempt " + std::to_string(a) +
                               ", slot " + std::to_string(s));
            }
            b.scores[((f * b.morphs.size() + m) * b.attempts + a) * kSubjectSlots +
                     static_cast<std::size_t>(s - 1)] = *v;
          }
        }
      }
    }
    blocks.push_back(std::move(b));
  }
  return blocks;
}

// CSV ingestion -----------------------------------------------------------

inline ScoreTable read_score_csv(const std::filesystem::path& path) {
  const std::string src = path.string();
  ScoreTable table;
  const auto rows =
      csv::read_file(path, {"generator", "frs", "morph_id", "attempt", "slot", "score"});
  for (const auto& row : rows) {
    const auto& f = row.fields;
    const auto slot = csv::parse_index(f[4], row, src);
    if (slot < 1 || slot > kSubjectSlots) {
      throw InputError(src + ": " + row.where() + ": slot must be 1 or 2");
    }
    const auto attempt = csv::parse_index(f[3], row, src);
    const double score = csv::parse_double(f[5], row, src);
    if (f[0].empty() || f[1].empty() || f[2].empty()) {
      throw InputError(src + ": " + row.where() + ": empty identifier");
    }
    try {
      table.add({f[0], f[1], f[2], static_cast<std::uint32_t>(attempt), static_cast<int>(slot)},
                score);
    } catch (const InputError& e) {
      throw InputError(src + ": " + row.where() + ": " + e.what());
    }
  }
  // Unpaired slots are reported against the row that is present.
  for (const auto& row : rows) {
    const auto& f = row.fields;
    const int slot = static_cast<int>(csv::parse_index(f[4], row, src));
    ScoreKey other{f[0], f[1], f[2], static_cast<std::uint32_t>(csv::parse_index(f[3], row, src)),
                   slot == 1 ? 2 : 1};
    if (!table.find(other)) {
      throw InputError(src + ": " + row.where() + ": no matching slot " +
                       std::to_string(other.slot) + " score");
    }
  }
  return table;
}

inline FtarTable read_ftar_csv(const std::filesystem::path& path) {
  const std::string src = path.string();
  FtarTable t;
  for (const auto& row : csv::read_file(path, {"frs", "attempt", "ftar"})) {
    const auto attempt = csv::parse_index(row.fields[1], row, src);
    const double rate = csv::parse_double(row.fields[2], row, src);
    try {
      t.set(static_cast<std::uint32_t>(attempt), row.fields[0], rate);
    } catch (const InputError& e) {
      throw InputError(src + ": " + row.where() + ": " + e.what());
    }
  }
  return t;
}

inline ThresholdMap read_threshold_csv(const std::filesystem::path& path) {
  const std::string src = path.string();
  ThresholdMap out;
  for (const auto& row : csv::read_file(path, {"frs", "tau"})) {
    const double tau = csv::parse_double(row.fields[1], row, src);
    if (!std::isfinite(tau)) throw InputError(src + ": " + row.where() + ": non-finite tau");
    Threshold t;
    t.frs = row.fields[0];
    t.tau = tau;
    t.source = src;
    if (!out.emplace(t.frs, t).second) {
      throw InputError(src + ": " + row.where() + ": duplicate frs");
    }
  }
  return out;
}

/// Impostor (non-mated) scores grouped by FRS.
inline std::map<std::string, std::vector<double>> read_impostor_csv(
    const std::filesystem::path& path) {
  const std::string src = path.string();
  std::map<std::string, std::vector<double>> out;
  for (const auto& row : csv::read_file(path, {"frs", "score"})) {
    const double s = csv::parse_double(row.fields[1], row, src);
    if (!std::isfinite(s)) throw InputError(src + ": " + row.where() + ": non-finite score");
    out[row.fields[0]].push_back(s);
  }
  return out;
}

}  // namespace morphlab
