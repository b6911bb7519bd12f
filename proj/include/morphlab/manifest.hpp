#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "morphlab/error.hpp"
#include "morphlab/scores.hpp"

namespace morphlab {

enum class Gender { male, female };

inline std::string_view to_string(Gender g) { return g == Gender::male ? "male" : "female"; }

inline Gender parse_gender(std::string_view s) {
  if (s == "male") return Gender::male;
  if (s == "female") return Gender::female;
  throw InputError("unknown gender '" + std::string(s) + "'");
}

enum class Slice { male, female, combined };

inline std::string_view to_string(Slice s) {
  switch (s) {
    case Slice::male: return "male";
    case Slice::female: return "female";
    default: return "combined";
  }
}

inline Slice parse_slice(std::string_view s) {
  if (s == "male") return Slice::male;
  if (s == "female") return Slice::female;
  if (s == "combined") return Slice::combined;
  throw InputError("unknown slice '" + std::string(s) + "'");
}

enum class ImageRole { enrol, probe };

struct Subject {
  std::string id;
  Gender gender = Gender::male;
};

struct ImageEntry {
  std::string id;
  std::string subject;
  ImageRole role = ImageRole::probe;
  std::string path;
};

struct MorphPair {
  std::string id;
  std::string subject_a;
  std::string subject_b;
  std::string generator;
  double alpha = 0.5;
  std::string latent_path;
  std::string image_path;
};

/// Subjects, their images, the morph pairs built from them and the FRS under
/// evaluation. Paths are relative to the manifest file.
struct MorphManifest {
  std::vector<Subject> subjects;
  std::vector<ImageEntry> images;
  std::vector<MorphPair> morph_pairs;
  std::vector<std::string> frs;
  std::filesystem::path base_dir;

  const Subject* find_subject(std::string_view id) const {
    auto it = std::find_if(subjects.begin(), subjects.end(),
                           [&](const Subject& s) { return s.id == id; });
    return it == subjects.end() ? nullptr : &*it;
  }

  const MorphPair* find_pair(std::string_view id) const {
    auto it = std::find_if(morph_pairs.begin(), morph_pairs.end(),
                           [&](const MorphPair& p) { return p.id == id; });
    return it == morph_pairs.end() ? nullptr : &*it;
  }
};

// JSON ------------------------------------------------------------------------

namespace detail {

template <typename T>
T required(const nlohmann::json& obj, const char* key, const std::string& ctx) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw InputError(ctx + ": missing key '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(ctx + ": key '" + key + "' has the wrong type");
  }
}

inline std::string optional_string(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return {};
  if (!obj.at(key).is_string()) throw InputError(std::string("key '") + key + "' must be a string");
  return obj.at(key).get<std::string>();
}

inline const nlohmann::json& array_at(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw InputError(std::string("manifest: '") + key + "' must be an array");
  }
  return j.at(key);
}

}  // namespace detail

inline MorphManifest manifest_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("manifest: top level must be an object");
  MorphManifest m;
  std::size_t i = 0;
  for (const auto& s : detail::array_at(j, "subjects")) {
    const std::string ctx = "manifest subjects[" + std::to_string(i++) + "]";
    m.subjects.push_back({detail::required<std::string>(s, "id", ctx),
                          parse_gender(detail::required<std::string>(s, "gender", ctx))});
  }
  i = 0;
  for (const auto& im : detail::array_at(j, "images")) {
    const std::string ctx = "manifest images[" + std::to_string(i++) + "]";
    const auto role = detail::required<std::string>(im, "role", ctx);
    if (role != "enrol" && role != "probe") {
      throw InputError(ctx + ": role must be 'enrol' or 'probe'");
    }
    m.images.push_back({detail::required<std::string>(im, "id", ctx),
                        detail::required<std::string>(im, "subject", ctx),
                        role == "enrol" ? ImageRole::enrol : ImageRole::probe,
                        detail::required<std::string>(im, "path", ctx)});
  }
  i = 0;
  if (j.contains("morph_pairs")) {
    for (const auto& p : detail::array_at(j, "morph_pairs")) {
      const std::string ctx = "manifest morph_pairs[" + std::to_string(i++) + "]";
      MorphPair mp;
      mp.id = detail::required<std::string>(p, "id", ctx);
      mp.subject_a = detail::required<std::string>(p, "subject_a", ctx);
      mp.subject_b = detail::required<std::string>(p, "subject_b", ctx);
      mp.generator = detail::required<std::string>(p, "generator", ctx);
      mp.alpha = p.contains("alpha") ? detail::required<double>(p, "alpha", ctx) : 0.5;
      mp.latent_path = detail::optional_string(p, "latent_path");
      mp.image_path = detail::optional_string(p, "image_path");
      m.morph_pairs.push_back(std::move(mp));
    }
  }
  if (j.contains("frs")) {
    try {
      m.frs = j.at("frs").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception&) {
      throw InputError("manifest: 'frs' must be an array of strings");
    }
  }
  return m;
}

inline nlohmann::ordered_json manifest_to_json(const MorphManifest& m) {
  nlohmann::ordered_json j;
  j["subjects"] = nlohmann::ordered_json::array();
  for (const auto& s : m.subjects) {
    j["subjects"].push_back({{"id", s.id}, {"gender", to_string(s.gender)}});
  }
  j["images"] = nlohmann::ordered_json::array();
  for (const auto& im : m.images) {
    j["images"].push_back({{"id", im.id},
                           {"subject", im.subject},
                           {"role", im.role == ImageRole::enrol ? "enrol" : "probe"},
                           {"path", im.path}});
  }
  j["morph_pairs"] = nlohmann::ordered_json::array();
  for (const auto& p : m.morph_pairs) {
    j["morph_pairs"].push_back({{"id", p.id},
                                {"subject_a", p.subject_a},
                                {"subject_b", p.subject_b},
                                {"generator", p.generator},
                                {"alpha", p.alpha},
                                {"latent_path", p.latent_path},
                                {"image_path", p.image_path}});
  }
  j["frs"] = m.frs;
  return j;
}

inline MorphManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  MorphManifest m = manifest_from_json(j);
  m.base_dir = path.parent_path();
  return m;
}

// Validation ------------------------------------------------------------------

struct ValidationReport {
  std::vector<std::string> violations;
  std::size_t male_subjects = 0;
  std::size_t female_subjects = 0;
  std::size_t image_count = 0;
  std::size_t probe_count = 0;
  std::size_t min_probes_per_subject = 0;
  std::size_t max_probes_per_subject = 0;
  std::size_t pair_count = 0;

  bool ok() const noexcept { return violations.empty(); }
};

/// Lists every violated manifest invariant plus summary counts.
inline ValidationReport validate_manifest(const MorphManifest& m) {
  ValidationReport r;
  auto fail = [&](std::string msg) { r.violations.push_back(std::move(msg)); };

  if (m.subjects.empty()) fail("no subjects");
  std::set<std::string> subject_ids;
  for (const auto& s : m.subjects) {
    if (!subject_ids.insert(s.id).second) fail("duplicate subject id '" + s.id + "'");
    (s.gender == Gender::male ? r.male_subjects : r.female_subjects)++;
  }

  std::set<std::string> image_ids;
  std::map<std::string, std::size_t> probes;
  for (const auto& im : m.images) {
    if (!image_ids.insert(im.id).second) fail("duplicate image id '" + im.id + "'");
    if (!subject_ids.count(im.subject)) {
      fail("image '" + im.id + "' references unknown subject '" + im.subject + "'");
    }
    if (im.role == ImageRole::probe) {
      ++probes[im.subject];
      ++r.probe_count;
    }
  }
  r.image_count = m.images.size();

  bool first = true;
  for (const auto& id : subject_ids) {
    const std::size_t n = probes.count(id) ? probes.at(id) : 0;
    if (n == 0) fail("subject '" + id + "' has no probe image");
    r.min_probes_per_subject = first ? n : std::min(r.min_probes_per_subject, n);
    r.max_probes_per_subject = std::max(r.max_probes_per_subject, n);
    first = false;
  }

  std::set<std::string> pair_ids;
  for (const auto& p : m.morph_pairs) {
    if (!pair_ids.insert(p.id).second) fail("duplicate morph pair id '" + p.id + "'");
    if (p.subject_a == p.subject_b) fail("morph pair '" + p.id + "' uses one subject twice");
    for (const auto* s : {&p.subject_a, &p.subject_b}) {
      if (!subject_ids.count(*s)) {
        fail("morph pair '" + p.id + "' references unknown subject '" + *s + "'");
      }
    }
    if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) fail("morph pair '" + p.id + "' alpha outside [0,1]");
  }
  r.pair_count = m.morph_pairs.size();

  std::set<std::string> frs;
  for (const auto& f : m.frs) {
    if (!frs.insert(f).second) fail("duplicate frs '" + f + "'");
  }
  return r;
}

// Pairing and slicing -----------------------------------------------------------

enum class PairPolicy { same_gender, all_pairs };

inline PairPolicy parse_pair_policy(std::string_view s) {
  if (s == "same-gender") return PairPolicy::same_gender;
  if (s == "all-pairs") return PairPolicy::all_pairs;
  throw InputError("unknown pair policy '" + std::string(s) + "'");
}

struct PairCandidate {
  std::string subject_a;
  std::string subject_b;
  Slice slice = Slice::combined;  // male/female for same-gender pairs
};

/// Unordered pairs of distinct subjects in manifest order. With `limit`, a
/// seeded random subset of that size is kept, still in manifest order.
inline std::vector<PairCandidate> generate_pairs(const MorphManifest& m, PairPolicy policy,
                                                 std::optional<std::size_t> limit = {},
                                                 std::uint64_t seed = 0) {
  if (auto r = validate_manifest(m); !r.ok()) {
    throw InputError("invalid manifest: " + r.violations.front());
  }
  std::vector<PairCandidate> out;
  for (std::size_t i = 0; i < m.subjects.size(); ++i) {
    for (std::size_t j = i + 1; j < m.subjects.size(); ++j) {
      const auto& a = m.subjects[i];
      const auto& b = m.subjects[j];
      const bool same = a.gender == b.gender;
      if (policy == PairPolicy::same_gender && !same) continue;
      const Slice slice =
          same ? (a.gender == Gender::male ? Slice::male : Slice::female) : Slice::combined;
      out.push_back({a.id, b.id, slice});
    }
  }
  if (limit && *limit < out.size()) {
    std::vector<std::size_t> idx(out.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(*limit);
    std::sort(idx.begin(), idx.end());
    std::vector<PairCandidate> kept;
    for (auto i : idx) kept.push_back(out[i]);
    out = std::move(kept);
  }
  return out;
}

/// Morphs whose contributing subjects both match the slice gender; the
/// combined slice keeps everything.
inline ScoreTable slice_scores(const ScoreTable& scores, const MorphManifest& m, Slice slice) {
  std::map<std::string, bool> keep;
  for (const auto& morph : scores.morphs()) {
    const MorphPair* p = m.find_pair(morph);
    if (!p) throw InputError("morph id '" + morph + "' is not in the manifest");
    const Subject* a = m.find_subject(p->subject_a);
    const Subject* b = m.find_subject(p->subject_b);
    if (!a || !b) throw InputError("morph pair '" + morph + "' references an unknown subject");
    bool k = true;
    if (slice != Slice::combined) {
      const Gender g = slice == Slice::male ? Gender::male : Gender::female;
      k = a->gender == g && b->gender == g;
    }
    keep[morph] = k;
  }
  if (slice == Slice::combined) return scores;
  return scores.filter([&](const ScoreKey& k) { return keep.at(k.morph); });
}

}  // namespace morphlab
