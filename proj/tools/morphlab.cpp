// morphlab: morph latent generation and morph attack vulnerability reports.
//
// Exit codes: 0 success, 2 input/schema error, 3 numeric degeneracy,
// 4 configuration gap.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "morphlab/latent.hpp"
#include "morphlab/ltf.hpp"
#include "morphlab/manifest.hpp"
#include "morphlab/metrics.hpp"
#include "morphlab/morph.hpp"
#include "morphlab/report.hpp"

namespace fs = std::filesystem;
using namespace morphlab;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitConfig = 4;

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Appends `--key=value` for every config-file entry not already given on the
// command line, so flags always win over the file.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
    if (args[i].starts_with("--config=")) config = args[i].substr(9);
  }
  if (!config) return args;

  std::ifstream in(*config);
  if (!in) throw InputError("cannot open config file " + *config);
  auto given = [&](const std::string& key) {
    for (const auto& a : args) {
      if (a == "--" + key || a.starts_with("--" + key + "=")) return true;
    }
    return false;
  };
  std::string line;
  std::size_t n = 0;
  std::vector<std::string> extra;
  while (std::getline(in, line)) {
    ++n;
    const auto t = csv::trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw InputError(*config + ": line " + std::to_string(n) + ": expected key=value");
    }
    const std::string key(csv::trim(t.substr(0, eq)));
    const std::string value(csv::trim(t.substr(eq + 1)));
    if (key.empty() || key == "config") {
      throw InputError(*config + ": line " + std::to_string(n) + ": invalid key");
    }
    if (!given(key)) extra.push_back("--" + key + "=" + value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

std::optional<std::string> timestamp_unless(bool suppressed) {
  if (suppressed) return std::nullopt;
  return utc_timestamp();
}

void write_report(const ordered_json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open " + path + " for writing");
  out << text;
}

std::string alpha_label(double a) {
  std::ostringstream os;
  os << a;
  return os.str();
}

// morph ------------------------------------------------------------------------

struct MorphArgs {
  std::string s1, s2, direction, out;
  double alpha = 0.5;
  std::vector<double> alphas;
  std::size_t k = kDefaultIdentityRows;
  std::string mode = "spherical";
  std::string attr_policy = "spherical";
  double epsilon = kDefaultDegenerateAngle;
};

int run_morph(const MorphArgs& a) {
  MorphRecipe recipe;
  recipe.alpha = a.alpha;
  recipe.identity_rows = a.k;
  recipe.identity_mode = parse_interpolation(a.mode);
  recipe.attribute_mode = parse_interpolation(a.attr_policy);
  recipe.degenerate_angle = a.epsilon;
  if (a.k < 1 || a.k >= kStyleRows) throw InputError("--k must be in [1,17]");

  const auto w1 = ltf::load_latent(a.s1);
  const auto w2 = ltf::load_latent(a.s2);
  if (!a.direction.empty()) recipe.direction = LatentDirection(ltf::load(a.direction));

  auto summary = [&](double alpha, const std::string& out) {
    std::cout << "morph 18x512 + 18x512 -> 18x512 alpha=" << alpha << " k=" << a.k
              << " identity=" << to_string(recipe.identity_mode)
              << " attributes=" << to_string(recipe.attribute_mode)
              << " direction=" << (recipe.direction ? recipe.direction->matrix().shape_string()
                                                    : std::string("none"))
              << " -> " << out << "\n";
  };

  if (a.alphas.empty()) {
    const auto m = build_morph_latent(w1, w2, recipe);
    ltf::save_latent(m, a.out);
    summary(recipe.alpha, a.out);
    return 0;
  }
  fs::create_directories(a.out);
  const auto morphs = build_morph_sweep(w1, w2, recipe, a.alphas);
  for (std::size_t i = 0; i < morphs.size(); ++i) {
    const auto path = fs::path(a.out) / ("morph_alpha_" + alpha_label(a.alphas[i]) + ".ltf");
    ltf::save_latent(morphs[i], path);
    summary(a.alphas[i], path.string());
  }
  return 0;
}

// latent utilities -----------------------------------------------------------------

int run_inspect(const std::string& path) {
  const Matrix m = ltf::load(path);
  double lo = 0, hi = 0;
  if (m.size() > 0) {
    lo = hi = m.values()[0];
    for (double x : m.values()) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  std::cout << path << ": " << m.shape_string() << " float32, min " << lo << ", max " << hi
            << "\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::cout << "  row " << r << " norm " << norm(m.row(r)) << "\n";
  }
  return 0;
}

int run_split(const std::string& in, std::size_t k, const std::string& id_out,
              const std::string& attr_out) {
  const auto parts = split_latent(ltf::load_latent(in), k);
  ltf::save(parts.identity, id_out);
  ltf::save(parts.attributes, attr_out);
  std::cout << "split " << in << " at k=" << k << " -> " << parts.identity.shape_string()
            << " + " << parts.attributes.shape_string() << "\n";
  return 0;
}

int run_merge(const std::string& id_in, const std::string& attr_in, const std::string& out) {
  const auto w = merge_latent(ltf::load(id_in), ltf::load(attr_in));
  ltf::save_latent(w, out);
  std::cout << "merged -> " << out << " (18x512)\n";
  return 0;
}

// calibrate / evaluate ------------------------------------------------------------

ThresholdMap calibrate_all(const fs::path& impostors, double fmr) {
  ThresholdMap out;
  for (const auto& [frs, scores] : read_impostor_csv(impostors)) {
    Threshold t = calibrate_threshold(scores, fmr, frs);
    t.source = impostors.filename().string();
    out.emplace(frs, std::move(t));
  }
  return out;
}

int run_calibrate(const std::string& impostors, double fmr, const std::string& out) {
  const auto thresholds = calibrate_all(impostors, fmr);
  std::ostringstream csv;
  csv << "frs,tau\n";
  for (const auto& [frs, t] : thresholds) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", t.tau);
    csv << frs << "," << buf << "\n";
    std::cerr << frs << ": tau=" << buf << " achieved FMR=" << *t.achieved_fmr << " over "
              << t.impostor_count << " impostor scores\n";
  }
  if (out.empty() || out == "-") {
    std::cout << csv.str();
  } else {
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot open " + out + " for writing");
    f << csv.str();
  }
  return 0;
}

struct EvaluateArgs {
  std::string manifest, scores, ftar, thresholds, calibrate, report;
  std::optional<double> fmr;
  std::vector<std::string> metrics = {"all"};
  std::string mode = "eq5-min";
  std::string slice = "all";
  bool no_timestamp = false;
};

int run_evaluate(const EvaluateArgs& a) {
  if (a.thresholds.empty() == a.calibrate.empty()) {
    throw ConfigError("give exactly one of --thresholds or --calibrate");
  }
  if (!a.calibrate.empty() && !a.fmr) throw ConfigError("--calibrate needs --fmr");
  if (a.calibrate.empty() && a.fmr) throw ConfigError("--fmr only applies with --calibrate");

  EvaluationOptions opt;
  opt.mode = parse_gmap_mode(a.mode);
  opt.gmap = opt.mmpmr = opt.fmmpmr = false;
  for (const auto& m : a.metrics) {
    if (m == "all") {
      opt.gmap = opt.mmpmr = opt.fmmpmr = true;
    } else if (m == "gmap") {
      opt.gmap = true;
    } else if (m == "mmpmr") {
      opt.mmpmr = true;
    } else if (m == "fmmpmr") {
      opt.fmmpmr = true;
    } else {
      throw InputError("unknown metric '" + m + "'");
    }
  }
  if (a.slice != "all") opt.slices = {parse_slice(a.slice)};

  const MorphManifest manifest = load_manifest(a.manifest);
  if (auto v = validate_manifest(manifest); !v.ok()) {
    throw InputError(a.manifest + ": " + v.violations.front());
  }
  ScoreTable scores = read_score_csv(a.scores);
  for (const auto& f : scores.frs()) {
    if (!manifest.frs.empty() &&
        std::find(manifest.frs.begin(), manifest.frs.end(), f) == manifest.frs.end()) {
      throw InputError(a.scores + ": frs '" + f + "' is not declared in the manifest");
    }
  }
  for (const auto& f : manifest.frs) scores.declare_frs(f);
  for (const auto& [key, value] : scores.entries()) {
    const MorphPair* p = manifest.find_pair(key.morph);
    if (!p) throw InputError(a.scores + ": morph id '" + key.morph + "' is not in the manifest");
    if (p->generator != key.generator) {
      throw InputError(a.scores + ": morph '" + key.morph + "' belongs to generator '" +
                       p->generator + "', not '" + key.generator + "'");
    }
  }
  const FtarTable ftar = a.ftar.empty() ? FtarTable{} : read_ftar_csv(a.ftar);

  ThresholdMap thresholds;
  if (!a.thresholds.empty()) {
    thresholds = read_threshold_csv(a.thresholds);
    for (auto& [frs, t] : thresholds) t.source = fs::path(a.thresholds).filename().string();
  } else {
    thresholds = calibrate_all(a.calibrate, *a.fmr);
  }
  for (const auto& f : scores.frs()) {
    if (!thresholds.count(f)) throw ConfigError("no threshold for FRS '" + f + "'");
  }

  Fnv1a h;
  h.update("evaluate").update(read_bytes(a.manifest)).update(read_bytes(a.scores));
  h.update(a.ftar.empty() ? "" : read_bytes(a.ftar));
  h.update(a.thresholds.empty() ? "" : read_bytes(a.thresholds));
  h.update(a.calibrate.empty() ? "" : read_bytes(a.calibrate));
  h.update(a.fmr ? std::to_string(*a.fmr) : "").update(a.mode).update(a.slice);
  for (const auto& m : a.metrics) h.update(m);
  opt.config_hash = h.hex();
  opt.timestamp = timestamp_unless(a.no_timestamp);

  write_report(evaluation_report(manifest, scores, thresholds, ftar, opt), a.report);
  return 0;
}

// quality / manifest ----------------------------------------------------------------

int run_quality(const std::string& pairs_path, const std::string& report, bool no_timestamp) {
  const auto pairs = read_pair_list(pairs_path);
  Fnv1a h;
  h.update("quality").update(read_bytes(pairs_path));
  for (const auto& p : pairs) h.update(read_bytes(p.ref)).update(read_bytes(p.test));
  write_report(quality_report(pairs, timestamp_unless(no_timestamp), h.hex(),
                              fs::path(pairs_path).parent_path()),
               report);
  return 0;
}

int run_validate(const std::string& path) {
  const auto r = validate_manifest(load_manifest(path));
  ordered_json j;
  j["manifest"] = fs::path(path).filename().string();
  j["valid"] = r.ok();
  j["violations"] = r.violations;
  j["subjects"] = {{"male", r.male_subjects},
                   {"female", r.female_subjects},
                   {"total", r.male_subjects + r.female_subjects}};
  j["images"] = r.image_count;
  j["probe_images"] = r.probe_count;
  j["probes_per_subject"] = {{"min", r.min_probes_per_subject},
                             {"max", r.max_probes_per_subject}};
  j["morph_pairs"] = r.pair_count;
  std::cout << j.dump(2) << "\n";
  return r.ok() ? 0 : kExitInput;
}

int run_pairs(const std::string& path, const std::string& policy,
              std::optional<std::size_t> limit, std::uint64_t seed) {
  const auto pairs = generate_pairs(load_manifest(path), parse_pair_policy(policy), limit, seed);
  ordered_json j = ordered_json::array();
  for (const auto& p : pairs) {
    j.push_back({{"subject_a", p.subject_a},
                 {"subject_b", p.subject_b},
                 {"slice", to_string(p.slice)}});
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"morphlab: latent morph generation and morph attack vulnerability reports"};
  app.require_subcommand(1);
  std::string config_unused;

  auto with_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_unused, "key=value file; flags override it");
  };

  MorphArgs morph;
  auto* morph_cmd = app.add_subcommand("morph", "build a morph latent from two LTF latents");
  morph_cmd->add_option("--s1", morph.s1, "subject-1 latent (18x512 LTF)")->required();
  morph_cmd->add_option("--s2", morph.s2, "subject-2 latent (18x512 LTF)")->required();
  morph_cmd->add_option("--out", morph.out, "output LTF (directory with --alphas)")->required();
  morph_cmd->add_option("--direction", morph.direction, "identity-transfer direction (k x 512 LTF)");
  morph_cmd->add_option("--alpha", morph.alpha, "interpolation factor in [0,1]")
      ->capture_default_str();
  morph_cmd->add_option("--alphas", morph.alphas, "comma-separated alpha sweep")->delimiter(',');
  morph_cmd->add_option("--k", morph.k, "identity row count")->capture_default_str();
  morph_cmd->add_option("--mode", morph.mode, "identity rows: spherical|linear")
      ->capture_default_str();
  morph_cmd->add_option("--attr-policy", morph.attr_policy, "attribute rows: spherical|linear")
      ->capture_default_str();
  morph_cmd->add_option("--epsilon", morph.epsilon, "degenerate-angle threshold (radians)")
      ->capture_default_str();
  with_config(morph_cmd);

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "print shape and row norms of an LTF file");
  inspect_cmd->add_option("file", inspect_path)->required();

  std::string split_in, split_id, split_attr;
  std::size_t split_k = kDefaultIdentityRows;
  auto* split_cmd = app.add_subcommand("split", "split a latent into identity and attribute rows");
  split_cmd->add_option("--in", split_in)->required();
  split_cmd->add_option("--k", split_k)->capture_default_str();
  split_cmd->add_option("--identity-out", split_id)->required();
  split_cmd->add_option("--attributes-out", split_attr)->required();

  std::string merge_id, merge_attr, merge_out;
  auto* merge_cmd = app.add_subcommand("merge", "merge identity and attribute rows");
  merge_cmd->add_option("--identity", merge_id)->required();
  merge_cmd->add_option("--attributes", merge_attr)->required();
  merge_cmd->add_option("--out", merge_out)->required();

  std::string cal_impostors, cal_out;
  double cal_fmr = 0.01;
  auto* cal_cmd = app.add_subcommand("calibrate", "per-FRS thresholds at a target FMR");
  cal_cmd->add_option("--impostors", cal_impostors, "CSV frs,score")->required();
  cal_cmd->add_option("--fmr", cal_fmr, "target false match rate")->required();
  cal_cmd->add_option("--out", cal_out, "thresholds CSV (default stdout)");
  with_config(cal_cmd);

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "MMPMR / FMMPMR / G-MAP report");
  eval_cmd->add_option("--manifest", eval.manifest)->required();
  eval_cmd->add_option("--scores", eval.scores, "CSV generator,frs,morph_id,attempt,slot,score")
      ->required();
  eval_cmd->add_option("--ftar", eval.ftar, "CSV frs,attempt,ftar");
  eval_cmd->add_option("--thresholds", eval.thresholds, "CSV frs,tau");
  eval_cmd->add_option("--calibrate", eval.calibrate, "impostor CSV frs,score");
  eval_cmd->add_option("--fmr", eval.fmr, "target FMR for --calibrate");
  eval_cmd->add_option("--metric", eval.metrics, "gmap|mmpmr|fmmpmr|all")->delimiter(',');
  eval_cmd->add_option("--mode", eval.mode, "eq5-min|and-per-pair")->capture_default_str();
  eval_cmd->add_option("--slice", eval.slice, "all|male|female|combined")->capture_default_str();
  eval_cmd->add_option("--report", eval.report, "output JSON (default stdout)");
  eval_cmd->add_flag("--no-timestamp", eval.no_timestamp);
  with_config(eval_cmd);

  std::string q_pairs, q_report;
  bool q_no_ts = false;
  auto* q_cmd = app.add_subcommand("quality", "PSNR per image pair plus box-plot stats");
  q_cmd->add_option("--pairs", q_pairs, "lines ref_path,test_path")->required();
  q_cmd->add_option("--report", q_report, "output JSON (default stdout)");
  q_cmd->add_flag("--no-timestamp", q_no_ts);
  with_config(q_cmd);

  std::string v_manifest;
  auto* v_cmd = app.add_subcommand("validate", "check manifest invariants");
  v_cmd->add_option("--manifest", v_manifest)->required();

  std::string p_manifest, p_policy = "same-gender";
  std::optional<std::size_t> p_limit;
  std::uint64_t p_seed = 0;
  auto* p_cmd = app.add_subcommand("pairs", "enumerate morph pairs from a manifest");
  p_cmd->add_option("--manifest", p_manifest)->required();
  p_cmd->add_option("--policy", p_policy, "same-gender|all-pairs")->capture_default_str();
  p_cmd->add_option("--limit", p_limit);
  p_cmd->add_option("--seed", p_seed)->capture_default_str();
  with_config(p_cmd);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (*morph_cmd) return run_morph(morph);
    if (*inspect_cmd) return run_inspect(inspect_path);
    if (*split_cmd) return run_split(split_in, split_k, split_id, split_attr);
    if (*merge_cmd) return run_merge(merge_id, merge_attr, merge_out);
    if (*cal_cmd) return run_calibrate(cal_impostors, cal_fmr, cal_out);
    if (*eval_cmd) return run_evaluate(eval);
    if (*q_cmd) return run_quality(q_pairs, q_report, q_no_ts);
    if (*v_cmd) return run_validate(v_manifest);
    if (*p_cmd) return run_pairs(p_manifest, p_policy, p_limit, p_seed);
  } catch (const DegenerateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
