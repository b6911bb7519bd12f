#pragma once

// Morph attack success metrics and FMR threshold calibration.
//
// All rates are accumulated as exact rationals and converted to double only
// for reporting, so results do not depend on summation order.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "morphlab/error.hpp"
#include "morphlab/scores.hpp"

namespace morphlab {

using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

enum class GmapMode {
  // min over FRS of the per-FRS success rate, averaged over generators
  eq5_min,
  // a pair succeeds only if every FRS accepts both subjects
  and_per_pair,
};

inline std::string_view to_string(GmapMode m) {
  return m == GmapMode::eq5_min ? "eq5-min" : "and-per-pair";
}

inline GmapMode parse_gmap_mode(std::string_view s) {
  if (s == "eq5-min") return GmapMode::eq5_min;
  if (s == "and-per-pair") return GmapMode::and_per_pair;
  throw InputError("unknown G-MAP mode '" + std::string(s) + "'");
}

// Threshold calibration ----------------------------------------------------

inline double false_match_rate(std::span<const double> impostors, double tau) {
  const auto hits = std::count_if(impostors.begin(), impostors.end(),
                                  [tau](double s) { return s >= tau; });
  return static_cast<double>(hits) / static_cast<double>(impostors.size());
}

/// Smallest tau among the impostor score values, plus one sentinel just above
/// the maximum, whose false match rate (fraction of impostors >= tau) does not
/// exceed `target_fmr`.
inline Threshold calibrate_threshold(std::span<const double> impostors, double target_fmr,
                                     std::string frs = {}) {
  if (impostors.empty()) throw InputError("no impostor scores to calibrate from");
  if (!(target_fmr > 0.0 && target_fmr <= 1.0)) {
    throw InputError("target FMR " + std::to_string(target_fmr) + " outside (0,1]");
  }
  std::vector<double> sorted(impostors.begin(), impostors.end());
  for (double s : sorted) {
    if (!std::isfinite(s)) throw InputError("non-finite impostor score");
  }
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());

  Threshold t;
  t.frs = std::move(frs);
  t.target_fmr = target_fmr;
  t.impostor_count = sorted.size();
  // FMR at sorted[i] counts everything from the first copy of that value on.
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && sorted[i] == sorted[i - 1]) continue;
    const double fmr = static_cast<double>(sorted.size() - i) / n;
    if (fmr <= target_fmr) {
      t.tau = sorted[i];
      t.achieved_fmr = fmr;
      return t;
    }
  }
  t.tau = std::nextafter(sorted.back(), std::numeric_limits<double>::infinity());
  t.achieved_fmr = 0.0;
  return t;
}

// Success metrics ----------------------------------------------------------

namespace detail {

inline const Threshold& threshold_for(const ThresholdMap& thresholds, const std::string& frs) {
  auto it = thresholds.find(frs);
  if (it == thresholds.end()) throw ConfigError("no threshold for FRS '" + frs + "'");
  return it->second;
}

inline bool pair_accepted(const GeneratorBlock& b, std::size_t f, std::size_t m,
                          std::size_t a, double tau) {
  for (int s = 1; s <= kSubjectSlots; ++s) {
    if (!(b.at(f, m, a, s) > tau)) return false;
  }
  return true;
}

inline void require_single(const std::vector<GeneratorBlock>& blocks, std::string_view what) {
  if (blocks.size() != 1 || blocks.front().frs.size() != 1) {
    throw InputError(std::string(what) +
                     " needs scores from exactly one generator and one FRS");
  }
}

}  // namespace detail

/// Generalized morphing attack potential.
///
/// eq5_min: per generator d and FRS l,
///   V(d,l) = sum_{attempt i, morph j} [S1 > tau_l and S2 > tau_l] (1 - FTAR(i,l))
///            / (|T_d| |M_d|),
/// result = mean over d of min over l of V(d,l).
///
/// and_per_pair: per generator, the bracket requires acceptance under every
/// FRS and is weighted by 1 - max_l FTAR(i,l); result = mean over d.
inline Rational gmap(const ScoreTable& table, const ThresholdMap& thresholds,
                     const FtarTable& ftar, GmapMode mode) {
  const auto blocks = arrange(table);
  for (const auto& f : blocks.front().frs) detail::threshold_for(thresholds, f);

  Rational total = 0;
  for (const auto& b : blocks) {
    const Rational cells = Rational(b.attempts) * Rational(b.morphs.size());
    std::vector<double> taus;
    for (const auto& f : b.frs) taus.push_back(detail::threshold_for(thresholds, f).tau);

    if (mode == GmapMode::eq5_min) {
      Rational best;
      for (std::size_t f = 0; f < b.frs.size(); ++f) {
        Rational sum = 0;
        for (std::size_t a = 0; a < b.attempts; ++a) {
          std::size_t hits = 0;
          for (std::size_t m = 0; m < b.morphs.size(); ++m) {
            hits += detail::pair_accepted(b, f, m, a, taus[f]) ? 1 : 0;
          }
          const Rational weight =
              1 - Rational(ftar.get(static_cast<std::uint32_t>(a), b.frs[f]));
          sum += weight * Rational(hits);
        }
        const Rational v = sum / cells;
        if (f == 0 || v < best) best = v;
      }
      total += best;
    } else {
      Rational sum = 0;
      for (std::size_t a = 0; a < b.attempts; ++a) {
        double worst_ftar = 0.0;
        for (const auto& f : b.frs) {
          worst_ftar = std::max(worst_ftar, ftar.get(static_cast<std::uint32_t>(a), f));
        }
        std::size_t hits = 0;
        for (std::size_t m = 0; m < b.morphs.size(); ++m) {
          bool all = true;
          for (std::size_t f = 0; f < b.frs.size() && all; ++f) {
            all = detail::pair_accepted(b, f, m, a, taus[f]);
          }
          hits += all ? 1 : 0;
        }
        sum += (1 - Rational(worst_ftar)) * Rational(hits);
      }
      total += sum / cells;
    }
  }
  return total / Rational(blocks.size());
}

/// Fully mated MMPMR: fraction of (attempt, morph) cells in which both
/// subjects' probes of the same attempt exceed tau. Single generator and FRS.
inline Rational fmmpmr(const ScoreTable& table, double tau) {
  const auto blocks = arrange(table);
  detail::require_single(blocks, "FMMPMR");
  const auto& b = blocks.front();
  std::size_t hits = 0;
  for (std::size_t m = 0; m < b.morphs.size(); ++m) {
    for (std::size_t a = 0; a < b.attempts; ++a) hits += detail::pair_accepted(b, 0, m, a, tau);
  }
  return Rational(hits) / (Rational(b.attempts) * Rational(b.morphs.size()));
}

/// MMPMR: a morph succeeds when, for each subject slot, the best score over
/// that slot's attempts exceeds tau. Single generator and FRS.
inline Rational mmpmr(const ScoreTable& table, double tau) {
  const auto blocks = arrange(table);
  detail::require_single(blocks, "MMPMR");
  const auto& b = blocks.front();
  std::size_t hits = 0;
  for (std::size_t m = 0; m < b.morphs.size(); ++m) {
    bool ok = true;
    for (int s = 1; s <= kSubjectSlots; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < b.attempts; ++a) best = std::max(best, b.at(0, m, a, s));
      ok = ok && best > tau;
    }
    hits += ok ? 1 : 0;
  }
  return Rational(hits) / Rational(b.morphs.size());
}

}  // namespace morphlab
