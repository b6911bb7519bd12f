#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "morphlab/metrics.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace morphlab;
using testing_support::TempDir;

namespace {

// Two morphs, two attempts, one generator and one FRS.
//   morph 1: attempt 0 (0.6, 0.7), attempt 1 (0.6, 0.4)
//   morph 2: attempt 0 (0.55, 0.52), attempt 1 (0.3, 0.9)
ScoreTable two_by_two() {
  ScoreTable t;
  auto put = [&](const std::string& m, std::uint32_t a, double s1, double s2) {
    t.add({"mlsd", "arcface", m, a, 1}, s1);
    t.add({"mlsd", "arcface", m, a, 2}, s2);
  };
  put("m1", 0, 0.6, 0.7);
  put("m1", 1, 0.6, 0.4);
  put("m2", 0, 0.55, 0.52);
  put("m2", 1, 0.3, 0.9);
  return t;
}

ThresholdMap tau(const std::string& frs, double v) {
  Threshold t;
  t.frs = frs;
  t.tau = v;
  return {{frs, t}};
}

}  // namespace

// Calibration ---------------------------------------------------------------

TEST(Calibrate, HundredScoresAtOnePercent) {
  std::vector<double> s;
  for (int i = 1; i <= 100; ++i) s.push_back(i / 100.0);
  const auto expect = oracle::scan_threshold(s, 0.01);
  EXPECT_EQ(expect.tau, 1.00);
  EXPECT_EQ(expect.fmr, 0.01);
  const auto t = calibrate_threshold(s, 0.01);
  EXPECT_EQ(t.tau, 1.00);
  EXPECT_EQ(*t.achieved_fmr, 0.01);
  EXPECT_EQ(t.impostor_count, 100u);
}

TEST(Calibrate, TargetOneAcceptsEverything) {
  const std::vector<double> s{0.3, -0.2, 0.9, 0.1};
  const auto t = calibrate_threshold(s, 1.0);
  EXPECT_EQ(t.tau, -0.2);
  EXPECT_EQ(*t.achieved_fmr, 1.0);
}

TEST(Calibrate, TiesForceSentinel) {
  const std::vector<double> s{0.5, 0.5, 0.5};
  const auto t = calibrate_threshold(s, 0.01);
  EXPECT_GT(t.tau, 0.5);
  EXPECT_EQ(t.tau, std::nextafter(0.5, 1.0));
  EXPECT_EQ(*t.achieved_fmr, 0.0);
  EXPECT_EQ(t.tau, oracle::scan_threshold(s, 0.01).tau);
}

TEST(Calibrate, Errors) {
  EXPECT_THROW(calibrate_threshold(std::vector<double>{}, 0.01), InputError);
  EXPECT_THROW(calibrate_threshold(std::vector<double>{0.1}, 0.0), InputError);
  EXPECT_THROW(calibrate_threshold(std::vector<double>{0.1}, 1.5), InputError);
  EXPECT_THROW(calibrate_threshold(std::vector<double>{0.1, NAN}, 0.1), InputError);
}

TEST(Calibrate, SoundAndMinimalOnRandomSets) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> size(1, 300), grid(0, 50);
  std::uniform_real_distribution<double> target(0.001, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(static_cast<std::size_t>(size(rng)));
    for (auto& x : s) x = grid(rng) / 50.0;
    const double fmr = target(rng);
    const auto t = calibrate_threshold(s, fmr);
    const auto o = oracle::scan_threshold(s, fmr);
    ASSERT_EQ(t.tau, o.tau);
    ASSERT_EQ(*t.achieved_fmr, o.fmr);
    ASSERT_LE(*t.achieved_fmr, fmr);
    for (double c : s) {
      if (c < t.tau) {
        ASSERT_GT(oracle::fmr_at(s, c), fmr);
      }
    }
  }
}

// Hand-enumerated instance -----------------------------------------------------

TEST(Gmap, TwoByTwoInstance) {
  const auto t = two_by_two();
  EXPECT_EQ(gmap(t, tau("arcface", 0.5), {}, GmapMode::eq5_min), Rational(1, 2));
  EXPECT_EQ(gmap(t, tau("arcface", 0.5), {}, GmapMode::and_per_pair), Rational(1, 2));
  FtarTable f;
  f.set(0, "arcface", 0.5);
  EXPECT_EQ(gmap(t, tau("arcface", 0.5), f, GmapMode::eq5_min), Rational(1, 4));
}

TEST(Gmap, Saturation) {
  const auto t = two_by_two();
  EXPECT_EQ(gmap(t, tau("arcface", 0.0), {}, GmapMode::eq5_min), 1);
  EXPECT_EQ(gmap(t, tau("arcface", 0.95), {}, GmapMode::eq5_min), 0);
  EXPECT_EQ(gmap(t, tau("arcface", 0.95), {}, GmapMode::and_per_pair), 0);
}

TEST(Gmap, MissingThresholdIsConfigGap) {
  EXPECT_THROW(gmap(two_by_two(), tau("magface", 0.5), {}, GmapMode::eq5_min), ConfigError);
}

TEST(Gmap, MissingSlotIsInputError) {
  ScoreTable t;
  t.add({"g", "f", "m", 0, 1}, 0.9);
  EXPECT_THROW(gmap(t, tau("f", 0.5), {}, GmapMode::eq5_min), InputError);
}

TEST(Gmap, DeclaredFrsWithoutScoresIsInputError) {
  auto t = two_by_two();
  t.declare_frs("magface");
  auto th = tau("arcface", 0.5);
  th["magface"] = th["arcface"];
  EXPECT_THROW(gmap(t, th, {}, GmapMode::eq5_min), InputError);
}

TEST(Gmap, RaggedAttemptsRejected) {
  auto t = two_by_two();
  t.add({"mlsd", "arcface", "m3", 0, 1}, 0.9);
  t.add({"mlsd", "arcface", "m3", 0, 2}, 0.9);
  EXPECT_THROW(gmap(t, tau("arcface", 0.5), {}, GmapMode::eq5_min), InputError);
  ScoreTable gap;
  gap.add({"g", "f", "m", 1, 1}, 0.9);
  gap.add({"g", "f", "m", 1, 2}, 0.9);
  EXPECT_THROW(gmap(gap, tau("f", 0.5), {}, GmapMode::eq5_min), InputError);
}

// Min-after-sum and per-pair AND disagree when FRS reject different
// pairs: A rejects morph x, B rejects morph y.
TEST(Gmap, ModesDifferWhenFrsDisagree) {
  ScoreTable t;
  for (const char* frs : {"A", "B"}) {
    for (const char* m : {"x", "y"}) {
      const bool reject = (std::string(frs) == "A") == (std::string(m) == "x");
      t.add({"g", frs, m, 0, 1}, reject ? 0.1 : 0.9);
      t.add({"g", frs, m, 0, 2}, 0.9);
    }
  }
  ThresholdMap th = tau("A", 0.5);
  th["B"] = Threshold{"B", 0.5};
  EXPECT_EQ(gmap(t, th, {}, GmapMode::eq5_min), Rational(1, 2));
  EXPECT_EQ(gmap(t, th, {}, GmapMode::and_per_pair), 0);
}

TEST(Gmap, AndModeUsesWorstFtar) {
  ScoreTable t;
  for (const char* frs : {"A", "B"}) {
    t.add({"g", frs, "m", 0, 1}, 0.9);
    t.add({"g", frs, "m", 0, 2}, 0.9);
  }
  ThresholdMap th = tau("A", 0.5);
  th["B"] = Threshold{"B", 0.5};
  FtarTable f;
  f.set(0, "A", 0.25);
  f.set(0, "B", 0.5);
  EXPECT_EQ(gmap(t, th, f, GmapMode::and_per_pair), Rational(1, 2));
  EXPECT_EQ(gmap(t, th, f, GmapMode::eq5_min), Rational(1, 2));
}

TEST(Fmmpmr, Examples) {
  EXPECT_EQ(fmmpmr(two_by_two(), 0.5), Rational(1, 2));
  EXPECT_EQ(fmmpmr(two_by_two(), 0.0), 1);
  ScoreTable strict;
  strict.add({"g", "f", "m", 0, 1}, 0.51);
  strict.add({"g", "f", "m", 0, 2}, 0.50);
  EXPECT_EQ(fmmpmr(strict, 0.5), 0);
}

TEST(Mmpmr, Examples) {
  EXPECT_EQ(mmpmr(two_by_two(), 0.5), 1);
  EXPECT_EQ(mmpmr(two_by_two(), 0.95), 0);
  ScoreTable one;
  one.add({"g", "f", "m", 0, 1}, 0.7);
  one.add({"g", "f", "m", 0, 2}, 0.6);
  EXPECT_EQ(mmpmr(one, 0.65), fmmpmr(one, 0.65));
  EXPECT_EQ(mmpmr(one, 0.5), fmmpmr(one, 0.5));
}

TEST(SingleCellMetrics, RejectMultipleGeneratorsOrFrs) {
  auto t = two_by_two();
  t.add({"other", "arcface", "z", 0, 1}, 0.9);
  t.add({"other", "arcface", "z", 0, 2}, 0.9);
  EXPECT_THROW(fmmpmr(t, 0.5), InputError);
  EXPECT_THROW(mmpmr(t, 0.5), InputError);
  auto u = two_by_two();
  u.declare_frs("magface");
  EXPECT_THROW(fmmpmr(u, 0.5), InputError);
}

// Properties on random instances --------------------------------------------------

TEST(MetricProperties, OracleOrderingBoundsAndMonotonicity) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 150; ++trial) {
    const auto in = oracle::random_instance(rng);
    const auto table = testing_support::to_table(in);
    const auto th = testing_support::to_thresholds(in);
    const auto ftar = testing_support::to_ftar(in);
    const Rational eq5 = gmap(table, th, ftar, GmapMode::eq5_min);
    const Rational conj = gmap(table, th, ftar, GmapMode::and_per_pair);
    ASSERT_EQ(eq5, oracle::gmap_eq5_min(in));
    ASSERT_EQ(conj, oracle::gmap_and_per_pair(in));
    ASSERT_LE(conj, eq5);
    ASSERT_GE(conj, 0);
    ASSERT_LE(eq5, 1);

    // raising any single threshold never increases a metric
    for (std::size_t f = 0; f < in.frs; ++f) {
      auto raised = th;
      raised[oracle::name("f", f)].tau += 0.1;
      ASSERT_LE(gmap(table, raised, ftar, GmapMode::eq5_min), eq5);
      ASSERT_LE(gmap(table, raised, ftar, GmapMode::and_per_pair), conj);
    }

    for (std::size_t d = 0; d < in.morphs.size(); ++d) {
      for (std::size_t f = 0; f < in.frs; ++f) {
        const auto cell = table.restrict_to(oracle::name("g", d), oracle::name("f", f));
        const double t = in.taus[f];
        const Rational fm = fmmpmr(cell, t);
        const Rational mm = mmpmr(cell, t);
        ASSERT_EQ(mm, oracle::mmpmr(in, d, f));
        ASSERT_GE(mm, fm);
        ASSERT_EQ(gmap(cell, th, {}, GmapMode::eq5_min), fm);
        ASSERT_LE(fmmpmr(cell, t + 0.05), fm);
        ASSERT_LE(mmpmr(cell, t + 0.05), mm);
      }
    }
  }
}

// CSV ingestion ---------------------------------------------------------------------

TEST(ScoreCsv, ParsesAndRejects) {
  TempDir dir;
  {
    std::ofstream f(dir / "s.csv");
    f << "generator,frs,morph_id,attempt,slot,score\n"
         "g,arcface,m1,0,1,0.6\n"
         "g,arcface,m1,0,2,0.7\n";
  }
  const auto t = read_score_csv(dir / "s.csv");
  EXPECT_EQ(t.entries().size(), 2u);
  EXPECT_EQ(*t.find({"g", "arcface", "m1", 0, 2}), 0.7);

  auto expect_bad = [&](const std::string& body, const std::string& needle) {
    {
      std::ofstream f(dir / "bad.csv");
      f << body;
    }
    try {
      read_score_csv(dir / "bad.csv");
      ADD_FAILURE() << "accepted: " << body;
    } catch (const InputError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_bad("generator,frs,morph,attempt,slot,score\n", "header");
  expect_bad("generator,frs,morph_id,attempt,slot,score\ng,f,m,0,3,0.5\n", "slot");
  expect_bad("generator,frs,morph_id,attempt,slot,score\ng,f,m,0,1,abc\n", "not a number");
  expect_bad("generator,frs,morph_id,attempt,slot,score\ng,f,m,0,1,0.5\n",
             "line 2 'g,f,m,0,1,0.5'");
  expect_bad("generator,frs,morph_id,attempt,slot,score\ng,f,m,0,1,0.5\ng,f,m,0,1,0.6\n",
             "duplicate");
  expect_bad("generator,frs,morph_id,attempt,slot,score\ng,f,m,-1,1,0.5\n", "integer");
  expect_bad("generator,frs,morph_id,attempt,slot,score\ng,f,m,0,1\n", "fields");
}

TEST(FtarCsv, RangeChecked) {
  TempDir dir;
  {
    std::ofstream f(dir / "f.csv");
    f << "frs,attempt,ftar\narcface,0,0.5\nmagface,1,0\n";
  }
  const auto t = read_ftar_csv(dir / "f.csv");
  EXPECT_EQ(t.get(0, "arcface"), 0.5);
  EXPECT_EQ(t.get(1, "arcface"), 0.0);
  {
    std::ofstream f(dir / "f.csv");
    f << "frs,attempt,ftar\narcface,0,1.5\n";
  }
  EXPECT_THROW(read_ftar_csv(dir / "f.csv"), InputError);
}

TEST(ThresholdCsv, DuplicateRejected) {
  TempDir dir;
  {
    std::ofstream f(dir / "t.csv");
    f << "frs,tau\narcface,0.4\narcface,0.5\n";
  }
  EXPECT_THROW(read_threshold_csv(dir / "t.csv"), InputError);
}
