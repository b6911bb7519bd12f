#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "morphlab/image.hpp"
#include "morphlab/quality.hpp"
#include "test_support.hpp"

using namespace morphlab;
using testing_support::TempDir;

TEST(Psnr, IdenticalImagesAreInfinite) {
  const ImageBuffer a(8, 4, 3, 77);
  EXPECT_TRUE(std::isinf(psnr(a, a)));
}

TEST(Psnr, MaximalErrorIsZeroDb) {
  EXPECT_EQ(psnr(ImageBuffer(5, 5, 3, 0), ImageBuffer(5, 5, 3, 255)), 0.0);
}

TEST(Psnr, ConstantOffsetSixteen) {
  const double expected = 20 * std::log10(255.0 / 16.0);
  EXPECT_NEAR(expected, 24.0484, 1e-4);
  EXPECT_NEAR(psnr(ImageBuffer(6, 3, 1, 0), ImageBuffer(6, 3, 1, 16)), expected, 1e-12);
}

TEST(Psnr, ChannelsPooled) {
  // one channel off by 30 everywhere: MSE = 900 / 3 = 300
  ImageBuffer a(4, 4, 3, 100), b(4, 4, 3, 100);
  for (std::size_t i = 0; i < b.samples.size(); i += 3) b.samples[i] = 130;
  EXPECT_NEAR(psnr(a, b), 10 * std::log10(255.0 * 255.0 / 300.0), 1e-12);
}

TEST(Psnr, MismatchRejected) {
  EXPECT_THROW(psnr(ImageBuffer(4, 4, 3), ImageBuffer(4, 5, 3)), InputError);
  EXPECT_THROW(psnr(ImageBuffer(4, 4, 3), ImageBuffer(4, 4, 1)), InputError);
}

TEST(PsnrProperties, SymmetricAndDetectsShift) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> px(20, 235), c(1, 20), dim(1, 16);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t w = dim(rng), h = dim(rng);
    ImageBuffer a(w, h, 3), b(w, h, 3);
    for (auto& s : a.samples) s = static_cast<std::uint8_t>(px(rng));
    for (auto& s : b.samples) s = static_cast<std::uint8_t>(px(rng));
    EXPECT_EQ(psnr(a, b), psnr(b, a));
    ImageBuffer shifted = a;
    const int k = c(rng);
    for (auto& s : shifted.samples) s = static_cast<std::uint8_t>(s + k);
    EXPECT_LT(psnr(a, shifted), psnr(a, a));
  }
}

TEST(ImageBuffer, Invariants) {
  EXPECT_THROW(ImageBuffer(0, 4, 3), InputError);
  EXPECT_THROW(ImageBuffer(4, 4, 2), InputError);
  EXPECT_THROW(ImageBuffer(2, 2, 1, std::vector<std::uint8_t>(3)), InputError);
}

TEST(ImageIo, PngAndPpmRoundTrip) {
  TempDir dir;
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<int> px(0, 255);
  ImageBuffer rgb(7, 5, 3), gray(3, 9, 1);
  for (auto& s : rgb.samples) s = static_cast<std::uint8_t>(px(rng));
  for (auto& s : gray.samples) s = static_cast<std::uint8_t>(px(rng));

  write_png(rgb, dir / "rgb.png");
  write_png(gray, dir / "gray.png");
  write_ppm(rgb, dir / "rgb.ppm");
  for (const char* name : {"rgb.png", "rgb.ppm"}) {
    const auto back = read_image(dir / name);
    EXPECT_EQ(back.samples, rgb.samples) << name;
    EXPECT_EQ(back.channels, 3u);
  }
  const auto g = read_image(dir / "gray.png");
  EXPECT_EQ(g.channels, 1u);
  EXPECT_EQ(g.samples, gray.samples);
}

TEST(ImageIo, PngAlphaIsDropped) {
  TempDir dir;
  std::vector<std::uint8_t> rgba{10, 20, 30, 0, 40, 50, 60, 128};
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = 2;
  image.height = 1;
  image.format = PNG_FORMAT_RGBA;
  const auto path = (dir / "a.png").string();
  ASSERT_TRUE(png_image_write_to_file(&image, path.c_str(), 0, rgba.data(), 0, nullptr));
  const auto img = read_image(path);
  EXPECT_EQ(img.channels, 3u);
  EXPECT_EQ(img.samples, (std::vector<std::uint8_t>{10, 20, 30, 40, 50, 60}));
}

TEST(ImageIo, PpmWithCommentsAndBadInput) {
  TempDir dir;
  {
    std::ofstream f(dir / "c.ppm", std::ios::binary);
    f << "P6\n# made by hand\n2 1\n255\n";
    f.write("\x01\x02\x03\x04\x05\x06", 6);
  }
  EXPECT_EQ(read_image(dir / "c.ppm").samples, (std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6}));
  {
    std::ofstream f(dir / "t.ppm", std::ios::binary);
    f << "P6\n2 2\n255\n";
    f.write("\x01\x02\x03", 3);
  }
  EXPECT_THROW(read_image(dir / "t.ppm"), InputError);
  {
    std::ofstream f(dir / "m.ppm", std::ios::binary);
    f << "P6\n1 1\n65535\n";
  }
  EXPECT_THROW(read_image(dir / "m.ppm"), InputError);
  {
    std::ofstream f(dir / "junk.png", std::ios::binary);
    f << "not an image";
  }
  EXPECT_THROW(read_image(dir / "junk.png"), InputError);
  EXPECT_THROW(read_image(dir / "missing.png"), InputError);
}

TEST(BoxPlot, OneToNine) {
  const std::vector<double> v{9, 1, 8, 2, 7, 3, 6, 4, 5};
  const auto s = boxplot_stats(v);
  EXPECT_EQ(s.median, 5);
  EXPECT_EQ(s.q1, 3);
  EXPECT_EQ(s.q3, 7);
  EXPECT_EQ(s.lower_whisker, 1);
  EXPECT_EQ(s.upper_whisker, 9);
  EXPECT_EQ(s.minimum, 1);
  EXPECT_EQ(s.maximum, 9);
  EXPECT_TRUE(s.outliers.empty());
  EXPECT_EQ(s.n, 9u);
}

TEST(BoxPlot, Singleton) {
  const std::vector<double> v{42};
  const auto s = boxplot_stats(v);
  for (double x : {s.minimum, s.q1, s.median, s.q3, s.maximum, s.lower_whisker, s.upper_whisker}) {
    EXPECT_EQ(x, 42);
  }
  EXPECT_TRUE(s.outliers.empty());
}

TEST(BoxPlot, UpperOutlier) {
  const std::vector<double> v{1, 2, 3, 4, 100};
  const auto s = boxplot_stats(v);
  EXPECT_EQ(s.q1, 2);
  EXPECT_EQ(s.q3, 4);
  EXPECT_EQ(s.upper_whisker, 4);
  EXPECT_EQ(s.lower_whisker, 1);
  EXPECT_EQ(s.outliers, std::vector<double>{100});
}

TEST(BoxPlot, InterpolatedQuartiles) {
  // n = 4: q1 at position 0.75, q3 at 2.25
  const std::vector<double> v{0, 100, 100, 100};
  const auto s = boxplot_stats(v);
  EXPECT_EQ(s.q1, 75);
  EXPECT_EQ(s.q3, 100);
  EXPECT_EQ(s.outliers, std::vector<double>{0});
  // no inlier at or below q1, so the whisker collapses onto it
  EXPECT_EQ(s.lower_whisker, 75);
}

TEST(BoxPlot, Errors) {
  EXPECT_THROW(boxplot_stats(std::vector<double>{}), InputError);
  EXPECT_THROW(boxplot_stats(std::vector<double>{1, INFINITY}), InputError);
}

TEST(BoxPlotProperties, FieldOrdering) {
  std::mt19937_64 rng(33);
  std::uniform_int_distribution<int> n(1, 40);
  std::lognormal_distribution<double> heavy(3.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(n(rng)));
    for (auto& x : v) x = std::round(heavy(rng));
    const auto s = boxplot_stats(v);
    ASSERT_LE(s.minimum, s.lower_whisker);
    ASSERT_LE(s.lower_whisker, s.q1);
    ASSERT_LE(s.q1, s.median);
    ASSERT_LE(s.median, s.q3);
    ASSERT_LE(s.q3, s.upper_whisker);
    ASSERT_LE(s.upper_whisker, s.maximum);
    const double iqr = s.q3 - s.q1;
    for (double o : s.outliers) {
      ASSERT_TRUE(o < s.q1 - 1.5 * iqr || o > s.q3 + 1.5 * iqr);
    }
  }
}
