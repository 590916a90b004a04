// Copyright 2026 The wmbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// -----------------------------------------------------------------------------

// Keys, embedding round trips and detector behaviour on unmarked images.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "wmbench/synth.hpp"
#include "wmbench/watermark.hpp"

namespace wmbench {
namespace {

constexpr std::uint64_t kKey = 0xB5AD4ECEDA1CE2A9ULL;

const std::vector<Image>& Corpus() {
  static const std::vector<Image> corpus = SynthNaturalCorpus(/*seed=*/31, 8);
  return corpus;
}

TEST(KeyTest, ParseAndPrintAreInverse) {
  const std::string bits =
      "1011010110101101010011101100111011011010000111001110001010101001";
  const WatermarkKey k = WatermarkKey::Parse(bits);
  EXPECT_EQ(k.ToU64(), kKey);
  EXPECT_EQ(k.ToString(), bits);
  EXPECT_TRUE(k.bit(0));
  EXPECT_FALSE(k.bit(1));
}

TEST(KeyTest, ParseRejectsBadInput) {
  EXPECT_THROW(WatermarkKey::Parse("0101"), std::invalid_argument);
  EXPECT_THROW(WatermarkKey::Parse(std::string(63, '0') + "2"), std::invalid_argument);
}

TEST(KeyTest, LoadKeysSkipsCommentsAndBlankLines) {
  const auto p = std::filesystem::temp_directory_path() / "wmbench_keys_test.txt";
  {
    std::ofstream out(p);
    out << "# two keys\n\n" << std::string(64, '1') << "\r\n"
        << std::string(32, '0') << std::string(32, '1') << "\n";
  }
  const auto keys = LoadKeys(p);
  ASSERT_EQ(keys.size(), 2u);
  EXPECT_EQ(keys[0].ToU64(), ~0ULL);
  EXPECT_EQ(keys[1].ToU64(), 0xFFFFFFFFULL);
  std::filesystem::remove(p);
}

TEST(KeyTest, SplitMix64ReferenceSequence) {
  SplitMix64 rng(0);
  EXPECT_EQ(rng.Next(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(rng.Next(), 0x6E789E6AA1B965F4ULL);
}

TEST(KeyTest, ChipsAreBalancedAndKeyed) {
  const auto a = ExpandKey(WatermarkKey(kKey), 4096);
  const auto b = ExpandKey(WatermarkKey(kKey + 1), 4096);
  int sum = 0, agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_TRUE(a[i] == 1 || a[i] == -1);
    sum += a[i];
    agree += a[i] == b[i];
  }
  EXPECT_LT(std::abs(sum), 300);
  EXPECT_NEAR(agree / 4096.0, 0.5, 0.05);
}

//------------------------------------------------------------------------------

class SchemeTest : public ::testing::TestWithParam<SchemeKind> {};

TEST_P(SchemeTest, RoundTripRecoversEveryBit) {
  const WatermarkScheme scheme = WatermarkScheme::Default(GetParam());
  for (const Image& img : Corpus()) {
    const Image marked = Embed(img, WatermarkKey(kKey), scheme);
    ASSERT_TRUE(marked.SameShape(img));
    for (double v : marked.data()) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
    EXPECT_DOUBLE_EQ(Detect(marked, WatermarkKey(kKey), scheme).bit_accuracy, 1.0);
  }
}

TEST_P(SchemeTest, UnmarkedImagesDecodeNearChance) {
  const WatermarkScheme scheme = WatermarkScheme::Default(GetParam());
  double mean = 0.0;
  for (const Image& img : Corpus()) mean += Detect(img, WatermarkKey(kKey), scheme).confidence;
  mean /= Corpus().size();
  EXPECT_NEAR(mean, 0.5, 0.12);
}

TEST_P(SchemeTest, WrongKeyDoesNotDecode) {
  const WatermarkScheme scheme = WatermarkScheme::Default(GetParam());
  const Image marked = Embed(Corpus()[0], WatermarkKey(kKey), scheme);
  EXPECT_LT(Detect(marked, WatermarkKey(0x0123456789ABCDEFULL), scheme).bit_accuracy, 0.8);
}

TEST_P(SchemeTest, WorksOnGrayAndOddSizes) {
  const WatermarkScheme scheme = WatermarkScheme::Default(GetParam());
  Image gray = ToLuma(Crop(Corpus()[1], 203, 171));
  const Image marked = Embed(gray, WatermarkKey(kKey), scheme);
  ASSERT_TRUE(marked.SameShape(gray));
  EXPECT_DOUBLE_EQ(Detect(marked, WatermarkKey(kKey), scheme).bit_accuracy, 1.0);
}

INSTANTIATE_TEST_SUITE_P(AllSchemes, SchemeTest,
                         ::testing::Values(SchemeKind::kLsb, SchemeKind::kSsDct,
                                           SchemeKind::kDwtDct, SchemeKind::kDwtDctSvd),
                         [](const auto& info) { return std::string(SchemeName(info.param)); });

TEST(SchemeTest, NamesRoundTrip) {
  for (auto k : {SchemeKind::kLsb, SchemeKind::kSsDct, SchemeKind::kDwtDct,
                 SchemeKind::kDwtDctSvd}) {
    EXPECT_EQ(ParseSchemeKind(SchemeName(k)), k);
  }
  EXPECT_THROW(ParseSchemeKind("rivagan"), std::invalid_argument);
}

TEST(SchemeTest, ZeroStrengthIsIdentityForAdditiveSchemes) {
  const Image& img = Corpus()[2];
  EXPECT_EQ(Embed(img, WatermarkKey(kKey), {SchemeKind::kSsDct, 0.0}), img);
  EXPECT_EQ(Embed(img, WatermarkKey(kKey), {SchemeKind::kDwtDct, 0.0}), img);
  EXPECT_THROW(Embed(img, WatermarkKey(kKey), {SchemeKind::kDwtDctSvd, 0.0}),
               std::invalid_argument);
  EXPECT_THROW(Embed(img, WatermarkKey(kKey), {SchemeKind::kSsDct, -1.0}),
               std::invalid_argument);
}

TEST(SchemeTest, TooSmallImageIsACapacityError) {
  const Image tiny(8, 8, 1, 0.5);
  EXPECT_THROW(Embed(tiny, WatermarkKey(kKey), WatermarkScheme::Default(SchemeKind::kSsDct)),
               WatermarkCapacityError);
}

TEST(SchemeTest, StrengthControlsPerturbationMonotonically) {
  const Image& img = Corpus()[3];
  double prev = 0.0;
  for (double s : {0.005, 0.01, 0.02, 0.04}) {
    const double d = L2Distance(Embed(img, WatermarkKey(kKey), {SchemeKind::kSsDct, s}), img);
    EXPECT_GT(d, prev);
    prev = d;
  }
}

//------------------------------------------------------------------------------

TEST(PairedL2Test, ReportsOn255Scale) {
  // 100 samples differing by 1/255 each: l2 = sqrt(100) / 255 in [0,1] units.
  const Image a(10, 10, 1, 0.0);
  const Image b(10, 10, 1, 1.0 / 255.0);
  const std::vector<Image> xs{a, a}, ys{b, b};
  EXPECT_NEAR(PairedL2(xs, ys), 10.0, 1e-9);
  EXPECT_THROW(PairedL2(xs, std::vector<Image>{b}), std::invalid_argument);
}

TEST(PairedL2Test, CalibrationHitsTarget) {
  const std::vector<Image> imgs(Corpus().begin(), Corpus().begin() + 3);
  const double target = 1000.0;
  const double s = CalibrateStrength(imgs, WatermarkKey(kKey), SchemeKind::kSsDct, target,
                                     /*hi=*/1.0, /*iters=*/30);
  std::vector<Image> marked;
  for (const auto& im : imgs) marked.push_back(Embed(im, WatermarkKey(kKey), {SchemeKind::kSsDct, s}));
  EXPECT_NEAR(PairedL2(marked, imgs), target, 5.0);
}

}  // namespace
}  // namespace wmbench
