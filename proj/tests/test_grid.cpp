#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace neuropath;

TEST(Grid, LayoutIsXMajorChannelInnermost) {
  ImageGrid g(4, 3, 2);
  EXPECT_EQ(g.offset(0, 0, 1), 1u);
  EXPECT_EQ(g.offset(0, 1, 0), 2u);
  EXPECT_EQ(g.offset(1, 0, 0), 6u);
  EXPECT_EQ(g.offset(3, 2, 1), 23u);
  EXPECT_TRUE(g.contains(3, 2));
  EXPECT_FALSE(g.contains(4, 0));
  EXPECT_FALSE(g.contains(0, -1));
}

TEST(Grid, GrayscaleUsesLumaWeights) {
  ImageGrid rgb(1, 1, 3);
  rgb(0, 0, 0) = 1.0f;
  EXPECT_FLOAT_EQ(to_grayscale(rgb)(0, 0), 0.299f);
  rgb(0, 0, 0) = 0.0f;
  rgb(0, 0, 1) = 1.0f;
  EXPECT_FLOAT_EQ(to_grayscale(rgb)(0, 0), 0.587f);
  rgb(0, 0, 1) = 0.0f;
  rgb(0, 0, 2) = 1.0f;
  EXPECT_FLOAT_EQ(to_grayscale(rgb)(0, 0), 0.114f);
}

TEST(Grid, GrayscaleRejectsTwoChannels) {
  try {
    to_grayscale(ImageGrid(2, 2, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_channel);
  }
}

TEST(Grid, CenterCropKeepsMiddle) {
  ImageGrid g(7, 5, 1);
  for (int x = 0; x < 7; ++x)
    for (int y = 0; y < 5; ++y) g(x, y) = static_cast<float>(10 * x + y);
  const ImageGrid c = center_crop_to_multiple(g, 4);
  ASSERT_EQ(c.width(), 4);
  ASSERT_EQ(c.height(), 4);
  EXPECT_EQ(c(0, 0), 10.0f);  // x0 = 1, y0 = 0
  EXPECT_THROW(center_crop_to_multiple(g, 8), Error);
}

TEST(Grid, FlipIsInvolution) {
  neuropath::Rng rng(3);
  const ImageGrid g = random_grid(rng, 5, 4, 2);
  EXPECT_EQ(flip_horizontal(flip_horizontal(g)), g);
  EXPECT_EQ(flip_horizontal(g)(0, 1, 1), g(4, 1, 1));
}

TEST(Subsample, FloorDivisionExamples) {
  EXPECT_EQ(subsample_shift({-3, 0, 0}, 2).dx, -2);
  EXPECT_EQ(subsample_shift({3, 0, 0}, 2).dx, 1);
  EXPECT_EQ(subsample_shift({-4, 5, 0}, 2), (Shift{-2, 2, 0}));
  EXPECT_EQ(subsample_shift({-1, -1, 0}, 3), (Shift{-1, -1, 0}));
  EXPECT_EQ(subsample_shift({7, 0, 0}, 1).dx, 7);
}

TEST(Subsample, ZeroFactorRejected) {
  try {
    subsample_shift({1, 0, 0}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_factor);
  }
  EXPECT_THROW(SubsampleChain({1, 0}), Error);
}

TEST(Subsample, VggChainCarries228To57) {
  // c c p c c p c c: factors 1 1 2 1 1 2 1 1
  const SubsampleChain chain({1, 1, 2, 1, 1, 2, 1, 1});
  EXPECT_EQ(chain.carry(0, 8, {228, 0, 0}).dx, 57);
  EXPECT_EQ(carry_shift(chain, 0, 8, {228, 0, 0}).dx, 57);
  EXPECT_EQ(chain.product(0, 8), 4);
  EXPECT_EQ(chain.carry(2, 8, {228, 0, 0}).dx, 57);
}

TEST(Subsample, SmallChainExample) {
  const SubsampleChain chain({1, 2, 2});
  EXPECT_EQ(chain.carry(0, 3, {5, 0, 0}).dx, 1);
  EXPECT_EQ(chain.carry(0, 2, {5, 0, 0}).dx, 2);
}

TEST(Subsample, RangeChecked) {
  const SubsampleChain chain({1, 2});
  try {
    chain.carry(0, 3, {1, 0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::layer_range);
  }
  EXPECT_THROW(chain.carry(2, 1, {1, 0, 0}), Error);
}

TEST(Subsample, CompositionMatchesProduct) {
  // Carrying through factors q1 then q2 equals one division by q1 * q2.
  for (int q1 = 1; q1 <= 4; ++q1)
    for (int q2 = 1; q2 <= 4; ++q2)
      for (int d = -512; d <= 512; ++d) {
        const Shift s{d, -d, 0};
        const Shift twice = subsample_shift(subsample_shift(s, q1), q2);
        const Shift once = subsample_shift(s, q1 * q2);
        ASSERT_EQ(twice, once) << d << " " << q1 << " " << q2;
        const double exact = std::floor(static_cast<double>(d) / (q1 * q2));
        ASSERT_EQ(once.dx, static_cast<int>(exact));
      }
}

TEST(Subsample, Monotone) {
  for (int q = 1; q <= 5; ++q)
    for (int d = -512; d < 512; ++d) ASSERT_LE(subsample_shift({d, 0, 0}, q).dx, subsample_shift({d + 1, 0, 0}, q).dx);
}

TEST(Shifts, StereoSetAndValidation) {
  const ShiftSet s = ShiftSet::stereo(3);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[3], (Shift{3, 0, 0}));
  EXPECT_TRUE(s.horizontal_only());
  EXPECT_THROW(ShiftSet({{1, 0, 0}, {1, 0, 0}}), Error);
  EXPECT_THROW(ShiftSet({{0, 0, 1}}), Error);
  EXPECT_FALSE(ShiftSet({{0, 1, 0}}).horizontal_only());
}

TEST(ImageIo, GrayRoundTrip) {
  ImageGrid g(3, 2, 1);
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 2; ++y) g(x, y) = static_cast<float>(x * 40 + y * 100) / 255.0f;
  std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
  write_image(buf, g);
  const ImageGrid back = read_image(buf);
  ASSERT_EQ(back.width(), 3);
  ASSERT_EQ(back.channels(), 1);
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 2; ++y) EXPECT_FLOAT_EQ(back(x, y), g(x, y));
}

TEST(ImageIo, ColorWithComment) {
  std::string s = "P6\n# comment\n2 1\n255\n";
  for (unsigned char v : {255, 0, 0, 0, 0, 255}) s.push_back(static_cast<char>(v));
  std::istringstream in(s, std::ios::binary);
  const ImageGrid g = read_image(in);
  ASSERT_EQ(g.channels(), 3);
  EXPECT_EQ(g(0, 0, 0), 1.0f);
  EXPECT_EQ(g(1, 0, 2), 1.0f);
  EXPECT_EQ(g(1, 0, 0), 0.0f);
}

TEST(ImageIo, RejectsUnsupported) {
  std::istringstream p2("P2\n1 1\n255\n0\n");
  EXPECT_THROW(read_image(p2), Error);
  std::istringstream deep("P5\n1 1\n65535\n\x01\x02");
  EXPECT_THROW(read_image(deep), Error);
  std::istringstream cut("P5\n4 4\n255\nab");
  try {
    read_image(cut);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::truncated);
  }
}
