#include <gtest/gtest.h>

#include <cstdint>
#include <vector>

#include "spder/signal.hpp"

using namespace spder;

TEST(Grid, OneDimensionalEndpoints) {
  const auto g = make_grid({3});
  EXPECT_EQ(g.coords, Matrix::from_rows({{-1}, {0}, {1}}));
  EXPECT_EQ(make_grid({1}).coords(0, 0), -1.0);
}

TEST(Grid, RowMajorOrder) {
  const auto g = make_grid({2, 3});
  EXPECT_EQ(g.coords, Matrix::from_rows({{-1, -1}, {-1, 0}, {-1, 1}, {1, -1}, {1, 0}, {1, 1}}));
  EXPECT_EQ(g.grid.point_count(), 6u);
}

TEST(Grid, CustomBoundsAndVideoOrder) {
  const auto a = make_grid({5}, Bounds{-100, 100});
  EXPECT_EQ(a.coords(1, 0), -50.0);
  const auto v = make_grid({2, 2, 2});
  EXPECT_EQ(v.coords(1, 0), -1.0);
  EXPECT_EQ(v.coords(1, 2), 1.0);
  EXPECT_EQ(v.coords(4, 0), 1.0);
}

TEST(Grid, Errors) {
  EXPECT_THROW(make_grid({0, 3}), ShapeError);
  EXPECT_THROW(make_grid(std::vector<std::size_t>{}), ShapeError);
  EXPECT_THROW(make_grid({3}, Bounds{1, 1}), ArgumentError);
  EXPECT_THROW(make_grid({3, 3}, std::vector<Bounds>{{}, {}, {}}), ShapeError);
}

TEST(Normalize, EndpointsAndExhaustiveRoundTrip) {
  std::vector<std::uint8_t> all(256);
  for (int i = 0; i < 256; ++i) all[i] = static_cast<std::uint8_t>(i);
  const Signal s = normalize_u8(all, {16, 16});
  EXPECT_EQ(s.values.front(), -1.0);
  EXPECT_EQ(s.values.back(), 1.0);
  EXPECT_EQ(denormalize_u8(s), all);
  EXPECT_THROW(normalize_u8(all, {15, 16}), ShapeError);
}

TEST(Normalize, OutOfRangeUsesMinMax) {
  const std::vector<double> v{-3.0, 0.0, 3.0};
  EXPECT_EQ(denormalize_u8(v), (std::vector<std::uint8_t>{0, 128, 255}));
  const std::vector<double> flat{2.0, 2.0};
  EXPECT_EQ(denormalize_u8(flat), (std::vector<std::uint8_t>{0, 0}));
}

TEST(Bilinear, CenterIsMeanOfCorners) {
  const Signal s{{2, 2}, {0.0, 1.0, 2.0, 3.0}, std::nullopt};
  const Signal r = bilinear_resize(s, 3, 3);
  EXPECT_DOUBLE_EQ(r.values[4], 1.5);
  EXPECT_DOUBLE_EQ(r.values[0], 0.0);
  EXPECT_DOUBLE_EQ(r.values[8], 3.0);
  EXPECT_DOUBLE_EQ(r.values[1], 0.5);
}

TEST(Bilinear, SameSizeIsIdentityAndLinearIsExact) {
  Signal s{{5, 7}, {}, std::nullopt};
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 7; ++c) s.values.push_back(0.1 * static_cast<double>(r) - 0.2 * static_cast<double>(c));
  EXPECT_EQ(bilinear_resize(s, 5, 7).values, s.values);
  const Signal up = bilinear_resize(s, 9, 13);
  for (std::size_t r = 0; r < 9; ++r)
    for (std::size_t c = 0; c < 13; ++c)
      EXPECT_NEAR(up.values[r * 13 + c], 0.1 * (r / 2.0) - 0.2 * (c / 2.0), 1e-14);
}

TEST(Bilinear, Errors) {
  EXPECT_THROW(bilinear_resize(Signal{{4}, std::vector<double>(4), std::nullopt}, 2, 2), UnsupportedError);
  EXPECT_THROW(bilinear_resize(Signal{{2, 2}, std::vector<double>(4), std::nullopt}, 0, 2), ShapeError);
}

TEST(Downsample, KeepsEveryFactorSample) {
  Signal s{{10}, {}, 16};
  for (int i = 0; i < 10; ++i) s.values.push_back(i);
  const Signal d = downsample_1d(s, 3);
  EXPECT_EQ(d.values, (std::vector<double>{0, 3, 6, 9}));
  EXPECT_EQ(d.shape[0], 4u);
  EXPECT_EQ(downsample_1d(s, 1).values, s.values);
  EXPECT_THROW(downsample_1d(s, 0), ArgumentError);
}
