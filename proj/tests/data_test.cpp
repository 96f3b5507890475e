#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <gtest/gtest.h>

#include "assist/data.hpp"
#include "assist/errors.hpp"

namespace assist {
namespace {

// One feature per record holding its original index, so provenance survives
// any split.
Dataset indexed_dataset(const std::vector<std::size_t>& per_class) {
  Dataset d(1);
  double id = 0.0;
  for (std::size_t k = 0; k < per_class.size(); ++k)
    for (std::size_t i = 0; i < per_class[k]; ++i) d.append(std::vector<double>{id++}, static_cast<int>(k));
  return d;
}

std::vector<double> ids(const Dataset& d) {
  std::vector<double> out;
  for (std::size_t i = 0; i < d.size(); ++i) out.push_back(d.row(i)[0]);
  return out;
}

void expect_exact_cover(const Dataset& whole, const PartyData& parts) {
  auto a = ids(parts.first), b = ids(parts.second);
  std::vector<double> joined = a;
  joined.insert(joined.end(), b.begin(), b.end());
  std::sort(joined.begin(), joined.end());
  EXPECT_EQ(joined, ids(whole));
  EXPECT_TRUE(std::adjacent_find(joined.begin(), joined.end()) == joined.end());
  // Labels travel with their rows.
  for (const auto* part : {&parts.first, &parts.second})
    for (std::size_t i = 0; i < part->size(); ++i)
      EXPECT_EQ(part->label(i), whole.label(static_cast<std::size_t>(part->row(i)[0])));
}

TEST(RoundHalfUp, Values) {
  EXPECT_EQ(round_half_up(25.5), 26u);
  EXPECT_EQ(round_half_up(2.4999), 2u);
  EXPECT_EQ(round_half_up(0.5), 1u);
  EXPECT_EQ(round_half_up(0.0), 0u);
}

TEST(GenerateGaussian, CountsAndDeterminism) {
  GaussianMixtureSpec spec{{{{-1.0, 1.0}, 1.5, 50}, {{1.0, -1.0}, 1.5, 50}}, 42};
  const auto d = generate_gaussian(spec);
  EXPECT_EQ(d.size(), 100u);
  EXPECT_EQ(d.class_counts(), (std::vector<std::size_t>{50, 50}));
  EXPECT_EQ(d, generate_gaussian(spec));
  spec.seed = 43;
  EXPECT_NE(d, generate_gaussian(spec));
}

TEST(GenerateGaussian, EmptyClassContributesNothing) {
  GaussianMixtureSpec spec{{{{0.0}, 1.0, 3}, {{5.0}, 1.0, 0}, {{9.0}, 1.0, 2}}, 1};
  const auto d = generate_gaussian(spec);
  EXPECT_EQ(d.class_counts(3), (std::vector<std::size_t>{3, 0, 2}));
}

TEST(GenerateGaussian, SampleMean) {
  const double sigma = 1.5;
  GaussianMixtureSpec spec{{{{-1.0, 1.0}, sigma, 10000}}, 7};
  const auto d = generate_gaussian(spec);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    mx += d.row(i)[0];
    my += d.row(i)[1];
  }
  mx /= 10000.0;
  my /= 10000.0;
  EXPECT_NEAR(mx, -1.0, 3.0 * sigma / 100.0);
  EXPECT_NEAR(my, 1.0, 3.0 * sigma / 100.0);
}

TEST(SplitByClassFraction, NinetyTen) {
  const auto d = indexed_dataset({50, 50});
  const auto parts = split_by_class_fraction(d, {{0, 0.9}, {1, 0.1}}, 3);
  EXPECT_EQ(parts.first.class_counts(2), (std::vector<std::size_t>{45, 5}));
  EXPECT_EQ(parts.second.class_counts(2), (std::vector<std::size_t>{5, 45}));
  expect_exact_cover(d, parts);
  // Outputs keep the input order.
  const auto a = ids(parts.first);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
}

TEST(SplitByClassFraction, AllToLearner) {
  const auto d = indexed_dataset({7, 4, 9});
  const auto parts = split_by_class_fraction(d, {{0, 1.0}, {1, 1.0}, {2, 1.0}}, 1);
  EXPECT_EQ(parts.first.size(), 20u);
  EXPECT_TRUE(parts.second.empty());
}

TEST(SplitByClassFraction, HalfOfOddRoundsUp) {
  const auto d = indexed_dataset({51});
  const auto parts = split_by_class_fraction(d, {{0, 0.5}}, 1);
  EXPECT_EQ(parts.first.size(), 26u);
  EXPECT_EQ(parts.second.size(), 25u);
}

TEST(SplitByClassFraction, RejectsBadFraction) {
  const auto d = indexed_dataset({5});
  EXPECT_THROW(split_by_class_fraction(d, {{0, 1.5}}, 1), InvalidArgument);
}

TEST(Partition, SizesFromRho) {
  const auto d = indexed_dataset(std::vector<std::size_t>(10, 5000));
  const auto parts = partition(d, {1.0 / 9.0, 0.1, 0, 5});
  EXPECT_EQ(parts.first.size(), 5000u);
  EXPECT_EQ(parts.second.size(), 45000u);
  expect_exact_cover(d, parts);
  // gamma = 1/10 with ten classes: both histograms uniform.
  for (auto c : parts.first.class_counts(10)) EXPECT_EQ(c, 500u);
  for (auto c : parts.second.class_counts(10)) EXPECT_EQ(c, 4500u);
}

TEST(Partition, SingleClassLearner) {
  const auto d = indexed_dataset(std::vector<std::size_t>(10, 500));
  const auto parts = partition(d, {1.0 / 9.0, 1.0, 3, 2});
  ASSERT_EQ(parts.first.size(), 500u);
  for (int label : parts.first.labels()) EXPECT_EQ(label, 3);
  EXPECT_EQ(parts.second.size(), 4500u);
  EXPECT_EQ(parts.second.class_counts(10)[3], 0u);
  expect_exact_cover(d, parts);
}

TEST(Partition, ImbalancedCounts) {
  const auto d = indexed_dataset({100, 100, 100, 100});
  // n_L = 100, primary round(0.7 * 100) = 70, 30 split evenly over three classes.
  const auto parts = partition(d, {1.0 / 3.0, 0.7, 1, 9});
  EXPECT_EQ(parts.first.size(), 100u);
  EXPECT_EQ(parts.first.class_counts(4), (std::vector<std::size_t>{10, 70, 10, 10}));
  expect_exact_cover(d, parts);
}

TEST(Partition, PureFunctionOfSeed) {
  const auto d = indexed_dataset({30, 30, 30});
  EXPECT_EQ(partition(d, {0.5, 0.5, 0, 1}), partition(d, {0.5, 0.5, 0, 1}));
  EXPECT_NE(partition(d, {0.5, 0.5, 0, 1}).first, partition(d, {0.5, 0.5, 0, 2}).first);
}

TEST(Partition, Errors) {
  const auto d = indexed_dataset({10, 10});
  EXPECT_THROW(partition(d, {0.0, 0.5, 0, 1}), InvalidArgument);
  EXPECT_THROW(partition(d, {1.0, 0.0, 0, 1}), InvalidArgument);
  EXPECT_THROW(partition(d, {1.0, 1.5, 0, 1}), InvalidArgument);
  // Learner wants 15 class-0 records but only 10 exist.
  EXPECT_THROW(partition(d, {3.0, 1.0, 0, 1}), InvalidArgument);
  EXPECT_THROW(partition(indexed_dataset({10}), {1.0, 1.0, 0, 1}), InvalidArgument);
}

class CsvTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("assist_csv_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::filesystem::path write(const std::string& text) {
    const auto p = dir_ / "data.csv";
    std::ofstream(p) << text;
    return p;
  }

  std::filesystem::path dir_;
};

TEST_F(CsvTest, ParsesRows) {
  const auto d = load_csv(write("x0,x1,label\n1,2,0\n3.5,-4,1\n0,0,1\n"));
  EXPECT_EQ(d.size(), 3u);
  EXPECT_EQ(d.dim(), 2u);
  EXPECT_EQ(d.row(1)[0], 3.5);
  EXPECT_EQ(d.row(1)[1], -4.0);
  EXPECT_EQ(d.labels(), (std::vector<int>{0, 1, 1}));
}

TEST_F(CsvTest, LabelColumnAnywhere) {
  const auto d = load_csv(write("label,a,b\n2,1,5\n"));
  EXPECT_EQ(d.label(0), 2);
  EXPECT_EQ(d.row(0)[1], 5.0);
}

TEST_F(CsvTest, EmptyBody) {
  const auto d = load_csv(write("x0,x1,label\n"));
  EXPECT_EQ(d.size(), 0u);
  EXPECT_EQ(d.dim(), 2u);
}

TEST_F(CsvTest, NonNumericCellNamesRowAndColumn) {
  try {
    load_csv(write("x0,x1,label\n1,abc,0\n"));
    FAIL() << "expected a parse error";
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column \"x1\""), std::string::npos) << msg;
  }
}

TEST_F(CsvTest, MissingLabelColumn) {
  EXPECT_THROW(load_csv(write("x0,x1\n1,2\n")), InvalidArgument);
}

TEST_F(CsvTest, MissingFile) { EXPECT_THROW(load_csv(dir_ / "nope.csv"), IoError); }

TEST_F(CsvTest, RoundTrip) {
  GaussianMixtureSpec spec{{{{0.1, 0.2, 0.3}, 1.0, 5}, {{1.0, 2.0, 3.0}, 0.5, 4}}, 8};
  const auto d = generate_gaussian(spec);
  save_csv(d, dir_ / "out.csv");
  EXPECT_EQ(load_csv(dir_ / "out.csv"), d);
}

}  // namespace
}  // namespace assist
