#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rwseg/graph.hpp"
#include "rwseg/solver.hpp"
#include "support.hpp"

using namespace rwseg;

namespace {

ImageGrid two_tone_4x4() {
  std::vector<double> g(16);
  for (std::size_t i = 0; i < 16; ++i) g[i] = (i % 4) < 2 ? 0.2 : 0.8;
  return ImageGrid(4, 4, g);
}

}  // namespace

TEST(ImageGridTest, RejectsTinyOrOutOfRange) {
  EXPECT_THROW(ImageGrid(1, 4, std::vector<double>(4, 0.5)), Error);
  EXPECT_THROW(ImageGrid(2, 2, {0.0, 0.5, 1.5, 0.2}), Error);
  EXPECT_THROW(ImageGrid(2, 2, {0.0, 0.5, 0.2}), Error);
  EXPECT_NO_THROW(ImageGrid(2, 2, {0.0, 0.5, 1.0, 0.2}));
}

TEST(ImageGridTest, RgbUsesRec601Luma) {
  auto img = ImageGrid::from_rgb(2, 2, {1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 1});
  EXPECT_NEAR(img.intensity()[0], 0.299, 1e-12);
  EXPECT_NEAR(img.intensity()[1], 0.587, 1e-12);
  EXPECT_NEAR(img.intensity()[2], 0.114, 1e-12);
  EXPECT_NEAR(img.intensity()[3], 1.0, 1e-12);
  EXPECT_TRUE(img.has_color());
  EXPECT_EQ(img.rgb().size(), 12u);
}

TEST(ComputeWeights, ConstantImageGivesOnePlusFloor) {
  ImageGrid img(5, 3, std::vector<double>(15, 0.4));
  auto w = compute_weights(img, 90.0, 1e-6);
  for (double v : w.horizontal()) EXPECT_DOUBLE_EQ(v, 1.0 + 1e-6);
  for (double v : w.vertical()) EXPECT_DOUBLE_EQ(v, 1.0 + 1e-6);
  EXPECT_DOUBLE_EQ(w.min_weight(), 1.0 + 1e-6);
}

TEST(ComputeWeights, ZeroBetaGivesOnePlusFloor) {
  auto w = compute_weights(two_tone_4x4(), 0.0, 1e-3);
  for (double v : w.horizontal()) EXPECT_DOUBLE_EQ(v, 1.0 + 1e-3);
  for (double v : w.vertical()) EXPECT_DOUBLE_EQ(v, 1.0 + 1e-3);
}

TEST(ComputeWeights, MaxContrastEdgeIsExpMinusBetaPlusFloor) {
  // Two rows of (0, 1): every horizontal edge carries the maximal difference.
  ImageGrid img(2, 2, {0.0, 1.0, 0.0, 1.0});
  auto w = compute_weights(img, 90.0, 1e-6);
  for (double v : w.horizontal()) EXPECT_DOUBLE_EQ(v, std::exp(-90.0) + 1e-6);
  for (double v : w.vertical()) EXPECT_DOUBLE_EQ(v, 1.0 + 1e-6);
  EXPECT_DOUBLE_EQ(w.min_weight(), std::exp(-90.0) + 1e-6);
}

TEST(ComputeWeights, MatchesReferenceFormula) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    auto img = rwtest::random_image(rng, 3 + t % 5, 2 + t % 4, static_cast<rwtest::ImageModel>(t % 3));
    auto w = compute_weights(img, 90.0, 0.01);
    std::vector<double> g(img.intensity().begin(), img.intensity().end());
    auto ref = rwtest::reference_weights(g, img.width(), img.height(), 90.0, 0.01);
    const std::size_t W = img.width(), H = img.height();
    double mn = 1e300;
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = 0; x + 1 < W; ++x) {
        EXPECT_NEAR(w.horizontal()[y * (W - 1) + x], ref.right[y * W + x], 1e-14);
        mn = std::min(mn, ref.right[y * W + x]);
      }
    for (std::size_t y = 0; y + 1 < H; ++y)
      for (std::size_t x = 0; x < W; ++x) {
        EXPECT_NEAR(w.vertical()[y * W + x], ref.down[y * W + x], 1e-14);
        mn = std::min(mn, ref.down[y * W + x]);
      }
    EXPECT_NEAR(w.min_weight(), mn, 1e-15);
  }
}

TEST(ComputeWeights, WeightsLieInOpenUnitPlusFloor) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 10; ++t) {
    auto img = rwtest::random_image(rng, 8, 8, rwtest::ImageModel::uniform_noise);
    auto w = compute_weights(img, 90.0, 0.01);
    for (auto span : {w.horizontal(), w.vertical()})
      for (double v : span) {
        EXPECT_GT(v, 0.0);
        EXPECT_LE(v, 1.01);
      }
  }
}

TEST(ComputeWeights, RejectsBadParameters) {
  ImageGrid img(2, 2, {0.0, 0.1, 0.2, 0.3});
  EXPECT_THROW(compute_weights(img, -1.0, 0.01), Error);
  EXPECT_THROW(compute_weights(img, 90.0, 0.0), Error);
}

TEST(EdgeWeightsTest, NeighbourCountsFollowFourConnectivity) {
  auto w = EdgeWeights::uniform(4, 3, 1.0);
  auto count = [&](std::size_t i) {
    int c = 0;
    w.for_each_neighbor(i, [&](std::size_t, double) { ++c; });
    return c;
  };
  EXPECT_EQ(count(0), 2);
  EXPECT_EQ(count(3), 2);
  EXPECT_EQ(count(1), 3);
  EXPECT_EQ(count(4), 3);
  EXPECT_EQ(count(5), 4);
  EXPECT_EQ(count(11), 2);
}

TEST(EdgeWeightsTest, NeighbourWeightIsSymmetric) {
  std::mt19937_64 rng(3);
  auto img = rwtest::random_image(rng, 6, 5, rwtest::ImageModel::uniform_noise);
  auto w = compute_weights(img);
  for (std::size_t i = 0; i < w.vertex_count(); ++i)
    w.for_each_neighbor(i, [&](std::size_t j, double wij) {
      double back = -1.0;
      w.for_each_neighbor(j, [&](std::size_t k, double wjk) {
        if (k == i) back = wjk;
      });
      EXPECT_EQ(back, wij);
    });
}

TEST(AssembleLaplacian, ChainOfThreeWithSeededEnds) {
  auto w = EdgeWeights::uniform(3, 1, 1.0);
  auto seeds = SeedState::from_indices(3, {2}, {0});
  auto lap = assemble_laplacian(w, seeds);
  ASSERT_EQ(lap.n_unseeded(), 1u);
  EXPECT_DOUBLE_EQ(lap.lu.at(0, 0), 2.0);
  ASSERT_EQ(lap.r.cols, 2u);
  EXPECT_DOUBLE_EQ(lap.r.at(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(lap.r.at(0, 1), -1.0);
  auto b = lap.rhs();
  ASSERT_EQ(b.size(), 1u);
  EXPECT_DOUBLE_EQ(b[0], 1.0);
}

TEST(AssembleLaplacian, CenterOfThreeByThree) {
  auto w = EdgeWeights::uniform(3, 3, 1.0);
  auto seeds = SeedState::from_indices(9, {0, 1, 2, 3}, {5, 6, 7, 8});
  auto lap = assemble_laplacian(w, seeds);
  ASSERT_EQ(lap.n_unseeded(), 1u);
  EXPECT_DOUBLE_EQ(lap.lu.at(0, 0), 4.0);
  double row = lap.lu.at(0, 0);
  for (std::size_t c = 0; c < lap.r.cols; ++c) row += lap.r.at(0, c);
  EXPECT_DOUBLE_EQ(row, 0.0);
}

TEST(AssembleLaplacian, AllSeededGivesEmptySystem) {
  auto w = EdgeWeights::uniform(2, 2, 1.0);
  auto lap = assemble_laplacian(w, SeedState::from_indices(4, {0, 1}, {2, 3}));
  EXPECT_EQ(lap.n_unseeded(), 0u);
  EXPECT_EQ(lap.lu.rows, 0u);
  EXPECT_TRUE(lap.rhs().empty());
}

TEST(AssembleLaplacian, SeedErrors) {
  auto w = EdgeWeights::uniform(3, 3, 1.0);
  try {
    assemble_laplacian(w, SeedState::from_indices(9, {0}, {}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::missing_seeds);
  }
  try {
    assemble_laplacian(w, SeedState::from_indices(9, {0, 4}, {4}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::conflicting_seeds);
  }
  try {
    assemble_laplacian(w, SeedState::from_indices(4, {0}, {1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::dimension_mismatch);
  }
}

TEST(AssembleLaplacian, StructureMatchesDefinitionOnRandomInstances) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 30; ++t) {
    auto inst = rwtest::random_instance(rng, 10);
    auto lap = assemble_laplacian(inst.weights, inst.seeds);
    const auto& w = inst.weights;
    const std::size_t n = w.vertex_count();
    // Dense reference of the whole Laplacian.
    std::vector<double> full(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      w.for_each_neighbor(i, [&](std::size_t j, double wij) {
        full[i * n + j] = -wij;
        full[i * n + i] += wij;
      });
    for (std::size_t a = 0; a < lap.n_unseeded(); ++a) {
      const auto i = lap.unseeded[a];
      for (std::size_t b = 0; b < lap.n_unseeded(); ++b) {
        EXPECT_DOUBLE_EQ(lap.lu.at(a, b), full[i * n + lap.unseeded[b]]);
        EXPECT_EQ(lap.lu.at(a, b), lap.lu.at(b, a));
      }
      double row = 0.0;
      for (std::size_t b = 0; b < lap.n_unseeded(); ++b) row += lap.lu.at(a, b);
      for (std::size_t c = 0; c < lap.seeded.size(); ++c) {
        EXPECT_DOUBLE_EQ(lap.r.at(a, c), full[i * n + lap.seeded[c]]);
        row += lap.r.at(a, c);
      }
      EXPECT_NEAR(row, 0.0, 1e-12);
    }
    // Vertex order is row-major with seeds removed.
    EXPECT_TRUE(std::is_sorted(lap.unseeded.begin(), lap.unseeded.end()));
    EXPECT_EQ(lap.n_unseeded() + lap.seeded.size(), n);
  }
}

TEST(AssembleLaplacian, IsDeterministic) {
  std::mt19937_64 rng(5);
  auto inst = rwtest::random_instance(rng, 12);
  EXPECT_EQ(assemble_laplacian(inst.weights, inst.seeds), assemble_laplacian(inst.weights, inst.seeds));
}

TEST(AssembleLaplacian, UnseededBlockFactorsWhenSeedsExist) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    auto inst = rwtest::random_instance(rng, 12);
    auto lap = assemble_laplacian(inst.weights, inst.seeds);
    if (lap.n_unseeded() == 0) continue;
    SolveOptions dense;
    dense.method = SolveMethod::dense_direct;
    EXPECT_NO_THROW(solve_system(lap, lap.rhs(), dense));
  }
}

TEST(BoundaryModification, ChainCenterWithHalfLambda) {
  auto w = EdgeWeights::uniform(3, 1, 1.0);
  auto lap = assemble_laplacian(w, SeedState::from_indices(3, {2}, {0}));
  std::vector<std::size_t> e{1};
  auto mod = apply_boundary_modification(lap, e, 0.5);
  EXPECT_DOUBLE_EQ(mod.lu.at(0, 0), 1.5);
  EXPECT_EQ(mod.r, lap.r);
  EXPECT_DOUBLE_EQ(mod.rhs()[0], 1.0 - 0.25);
}

TEST(BoundaryModification, ZeroLambdaOrEmptySetIsIdentity) {
  std::mt19937_64 rng(9);
  auto inst = rwtest::random_instance(rng, 8);
  auto lap = assemble_laplacian(inst.weights, inst.seeds);
  std::vector<std::size_t> e(lap.unseeded.begin(), lap.unseeded.begin() + std::min<std::size_t>(3, lap.n_unseeded()));
  EXPECT_EQ(apply_boundary_modification(lap, e, 0.0), lap);
  EXPECT_EQ(apply_boundary_modification(lap, {}, inst.weights.min_weight() / 2), lap);
}

TEST(BoundaryModification, OnlyDiagonalOfBoundaryRowsChanges) {
  std::mt19937_64 rng(10);
  auto inst = rwtest::random_instance(rng, 10);
  auto lap = assemble_laplacian(inst.weights, inst.seeds);
  std::vector<std::size_t> e;
  for (std::size_t k = 0; k < lap.n_unseeded(); k += 2) e.push_back(lap.unseeded[k]);
  const double lambda = 0.7 * inst.weights.min_weight();
  auto mod = apply_boundary_modification(lap, e, lambda);
  for (std::size_t a = 0; a < lap.n_unseeded(); ++a)
    for (std::size_t b = 0; b < lap.n_unseeded(); ++b) {
      const double expect = lap.lu.at(a, b) - (a == b && a % 2 == 0 ? lambda : 0.0);
      EXPECT_DOUBLE_EQ(mod.lu.at(a, b), expect);
    }
  EXPECT_EQ(mod.r, lap.r);
}

TEST(BoundaryModification, LambdaOutsideRangeIsRejected) {
  auto w = EdgeWeights::uniform(3, 1, 1.0);
  auto lap = assemble_laplacian(w, SeedState::from_indices(3, {2}, {0}));
  std::vector<std::size_t> e{1};
  EXPECT_THROW(apply_boundary_modification(lap, e, 1.0 + 1e-12), ConvexityViolation);
  EXPECT_THROW(apply_boundary_modification(lap, e, -1e-12), ConvexityViolation);
  EXPECT_NO_THROW(apply_boundary_modification(lap, e, 1.0));
  try {
    apply_boundary_modification(lap, e, 2.0);
  } catch (const ConvexityViolation& cv) {
    EXPECT_DOUBLE_EQ(cv.bound(), 1.0);
    EXPECT_NE(std::string(cv.what()).find("min_weight = 1"), std::string::npos);
  }
}

TEST(BoundaryModification, SeedInBoundaryIsRejected) {
  auto w = EdgeWeights::uniform(3, 1, 1.0);
  auto lap = assemble_laplacian(w, SeedState::from_indices(3, {2}, {0}));
  std::vector<std::size_t> e{0};
  EXPECT_THROW(apply_boundary_modification(lap, e, 0.5), Error);
}

TEST(BoundaryModification, RangeCheckDoesNotImplyDefiniteness) {
  // Unit-weight chain of five, ends seeded, three middle pixels in S_E:
  // lambda_min(L_u) = 2 - sqrt(2) < lambda = min(w) = 1.
  auto w = EdgeWeights::uniform(5, 1, 1.0);
  auto lap = assemble_laplacian(w, SeedState::from_indices(5, {4}, {0}));
  std::vector<std::size_t> e{1, 2, 3};
  auto mod = apply_boundary_modification(lap, e, 1.0);
  SolveOptions dense;
  dense.method = SolveMethod::dense_direct;
  try {
    solve_system(mod, mod.rhs(), dense);
    FAIL() << "expected an indefinite system";
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::not_positive_definite);
  }
  SolveStats stats;
  auto x = solve_system(mod, mod.rhs(), {}, &stats);
  EXPECT_TRUE(stats.indefinite);
  auto ref = rwtest::reference_probabilities(rwtest::reference_weights(w), {4}, {0}, e, 1.0);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(x[k], ref[k + 1], 1e-9);
}

TEST(BoundaryModification, DefiniteOnSmallBandsWithinBound) {
  // Band pixels adjacent to seeds on every side keep L'_u definite.
  std::mt19937_64 rng(12);
  for (int t = 0; t < 20; ++t) {
    auto img = rwtest::random_image(rng, 16, 16, rwtest::ImageModel::two_tone);
    auto w = compute_weights(img);
    std::vector<std::size_t> fg, bg, e;
    for (std::size_t y = 0; y < 16; ++y)
      for (std::size_t x = 0; x < 16; ++x) {
        const auto i = y * 16 + x;
        if (x % 2 == 1 && y % 2 == 1) e.push_back(i);
        else if (x < 8) bg.push_back(i);
        else fg.push_back(i);
      }
    auto lap = assemble_laplacian(w, SeedState::from_indices(256, fg, bg));
    auto mod = apply_boundary_modification(lap, e, w.min_weight() * 0.999);
    SolveOptions dense;
    dense.method = SolveMethod::dense_direct;
    EXPECT_NO_THROW(solve_system(mod, mod.rhs(), dense));
  }
}
