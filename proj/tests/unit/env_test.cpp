#include <doctest.h>

#include <cmath>
#include <set>

#include "diffatd/env.hpp"
#include "diffatd/errors.hpp"
#include "diffatd/validation.hpp"
#include "support.hpp"

using namespace diffatd;

TEST_SUITE("env") {

TEST_CASE("noiseless measurement reveals the grid") {
  const Scene scene({0.1, 0.2, 0.3, 0.4}, {0.0, 0.0, 1.0, 0.0}, 2, 2);
  MeasuredSet seen(scene.location_count());
  RandomStream rng(1);
  const auto m = measure(scene, 1, seen, rng, 4);
  CHECK(m.y == 0.0);
  CHECK(m.content == std::vector<double>{0.2});
  CHECK(m.step == 4);
  CHECK_THROWS_AS(measure(scene, 1, seen, rng), RepeatMeasurement);
  CHECK_THROWS_AS(measure(scene, 4, seen, rng), UnknownLocation);
}

TEST_CASE("block target ratio") {
  const Scene scene({0.9, 0.9, 0.9, 0.1}, {1.0, 1.0, 1.0, 0.0}, 2, 2, 2);
  MeasuredSet seen(scene.location_count());
  RandomStream rng(2);
  const auto m = measure(scene, 0, seen, rng);
  CHECK(m.y == 0.75);
  CHECK(m.content == scene.grid());
  CHECK(scene.target_location_count() == 1);
}

TEST_CASE("block measurements cover every cell once") {
  std::vector<double> grid(36);
  for (std::size_t k = 0; k < 36; ++k) grid[k] = static_cast<double>(k) / 35.0;
  const Scene scene(grid, std::vector<double>(36, 0.0), 6, 6, 2);
  REQUIRE(scene.location_count() == 9);
  std::multiset<double> revealed;
  MeasuredSet seen(9);
  RandomStream rng(3);
  for (std::size_t q = 0; q < 9; ++q) {
    for (double v : measure(scene, q, seen, rng).content) revealed.insert(v);
  }
  CHECK(revealed == std::multiset<double>(grid.begin(), grid.end()));
  CHECK_THROWS_AS(Scene(grid, std::vector<double>(36, 0.0), 6, 6, 4), InvalidArgument);
}

#if defined(__GLIBCXX__)
TEST_CASE("observation noise matches an independent generator") {
  const std::vector<double> grid{0.1, 0.5, 0.9, 0.3};
  const Scene scene(grid, {0.0, 1.0, 1.0, 0.0}, 2, 2, 2, ObservationNoise{0.0, 0.1});
  MeasuredSet seen(1);
  RandomStream rng(1234);
  const auto m = measure(scene, 0, seen, rng);
  oracle::Mt64 ref(1234);
  oracle::PolarNormal normal;
  for (std::size_t c = 0; c < 4; ++c) {
    CHECK(m.content[c] == grid[c] + 0.1 * normal(ref));
  }
  CHECK(m.y == 0.5);
}
#endif

TEST_CASE("noise shifts content and leaves targets alone") {
  const Scene clean({0.5, 0.5}, {1.0, 0.0}, 1, 2);
  const Scene noisy = clean.with_noise({0.2, 0.0});
  MeasuredSet seen(2);
  RandomStream rng(4);
  const auto m = measure(noisy, 0, seen, rng);
  CHECK(m.content[0] == doctest::Approx(0.7));
  CHECK(m.y == 1.0);
}

TEST_CASE("point mass prior reproduces its mean") {
  const std::vector<double> mean{0.2, 0.7, 0.4, 0.9};
  const GaussianMixturePrior prior({GaussianComponent{1.0, mean, 0.0}});
  RandomStream rng(5);
  const Scene s = gen_gmm_scene(prior, 2, 2, TargetRule{0.5, {}}, rng);
  CHECK(s.grid() == mean);
  CHECK(s.target() == std::vector<double>{0.0, 1.0, 0.0, 1.0});
}

TEST_CASE("threshold above every value leaves no targets") {
  const GaussianMixturePrior prior({GaussianComponent{1.0, {0.1, 0.4, 0.2, 0.3}, 0.0}});
  RandomStream rng(6);
  CHECK(gen_gmm_scene(prior, 2, 2, TargetRule{0.5, {}}, rng).target_location_count() == 0);
}

TEST_CASE("component labels gate targets") {
  const GaussianMixturePrior prior({{0.5, {0.9, 0.9}, 0.0}, {0.5, {0.8, 0.1}, 0.0}});
  RandomStream rng(7);
  for (int k = 0; k < 20; ++k) {
    const Scene s = gen_gmm_scene(prior, 1, 2, TargetRule{0.5, {false, true}}, rng);
    if (s.grid()[1] == 0.9) CHECK(s.target_location_count() == 0);
    else CHECK(s.target() == std::vector<double>{1.0, 0.0});
  }
  CHECK_THROWS_AS(gen_gmm_scene(prior, 1, 2, TargetRule{0.5, {true}}, rng), DimensionMismatch);
}

TEST_CASE("sampled scenes average to the prior mean") {
  // Means sit well inside [0, 1] so clamping has no measurable effect.
  const GaussianMixturePrior prior({{0.3, {0.3, 0.5, 0.6, 0.4}, 0.004},
                                    {0.7, {0.6, 0.4, 0.5, 0.45}, 0.002}});
  RandomStream rng(8);
  const int n = 1000;
  std::vector<double> sum(4, 0.0);
  for (int k = 0; k < n; ++k) {
    const Scene s = gen_gmm_scene(prior, 2, 2, TargetRule{}, rng);
    for (std::size_t c = 0; c < 4; ++c) sum[c] += s.grid()[c];
  }
  for (std::size_t c = 0; c < 4; ++c) {
    double mean = 0.0, second = 0.0;
    for (const auto& comp : prior.components()) {
      mean += comp.weight * comp.mean[c];
      second += comp.weight * (comp.variance + comp.mean[c] * comp.mean[c]);
    }
    const double sd = std::sqrt(second - mean * mean);
    CHECK(std::abs(sum[c] / n - mean) < 3.0 * sd / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("blob prior shape") {
  BlobPriorSpec spec;
  const auto prior = make_blob_prior(spec);
  CHECK(prior.size() == 8);
  CHECK(prior.dimension() == 256);
  for (const auto& c : prior.components()) {
    CHECK(c.weight == doctest::Approx(1.0 / 8.0));
    for (double m : c.mean) {
      CHECK(m >= 0.0);
      CHECK(m <= 1.0);
    }
  }
  CHECK(make_blob_prior(spec).components()[3].mean == prior.components()[3].mean);
}

TEST_CASE("csv scene with threshold targets") {
  const Scene s = load_scene(data_path("grid_2x2.csv"), GridFormat::csv, TargetSpec{});
  CHECK(s.rows() == 2);
  CHECK(s.target() == std::vector<double>{0.0, 1.0, 1.0, 0.0});
}

TEST_CASE("pgm scenes normalize by maxval") {
  std::size_t rows = 0, cols = 0;
  const auto p2 = load_grid(data_path("small_p2.pgm"), GridFormat::pgm, rows, cols);
  CHECK(rows == 2);
  CHECK(cols == 3);
  CHECK(p2[1] == 1.0);
  CHECK(p2[2] == 7.0 / 15.0);
  const auto p5 = load_grid(data_path("small_p5.pgm"), GridFormat::pgm, rows, cols);
  CHECK(p5 == std::vector<double>{0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0});
  const auto wide = load_grid(data_path("wide_p5.pgm"), GridFormat::pgm, rows, cols);
  CHECK(wide == std::vector<double>{1.0, 0.25});
  CHECK(grid_format_from_path("x/y.pgm") == GridFormat::pgm);
}

TEST_CASE("species counts use max-count ratios") {
  TargetSpec spec;
  spec.kind = TargetSpec::Kind::value;
  const Scene s = load_scene(data_path("species_counts.csv"), GridFormat::csv, spec, 2);
  CHECK(s.grid()[5] == 1.0);
  CHECK(s.target()[1] == 0.5);
  CHECK(s.location_count() == 4);
  CHECK(s.location_target(0) == doctest::Approx((0.0 + 0.5 + 2.0 / 6.0 + 1.0) / 4.0));
}

TEST_CASE("sidecar targets") {
  TargetSpec spec;
  spec.kind = TargetSpec::Kind::sidecar;
  const Scene s = load_scene(data_path("sidecar_grid.csv"), GridFormat::csv, spec);
  CHECK(s.target() == std::vector<double>{0.0, 1.0, 0.0, 0.5});
  CHECK(s.target_location_count() == 2);
  CHECK(s.total_target() == 1.5);
}

TEST_CASE("malformed grids") {
  std::size_t r = 0, c = 0;
  CHECK_THROWS_AS(load_grid(data_path("ragged.csv"), GridFormat::csv, r, c), ParseError);
  CHECK_THROWS_AS(load_grid(data_path("bad_number.csv"), GridFormat::csv, r, c), ParseError);
  CHECK_THROWS_AS(load_grid(data_path("negative.csv"), GridFormat::csv, r, c), ParseError);
  CHECK_THROWS_AS(load_grid(data_path("grid_2x2.csv"), GridFormat::pgm, r, c), ParseError);
  CHECK_THROWS_AS(load_grid(data_path("missing.csv"), GridFormat::csv, r, c), InvalidArgument);
}

TEST_CASE("save and load round trip") {
  RandomStream rng(9);
  const GaussianMixturePrior prior({GaussianComponent{1.0, std::vector<double>(12, 0.5), 0.02}});
  const Scene s = gen_gmm_scene(prior, 3, 4, TargetRule{0.55, {}}, rng);
  const auto dir = scratch_dir("scene_round_trip");
  save_scene_csv(s, dir / "scene.csv");
  CHECK(std::filesystem::exists(dir / "scene.target.csv"));
  TargetSpec spec;
  spec.kind = TargetSpec::Kind::sidecar;
  const Scene back = load_scene(dir / "scene.csv", GridFormat::csv, spec);
  CHECK(back.grid() == s.grid());
  CHECK(back.target() == s.target());
}

TEST_CASE("empirical prior from a corpus directory") {
  const auto prior = load_empirical_prior(data_path("corpus"), 0.01);
  CHECK(prior.size() == 3);
  CHECK(prior.dimension() == 16);
  CHECK(prior.component(0).variance == 0.01);
  CHECK(prior.component(1).weight == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(load_empirical_prior(data_path("nowhere"), 0.01), InvalidArgument);
}

}
