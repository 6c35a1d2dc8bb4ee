#include <cmath>
#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "extrinsic/estimators.hpp"
#include "extrinsic/registration.hpp"
#include "extrinsic/simulator.hpp"
#include "test_support.hpp"

namespace extrinsic {
namespace {

using testing::deg;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an extrinsic::Error";
  return ErrorCode::InvalidArgument;
}

sim::ScenarioConfig single_rotation_about_origin() {
  sim::ScenarioConfig config;
  config.contact = sim::FixedPointContact{Eigen::Vector3d::Zero()};
  config.schedule.push_back({Eigen::Vector3d(0, 1, 1), deg(10), 0.0, std::nullopt});
  config.noise_sigma.setZero();
  return config;
}

TEST(Generate, NoiselessRoundTripThroughRegistration) {
  const auto scenario = sim::generate(single_rotation_about_origin());
  ASSERT_EQ(scenario.frames.size(), 2u);
  EXPECT_EQ(scenario.frames[0].size(), 121);
  const auto result = register_frames(scenario.frames[0], scenario.frames[1]);
  EXPECT_TRUE(result.motion.is_approx(scenario.truth.motions[1], 1e-9));
}

TEST(Generate, FrameZeroIsNoiselessGrid) {
  auto config = testing::box_on_edge(0.05);
  const auto scenario = sim::generate(config);
  EXPECT_EQ(scenario.frames[0].positions(), config.grid.positions());
}

TEST(Generate, LineContactPipelineRecoversEdge) {
  sim::ScenarioConfig config;
  config.contact = sim::LineContact{Eigen::Vector3d::UnitX(), Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitZ()};
  config.grid.sensor_pose = RelativeMotiond(testing::rodrigues(Eigen::Vector3d::UnitX(), deg(-90)),
                                            Eigen::Vector3d(0, 6, 4));
  const double angles[] = {5, 10, 15};
  for (int k = 0; k < 3; ++k) {
    config.schedule.push_back({Eigen::Vector3d::UnitX(), deg(angles[k]), (k + 1) * config.grid.pitch, std::nullopt});
  }
  config.noise_sigma.setZero();
  const auto scenario = sim::generate(config);
  const auto estimate = estimate_line_contact(register_sequence(scenario.frames), Eigen::Vector3d(0, 0, 1));
  EXPECT_LE(testing::angle_between_lines(*estimate.direction(), Eigen::Vector3d::UnitX()), 1e-9);
  EXPECT_LE(testing::distance_to_line(*estimate.point(), Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitX()), 1e-9);
}

TEST(Generate, SameSeedIsBitwiseIdentical) {
  const auto config = testing::box_on_edge(0.01, 1234);
  const auto a = sim::generate(config);
  const auto b = sim::generate(config);
  ASSERT_EQ(a.frames.size(), b.frames.size());
  for (std::size_t k = 0; k < a.frames.size(); ++k) {
    const auto& pa = a.frames[k].positions();
    const auto& pb = b.frames[k].positions();
    ASSERT_EQ(pa.size(), pb.size());
    EXPECT_EQ(std::memcmp(pa.data(), pb.data(), sizeof(double) * static_cast<std::size_t>(pa.size())), 0);
  }
  const auto c = sim::generate(testing::box_on_edge(0.01, 1235));
  EXPECT_NE(a.frames[1].positions(), c.frames[1].positions());
}

TEST(Generate, TruthIndependentOfNoiseAndSeed) {
  const auto quiet = sim::make_truth(testing::box_on_edge(0.0, 1));
  const auto loud = sim::generate(testing::box_on_edge(0.05, 99)).truth;
  ASSERT_EQ(quiet.motions.size(), loud.motions.size());
  for (std::size_t k = 0; k < quiet.motions.size(); ++k) {
    EXPECT_EQ(quiet.motions[k].rotation(), loud.motions[k].rotation());
    EXPECT_EQ(quiet.motions[k].translation(), loud.motions[k].translation());
  }
}

TEST(Generate, InvalidSchedules) {
  auto point = single_rotation_about_origin();
  point.contact = sim::FixedPointContact{Eigen::Vector3d(0, 0, -3)};
  point.schedule[0].translation = Eigen::Vector3d(0.1, 0, 0);
  EXPECT_EQ(code_of([&] { sim::generate(point); }), ErrorCode::InvalidSchedule);

  auto sliding_point = single_rotation_about_origin();
  sliding_point.schedule[0].slide = 0.5;
  EXPECT_EQ(code_of([&] { sim::generate(sliding_point); }), ErrorCode::InvalidSchedule);

  auto line = testing::box_on_edge(0.0);
  line.schedule[3].axis = Eigen::Vector3d(1, 0.1, 0);
  EXPECT_EQ(code_of([&] { sim::generate(line); }), ErrorCode::InvalidSchedule);

  auto direction = single_rotation_about_origin();
  direction.contact = sim::FixedDirectionContact{Eigen::Vector3d::UnitZ()};
  EXPECT_EQ(code_of([&] { sim::generate(direction); }), ErrorCode::InvalidSchedule);

  auto empty = single_rotation_about_origin();
  empty.schedule.clear();
  EXPECT_EQ(code_of([&] { sim::generate(empty); }), ErrorCode::InvalidSchedule);
}

TEST(Generate, ConsistentTranslationAccepted) {
  auto config = single_rotation_about_origin();
  const Eigen::Vector3d pivot(1, 2, -3);
  config.contact = sim::FixedPointContact{pivot};
  config.schedule[0].translation =
      (Eigen::Matrix3d::Identity() - testing::rodrigues(config.schedule[0].axis, config.schedule[0].angle)) * pivot;
  EXPECT_NO_THROW(sim::generate(config));
}

TEST(Generate, InvalidConfig) {
  auto config = single_rotation_about_origin();
  config.grid.rows = 1;
  EXPECT_EQ(code_of([&] { sim::generate(config); }), ErrorCode::InvalidArgument);
  config = single_rotation_about_origin();
  config.noise_sigma = Eigen::Vector3d(0, -1, 0);
  EXPECT_EQ(code_of([&] { sim::generate(config); }), ErrorCode::InvalidArgument);
  auto line = testing::box_on_edge(0.0);
  line.contact = sim::LineContact{Eigen::Vector3d::UnitX(), Eigen::Vector3d::Zero(), Eigen::Vector3d(1, 0, 1)};
  EXPECT_EQ(code_of([&] { sim::generate(line); }), ErrorCode::InvalidArgument);
}

TEST(Grid, DomeMakesRankThree) {
  sim::MarkerGrid grid;
  const auto result = register_frames(MarkerFramed(grid.positions()), MarkerFramed(grid.positions()));
  EXPECT_EQ(result.marker_covariance_rank, 3);
  grid.dome_ratio = 0.0;
  EXPECT_EQ(register_frames(MarkerFramed(grid.positions()), MarkerFramed(grid.positions())).marker_covariance_rank, 2);
}

TEST(Grid, NoiseHasRequestedSpread) {
  sim::ScenarioConfig config = single_rotation_about_origin();
  config.grid.rows = config.grid.cols = 60;
  config.noise_sigma = Eigen::Vector3d(0.01, 0.02, 0.0);
  const auto scenario = sim::generate(config);
  const Matrix3X<double> noise = scenario.frames[1].positions() - scenario.truth.motions[1].apply(config.grid.positions());
  const double n = static_cast<double>(noise.cols());
  EXPECT_NEAR(std::sqrt(noise.row(0).squaredNorm() / n), 0.01, 0.001);
  EXPECT_NEAR(std::sqrt(noise.row(1).squaredNorm() / n), 0.02, 0.002);
  EXPECT_LE(noise.row(2).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(noise.row(0).mean(), 0.0, 0.001);
}

TEST(NormalSource, DeterministicAndStandard) {
  sim::NormalSource a(5), b(5);
  double sum = 0, sum_sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = a.next();
    ASSERT_EQ(z, b.next());
    sum += z;
    sum_sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sum_sq / n, 1.0, 0.01);
}

TEST(ConstraintResiduals, ZeroForEveryVariant) {
  std::mt19937_64 rng(6);
  const auto check = [](const sim::ScenarioTruth& truth) {
    const auto residuals = sim::constraint_residuals(truth);
    ASSERT_EQ(residuals.size(), truth.motions.size());
    for (double r : residuals) EXPECT_LE(r, 1e-12);
  };
  check(sim::make_truth(testing::pivot_scenario(rng, 0.01)));
  check(sim::make_truth(testing::direction_scenario(rng, Eigen::Vector3d(1, 2, 2), 0.01)));
  check(sim::make_truth(testing::box_on_edge(0.01)));
}

TEST(ConstraintResiduals, DetectsCorruptedMotion) {
  std::mt19937_64 rng(8);
  auto truth = sim::make_truth(testing::pivot_scenario(rng, 0.0));
  auto motions = truth.motions.motions();
  motions[3] = RelativeMotiond(motions[3].rotation(), motions[3].translation() + Eigen::Vector3d(0, 0, 0.1), 3);
  truth.motions = MotionSequenced(motions);
  const auto residuals = sim::constraint_residuals(truth);
  EXPECT_LE(residuals[2], 1e-12);
  EXPECT_NEAR(residuals[3], 0.1, 1e-12);
}

TEST(ConstraintResiduals, EdgeStaysOnMovedFace) {
  const auto truth = sim::make_truth(testing::box_on_edge(0.0));
  const auto& line = std::get<sim::LineContact>(truth.contact);
  const auto faces = propagate_plane(line.n0, line.point, truth.motions);
  for (std::size_t k = 0; k < faces.size(); ++k) {
    for (double s : {-5.0, 0.0, 3.0}) {
      EXPECT_LE(std::abs(faces.normals()[k].dot(line.point + s * line.direction) - faces.offsets()[k]), 1e-12);
    }
  }
}

TEST(RoundTrip, EveryVariantNoiseless) {
  std::mt19937_64 rng(10);
  auto pivot = testing::pivot_scenario(rng, 0.0);
  const auto p = estimate_fixed_point(register_sequence(sim::generate(pivot).frames));
  EXPECT_LE((*p.point() - std::get<sim::FixedPointContact>(pivot.contact).point).norm(), 1e-9);

  const Eigen::Vector3d axis = Eigen::Vector3d(1, 2, 2) / 3.0;
  const auto e = estimate_fixed_direction(register_sequence(sim::generate(testing::direction_scenario(rng, axis, 0.0)).frames));
  EXPECT_LE(testing::angle_between_lines(*e.direction(), axis), 1e-9);

  const auto l = estimate_line_contact(register_sequence(sim::generate(testing::box_on_edge(0.0)).frames),
                                       Eigen::Vector3d(0, 0, 1));
  EXPECT_LE(testing::angle_between_lines(*l.direction(), Eigen::Vector3d::UnitX()), 1e-9);
}

TEST(RoundTrip, ErrorGrowsWithNoise) {
  // Mean pivot error over 50 seeds per level.
  double previous = -1.0;
  for (double fraction : {0.0, 0.005, 0.01, 0.02, 0.05}) {
    std::mt19937_64 rng(2);
    double mean = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const auto config = testing::pivot_scenario(rng, fraction);
      const auto p = estimate_fixed_point(register_sequence(sim::generate(config).frames));
      mean += (*p.point() - std::get<sim::FixedPointContact>(config.contact).point).norm() / 50.0;
    }
    EXPECT_GT(mean, previous) << "noise fraction " << fraction;
    previous = mean;
  }
}

}  // namespace
}  // namespace extrinsic
