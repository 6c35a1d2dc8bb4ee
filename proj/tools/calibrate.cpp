// Monte-Carlo calibration run behind the frozen test tolerances. Prints
// error quantiles for each noisy check; rerun after changing a generator
// or an estimator and compare against the bounds in the test suites.
//
//   extrinsic_calibrate [trials]

#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "extrinsic/estimators.hpp"
#include "extrinsic/registration.hpp"
#include "extrinsic/simulator.hpp"
#include "test_support.hpp"

namespace {

using namespace extrinsic;
namespace t = extrinsic::testing;

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

void print(const std::string& label, const std::vector<double>& v, double scale = 1.0) {
  std::printf("  %-34s p50 %10.4g  p90 %10.4g  p95 %10.4g  max %10.4g\n", label.c_str(),
              scale * t::quantile(v, 0.5), scale * t::quantile(v, 0.9), scale * t::quantile(v, 0.95),
              scale * t::quantile(v, 1.0));
}

MotionSequenced observed(const sim::ScenarioConfig& config) {
  return register_sequence(sim::generate(config).frames);
}

void registration(int trials) {
  std::printf("registration, 11x11 grid, sigma = 1%% of pitch (bound 0.5 deg, 0.05 pitch)\n");
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 0.01);
  const auto grid = t::planar_grid(11, 11, 1.0, 0.05);
  std::vector<double> rot, trans;
  for (int i = 0; i < trials; ++i) {
    const auto truth = RelativeMotiond(t::rodrigues(Eigen::Vector3d::UnitZ(), t::deg(10)), Eigen::Vector3d(1, 2, 3));
    Matrix3X<double> current = truth.apply(grid);
    for (Eigen::Index k = 0; k < current.size(); ++k) current.data()[k] += noise(rng);
    const auto result = register_frames(MarkerFramed(grid, 0), MarkerFramed(current, 1));
    rot.push_back(rotation_angle(compose(result.motion, truth.inverse())));
    trans.push_back((result.motion.translation() - truth.translation()).norm());
  }
  print("rotation error (deg)", rot, kRadToDeg);
  print("translation error (pitch)", trans);
}

void pivot(int trials) {
  std::printf("fixed point, 5 motions of 10-25 deg, sigma = 1%% of pitch (bound: median 2%% of scale)\n");
  std::mt19937_64 rng(2002);
  std::vector<double> rel;
  for (int i = 0; i < trials; ++i) {
    const auto config = t::pivot_scenario(rng, 0.01);
    const Eigen::Vector3d truth = std::get<sim::FixedPointContact>(config.contact).point;
    rel.push_back((*estimate_fixed_point(observed(config)).point() - truth).norm() / t::pivot_scale(config));
  }
  print("pivot error / scale", rel);
}

void angle_threshold(int trials) {
  std::printf("fixed point vs largest rotation, sigma = 1%% of pitch (default angle_threshold 2 deg)\n");
  for (double max_deg : {0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0}) {
    std::mt19937_64 rng(3003);
    std::vector<double> rel;
    for (int i = 0; i < trials; ++i) {
      auto config = t::pivot_scenario(rng, 0.01);
      for (auto& step : config.schedule) step.angle = t::deg(t::uniform(rng, 0.5 * max_deg, max_deg));
      const Eigen::Vector3d truth = std::get<sim::FixedPointContact>(config.contact).point;
      rel.push_back((*estimate_fixed_point(observed(config)).point() - truth).norm() / t::pivot_scale(config));
    }
    print("max " + std::to_string(max_deg).substr(0, 4) + " deg: pivot error / scale", rel);
  }
}

void direction(int trials) {
  std::printf("fixed direction, 6 motions of 10-20 deg, sigma = 1%% of pitch (bound 1 deg)\n");
  std::mt19937_64 rng(4004);
  const Eigen::Vector3d axis = Eigen::Vector3d(1, 2, 2) / 3.0;
  std::vector<double> err;
  for (int i = 0; i < trials; ++i) {
    err.push_back(t::angle_between_lines(*estimate_fixed_direction(observed(t::direction_scenario(rng, axis, 0.01))).direction(), axis));
  }
  print("axis error (deg)", err, kRadToDeg);
}

void line(int trials) {
  std::printf("box on edge, 20 tilts to 45 deg, sigma = 1%% of box (bounds 2 deg; p90 5%% of box)\n");
  const double box = 4.0;
  std::vector<double> dir, point;
  for (int i = 0; i < trials; ++i) {
    auto config = t::box_on_edge(0.0, static_cast<std::uint64_t>(i + 1), box);
    config.noise_sigma = Eigen::Vector3d::Constant(0.01 * box);
    const auto estimate = estimate_line_contact(observed(config), Eigen::Vector3d(Eigen::Vector3d::UnitZ()));
    dir.push_back(t::angle_between_lines(*estimate.direction(), Eigen::Vector3d::UnitX()));
    point.push_back(t::distance_to_line(*estimate.point(), Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitX()) / box);
  }
  print("direction error (deg)", dir, kRadToDeg);
  print("point-to-edge / box", point);
}

}  // namespace

int main(int argc, char** argv) {
  const int trials = argc > 1 ? std::max(10, std::atoi(argv[1])) : 200;
  std::printf("%d trials per row\n", trials);
  registration(trials);
  pivot(trials);
  angle_threshold(trials);
  direction(trials);
  line(trials);
}
