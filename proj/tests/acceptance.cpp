// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "extrinsic/cli.hpp"
#include "extrinsic/estimators.hpp"
#include "extrinsic/io.hpp"
#include "extrinsic/registration.hpp"
#include "extrinsic/simulator.hpp"
#include "test_support.hpp"

namespace {

using namespace extrinsic;
namespace t = extrinsic::testing;

const Eigen::Vector3d kX = Eigen::Vector3d::UnitX();
const Eigen::Vector3d kZ = Eigen::Vector3d::UnitZ();

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

MotionSequenced observed(const sim::ScenarioConfig& config) {
  return register_sequence(sim::generate(config).frames);
}

Verdict registration_exactness() {
  std::mt19937_64 rng(1001);
  const auto grid = t::planar_grid(11, 11, 1.0, 0.3);
  const double scale = 5.0;
  double worst_r = 0, worst_t = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = t::random_rigid(rng, scale);
    const MarkerFramed ref(grid, 0);
    const MarkerFramed cur(g.apply(grid), 1);
    const auto result = register_frames(ref, cur);
    worst_r = std::max(worst_r, (result.motion.rotation() - g.rotation()).norm());
    worst_t = std::max(worst_t, (result.motion.translation() - g.translation()).norm());
  }
  return {worst_r <= 1e-9 && worst_t <= 1e-9 * scale,
          "max rotation error " + fmt(worst_r) + ", max translation error " + fmt(worst_t)};
}

Verdict fixed_point_recovery() {
  std::mt19937_64 rng(2002);
  double worst_clean = 0;
  std::vector<double> relative;
  for (int trial = 0; trial < 50; ++trial) {
    auto config = t::pivot_scenario(rng, 0.0);
    const Eigen::Vector3d truth = std::get<sim::FixedPointContact>(config.contact).point;
    worst_clean = std::max(worst_clean, (*estimate_fixed_point(observed(config)).point() - truth).norm());
    config.noise_sigma = Eigen::Vector3d::Constant(0.01 * config.grid.pitch);
    const double err = (*estimate_fixed_point(observed(config)).point() - truth).norm();
    relative.push_back(err / t::pivot_scale(config));
  }
  const double med = t::median(relative);
  return {worst_clean <= 1e-9 && med <= 0.02,
          "noiseless max error " + fmt(worst_clean) + ", noisy median error " + fmt(med) + " of scale"};
}

Verdict singularity_behavior() {
  bool identity_ok = true;
  const auto grid = t::planar_grid(5, 5, 1.0, 0.2);
  const auto identical = register_sequence(std::vector<MarkerFramed>{
      MarkerFramed(grid, 0), MarkerFramed(grid, 1), MarkerFramed(grid, 2), MarkerFramed(grid, 3)});
  identity_ok &= !estimate_fixed_point(identical).conditioning().well_posed;
  EstimatorConfigd strict;
  strict.strict = true;
  try {
    estimate_fixed_point(identical, strict);
    identity_ok = false;
  } catch (const Error& e) {
    identity_ok &= e.code() == ErrorCode::IllConditioned;
  }

  bool monotone = true;
  double previous = std::numeric_limits<double>::infinity();
  for (int degrees = 1; degrees <= 30; ++degrees) {
    const auto motions = MotionSequenced::from_motions(
        {t::rot(kX, t::deg(degrees)), t::rot(Eigen::Vector3d::UnitY(), t::deg(degrees) / 2.0)});
    const double cond = estimate_fixed_point(motions).conditioning().condition_number;
    monotone &= cond < previous;
    previous = cond;
  }
  return {identity_ok && monotone, std::string("identity ill-posed: ") + (identity_ok ? "yes" : "no") +
                                       ", condition falls 1..30 deg: " + (monotone ? "yes" : "no")};
}

// Line estimate on a bundled scenario file against its own ground truth.
std::pair<double, double> bundled_line_errors(const std::string& name) {
  const auto file = io::read_scenario(std::filesystem::path(EXTRINSIC_SCENARIO_DIR) / (name + ".json"));
  const auto& truth = std::get<sim::LineContact>(file.config.contact);
  const auto estimate = estimate_line_contact(observed(file.config), *file.estimate.n0, file.estimate.config);
  return {t::angle_between_lines(*estimate.direction(), truth.direction),
          t::distance_to_line(*estimate.point(), truth.point, truth.direction)};
}

Verdict line_contact_recovery() {
  const double box = 40.0;  // side of the bundled box
  const auto [clean_dir, clean_pt] = bundled_line_errors("line_contact_noiseless");
  const auto [noisy_dir, noisy_pt] = bundled_line_errors("line_contact_noisy");

  // Monte-Carlo over seeds at noise sigma = 1% of the box size; the point
  // bound applies to the 90th percentile.
  double worst_dir = 0;
  std::vector<double> point_errors;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    auto config = t::box_on_edge(0.0, seed, box);
    config.noise_sigma = Eigen::Vector3d::Constant(0.01 * box);
    const auto noisy = estimate_line_contact(observed(config), kZ);
    worst_dir = std::max(worst_dir, t::angle_between_lines(*noisy.direction(), kX));
    point_errors.push_back(t::distance_to_line(*noisy.point(), Eigen::Vector3d::Zero(), kX) / box);
  }
  const double p90 = t::quantile(point_errors, 0.9);
  const bool pass = clean_dir <= 1e-9 && clean_pt <= 1e-9 && noisy_dir <= t::deg(2.0) && noisy_pt <= 0.05 * box &&
                    worst_dir <= t::deg(2.0) && p90 <= 0.05;
  return {pass, "noiseless " + fmt(clean_dir) + " rad / " + fmt(clean_pt) + ", bundled noisy " +
                    fmt(noisy_dir * 180 / std::numbers::pi) + " deg / " + fmt(noisy_pt / box) +
                    " of box, 50 seeds: worst " + fmt(worst_dir * 180 / std::numbers::pi) + " deg, p90 point " +
                    fmt(p90) + " of box"};
}

Verdict eigen_matches_grid_search() {
  std::mt19937_64 rng(5005);
  double worst = 0;
  bool objective_ok = true;
  std::normal_distribution<double> noise(0.0, 0.02);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Vector3d axis = t::random_unit(rng);
    const Eigen::Vector3d n0 = axis.unitOrthogonal();
    std::vector<Eigen::Vector3d> normals;
    std::vector<double> offsets;
    for (int k = 0; k < 12; ++k) {
      const Eigen::Vector3d n =
          t::rodrigues(axis, t::deg(-45.0 + 90.0 * k / 11)) * n0 + Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
      normals.push_back(n.normalized());
      offsets.push_back(0.0);
    }
    auto objective = [&](const Eigen::Vector3d& l) {
      double s = 0;
      for (const auto& n : normals) s += n.dot(l) * n.dot(l);
      return s;
    };
    const Eigen::Vector3d l = estimate_line_direction(PlaneTrackd(normals, offsets));
    double best = std::numeric_limits<double>::infinity();
    Eigen::Vector3d best_l = kZ;
    for (int polar = 0; polar <= 90; ++polar) {
      for (int azimuth = 0; azimuth < 360; ++azimuth) {
        const double th = t::deg(polar), ph = t::deg(azimuth);
        const Eigen::Vector3d c(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
        const double f = objective(c);
        if (f < best) best = f, best_l = c;
      }
    }
    objective_ok &= objective(l) <= best + 1e-15;
    worst = std::max(worst, t::angle_between_lines(l, best_l));
  }
  return {objective_ok && worst <= t::deg(1.0),
          "max disagreement " + fmt(worst * 180 / std::numbers::pi) + " deg"};
}

Verdict cross_estimator_consistency() {
  auto config = t::box_on_edge(0.0);
  auto line = std::get<sim::LineContact>(config.contact);
  line.point = Eigen::Vector3d(0.0, 0.4, 0.0);
  config.contact = line;
  for (auto& step : config.schedule) step.slide = 0.0;
  const auto motions = observed(config);
  const auto slip = estimate_line_contact(motions, kZ);
  const auto point = estimate_fixed_point(motions);
  const auto direction = estimate_fixed_direction(motions);
  const double dir_err = t::angle_between_lines(*direction.direction(), *slip.direction());
  const double pt_err = (*point.point() - *slip.point()).norm();
  return {dir_err <= 1e-6 && pt_err <= 1e-6, "direction " + fmt(dir_err) + " rad, point " + fmt(pt_err)};
}

Verdict frame_covariance() {
  std::mt19937_64 rng(7007);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = t::random_rigid(rng, 5.0);
    const auto pm = observed(t::pivot_scenario(rng, 0.01));
    worst = std::max(worst, (*estimate_fixed_point(conjugate(pm, g)).point() -
                             g.apply(*estimate_fixed_point(pm).point())).norm());
    const auto dm = observed(t::direction_scenario(rng, t::random_unit(rng), 0.01));
    worst = std::max(worst, t::angle_between_lines(*estimate_fixed_direction(conjugate(dm, g)).direction(),
                                                   g.rotation() * *estimate_fixed_direction(dm).direction()));
    const auto lm = observed(t::box_on_edge(0.01, rng()));
    const auto l = estimate_line_contact(lm, kZ);
    const auto lg = estimate_line_contact(conjugate(lm, g), Eigen::Vector3d(g.rotation() * kZ));
    worst = std::max(worst, t::angle_between_lines(*lg.direction(), g.rotation() * *l.direction()));
    worst = std::max(worst, t::distance_to_line(g.apply(*l.point()), *lg.point(), *lg.direction()));
  }
  return {worst <= 1e-9, "max deviation " + fmt(worst)};
}

Verdict cli_round_trip() {
  namespace fs = std::filesystem;
  std::vector<fs::path> scenarios;
  for (const auto& entry : fs::directory_iterator(EXTRINSIC_SCENARIO_DIR)) {
    if (entry.path().extension() == ".json") scenarios.push_back(entry.path());
  }
  std::sort(scenarios.begin(), scenarios.end());
  bool ok = !scenarios.empty();
  std::string failed;
  for (const auto& path : scenarios) {
    std::ostringstream out, err;
    const std::vector<std::string> args{"roundtrip", "--scenario", path.string()};
    if (cli::run(args, out, err) != cli::kExitOk) {
      ok = false;
      failed += " " + path.stem().string();
    }
    const auto config = io::read_scenario(path).config;
    io::MarkerLog log;
    log.frames = sim::generate(config).frames;
    const std::string first = io::format_marker_log(log);
    if (io::format_marker_log(io::parse_marker_log(first)) != first) {
      ok = false;
      failed += " " + path.stem().string() + "(log)";
    }
    io::MarkerLog again;
    again.frames = sim::generate(config).frames;
    if (io::format_marker_log(again) != first) {
      ok = false;
      failed += " " + path.stem().string() + "(seed)";
    }
  }
  return {ok, std::to_string(scenarios.size()) + " scenarios" + (failed.empty() ? "" : ", failed:" + failed)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"1 registration exactness", registration_exactness},
      {"2 fixed-point recovery", fixed_point_recovery},
      {"3 singularity behavior", singularity_behavior},
      {"4 line-contact recovery", line_contact_recovery},
      {"5 eigen solution vs grid search", eigen_matches_grid_search},
      {"6 cross-estimator consistency", cross_estimator_consistency},
      {"7 frame covariance", frame_covariance},
      {"8 CLI round trip", cli_round_trip},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s criterion %s: %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
    failures += v.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
