#include <cmath>

#include <gtest/gtest.h>

#include "pumphi/core.hpp"
#include "pumphi/simgen.hpp"
#include "support.hpp"

using namespace pumphi;

namespace {

SensorSet two_gauges() {
  SensorSet s = default_sensors();
  s[0] = {"capacitance", 1.0, 1100.0, 2, 1.0};
  s[1] = {"pirani", 1e-3, 10.0, 1, 1.0};
  return s;
}

PressureSample sample(std::optional<double> a, std::optional<double> b = std::nullopt,
                      std::optional<double> c = std::nullopt, std::optional<double> d = std::nullopt) {
  return {0.0, {a, b, c, d}};
}

}  // namespace

TEST(CompositePressure, SingleValidSensor) {
  EXPECT_DOUBLE_EQ(composite_pressure(sample(500.0), two_gauges()), 500.0);
}

TEST(CompositePressure, OutOfRangeReadingIsSkipped) {
  // s1 reads 0.5, below its 1 mbar floor; s2 is in range and ranks first anyway.
  EXPECT_DOUBLE_EQ(composite_pressure(sample(0.5, 0.5), two_gauges()), 0.5);
  // A lower-priority gauge is used when the preferred one is out of range.
  EXPECT_DOUBLE_EQ(composite_pressure(sample(500.0, 25.0), two_gauges()), 500.0);
}

TEST(CompositePressure, PriorityWinsInsideOverlap) {
  EXPECT_DOUBLE_EQ(composite_pressure(sample(5.0, 5.2), two_gauges()), 5.2);
}

TEST(CompositePressure, NoValidReading) {
  EXPECT_PUMPHI_ERROR(composite_pressure(sample(std::nullopt), two_gauges()), Errc::no_valid_reading);
  EXPECT_PUMPHI_ERROR(composite_pressure(sample(0.5, 50.0), two_gauges()), Errc::no_valid_reading);
  EXPECT_PUMPHI_ERROR(composite_pressure(sample(-1.0), two_gauges()), Errc::no_valid_reading);
}

TEST(CompositePressure, PureFunction) {
  const auto s = sample(3.0, 2.0, 1e-4, 2e-4);
  EXPECT_EQ(composite_pressure(s, default_sensors()), composite_pressure(s, default_sensors()));
}

TEST(CompositeCurve, TracksTruePressureWithinOnePercent) {
  ChamberConfig cfg;
  cfg.noise_sigma = 0.0;
  ChamberState state;
  state.contamination = 30.0;
  const RunRecord run = simulate_run(state, default_recipes()[0], cfg, 11, {1, 0, 0.0});
  const auto curve = composite_curve(run, cfg.sensors);
  ASSERT_EQ(curve.size(), run.samples.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    EXPECT_NEAR(curve.p[i], run.truth->pressure[i], 0.01 * run.truth->pressure[i]) << "sample " << i;
  }
}

TEST(CompositeCurve, NoisyRunStaysNearTruth) {
  const ChamberConfig cfg;
  const RunRecord run = simulate_run(ChamberState{}, default_recipes()[0], cfg, 3, {1, 0, 0.0});
  const auto curve = composite_curve(run, cfg.sensors);
  ASSERT_FALSE(curve.empty());
  std::size_t j = 0;
  for (std::size_t i = 0; i < run.samples.size() && j < curve.size(); ++i) {
    if (run.samples[i].t != curve.t[j]) continue;
    // 6 sigma of the noisiest gauge in log space.
    EXPECT_LT(std::abs(std::log(curve.p[j] / run.truth->pressure[i])), 6.0 * cfg.noise_sigma * 40.0);
    ++j;
  }
  EXPECT_EQ(j, curve.size());
}

TEST(SensorSet, Validation) {
  validate(default_sensors());
  SensorSet s = default_sensors();
  s[1].priority = s[0].priority;
  EXPECT_PUMPHI_ERROR(validate(s), Errc::config);
  s = default_sensors();
  s[2].min_mbar = s[2].max_mbar;
  EXPECT_PUMPHI_ERROR(validate(s), Errc::config);
}

TEST(SegmentSpec, Validation) {
  for (const auto& s : default_segments()) validate(s);
  EXPECT_PUMPHI_ERROR(validate(SegmentSpec{1, 0.002, 0.03}), Errc::config);
  EXPECT_PUMPHI_ERROR(validate(SegmentSpec{1, 0.03, 0.0}), Errc::config);
  EXPECT_PUMPHI_ERROR(validate(SegmentSpec{0, 0.03, 0.002}), Errc::config);
  EXPECT_EQ(default_segments()[1].label(), "dp2");
}

TEST(Errors, ClassMapping) {
  EXPECT_EQ(error_class(Errc::config), ErrorClass::config);
  EXPECT_EQ(error_class(Errc::no_valid_reading), ErrorClass::data);
  EXPECT_EQ(error_class(Errc::bad_plan_length), ErrorClass::data);
  EXPECT_EQ(error_class(Errc::k_too_large), ErrorClass::model);
  EXPECT_EQ(error_class(Errc::diverged_loss), ErrorClass::model);
  EXPECT_EQ(error_class_name(ErrorClass::data), "DataError");
  EXPECT_EQ(errc_name(Errc::no_valid_reading), "NoValidReading");
}
