#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "bhd/errors.hpp"
#include "bhd/estimators.hpp"
#include "bhd/trace_gen.hpp"
#include "test_util.hpp"

using namespace bhd;
using namespace bhd::test;

namespace {

TracePair make_trace(std::vector<double> ch1, std::vector<double> ch2) {
  TracePair t;
  t.ch1 = std::move(ch1);
  t.ch2 = std::move(ch2);
  t.metadata.source = "test";
  return t;
}

TracePair squeezed_trace(std::int64_t n, double sigma = 0.0, double rho = 0.0,
                         std::uint64_t seed = 7) {
  SimulationConfig cfg;
  cfg.state = GaussianState(0.171, 0.79);
  cfg.noise = DetectorNoiseModel(sigma, sigma, rho);
  cfg.n_samples = n;
  cfg.seed = seed;
  return sample_trace_pair(cfg);
}

}  // namespace

TEST_CASE("difference variance on hand-checked inputs") {
  const TracePair same = make_trace({1.5, 2.5, -3.0, 0.25}, {1.5, 2.5, -3.0, 0.25});
  CHECK(difference_variance(same).value == 0.0);

  const TracePair simple = make_trace({1, 2, 3}, {0, 0, 0});
  const EstimateWithError est = difference_variance(simple);
  CHECK(est.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(est.std_error == doctest::Approx(1.0).epsilon(1e-12));  // value*sqrt(2/(n-1))
  CHECK(est.n == 3);

  CHECK_THROWS_AS(difference_variance(make_trace({1.0}, {0.0})), InsufficientDataError);
  CHECK_THROWS_AS(difference_variance(make_trace({1, 2}, {1, 2, 3})), std::invalid_argument);
}

TEST_CASE("difference variance matches the closed-form oracle") {
  const TracePair trace = squeezed_trace(1'000'000);
  const EstimateWithError est = difference_variance(trace);
  // 4 * 0.171 = 0.684 with no electronic noise
  CHECK(close_abs(est.value, 0.684, 4.0 * est.std_error));
}

TEST_CASE("covariance on hand-checked inputs") {
  const TracePair anti = make_trace({1, 2, 3}, {3, 2, 1});
  CHECK(covariance(anti).value == doctest::Approx(-1.0).epsilon(1e-12));

  const TracePair dup = make_trace({0.5, 1.25, -2.0, 4.0}, {0.5, 1.25, -2.0, 4.0});
  BivariateMoments acc;
  for (double v : dup.ch1) acc.add(v, v);
  CHECK(covariance(dup).value == doctest::Approx(acc.variance_x()).epsilon(1e-12));

  CHECK_THROWS_AS(covariance(make_trace({1.0}, {1.0})), InsufficientDataError);
}

TEST_CASE("covariance matches the closed-form oracle, noise or not") {
  const TracePair quiet = squeezed_trace(1'000'000, 0.0);
  const EstimateWithError a = covariance(quiet);
  CHECK(close_abs(a.value, 0.079, 4.0 * a.std_error));

  const TracePair noisy = squeezed_trace(1'000'000, 1.0, 0.0, 8);
  const EstimateWithError b = covariance(noisy);
  CHECK(close_abs(b.value, 0.079, 4.0 * b.std_error));
}

TEST_CASE("estimator consistency includes the correlated-noise term") {
  const double sigma = 0.9;
  const double rho = 0.35;
  const TracePair trace = squeezed_trace(1'000'000, sigma, rho, 21);
  const EstimateWithError cov = covariance(trace);
  CHECK(close_abs(cov.value, 0.079 + rho * sigma * sigma, 4.0 * cov.std_error));

  const EstimateWithError diff = difference_variance(trace);
  const double expected = 0.684 + 2.0 * sigma * sigma - 2.0 * rho * sigma * sigma;
  CHECK(close_abs(diff.value, expected, 4.0 * diff.std_error));
}

TEST_CASE("one-pass and two-pass covariance agree") {
  const TracePair trace = squeezed_trace(100'000, 0.5, 0.0, 31);
  const EstimateWithError one = covariance(trace);
  const EstimateWithError two = covariance_two_pass(trace);
  CHECK(close_rel(one.value, two.value, 1e-10));
  CHECK(close_rel(one.std_error, two.std_error, 1e-8));

  SUBCASE("with a catastrophic common offset") {
    TracePair shifted = trace;
    for (auto& v : shifted.ch1) v += 1e8;
    for (auto& v : shifted.ch2) v += 1e8;
    const EstimateWithError one_s = covariance(shifted);
    const EstimateWithError two_s = covariance_two_pass(shifted);
    CHECK(close_rel(one_s.value, two_s.value, 1e-10));
    // offset traces still agree with the offset-free estimate
    CHECK(close_rel(one_s.value, one.value, 1e-6));
    CHECK(close_rel(two_s.value, two.value, 1e-6));
  }

  SUBCASE("constant channels have zero covariance") {
    const TracePair flat = make_trace({5.0, 5.0, 5.0}, {-2.0, -2.0, -2.0});
    CHECK(covariance(flat).value == 0.0);
    CHECK(covariance_two_pass(flat).value == 0.0);
  }
}

TEST_CASE("shift invariance of covariance and difference variance") {
  const TracePair trace = squeezed_trace(50'000, 0.3, 0.0, 41);
  const double cov0 = covariance(trace).value;
  const double diff0 = difference_variance(trace).value;
  for (const double shift : {12345.6789, -987.25}) {
    TracePair shifted = trace;
    for (auto& v : shifted.ch1) v += shift;
    CHECK(close_rel(covariance(shifted).value, cov0, 1e-9));
    CHECK(close_rel(difference_variance(shifted).value, diff0, 1e-9));
  }
}

TEST_CASE("accumulator merge equals sequential processing") {
  const TracePair trace = squeezed_trace(100'000, 0.2, 0.1, 51);
  BivariateMoments seq;
  for (std::size_t k = 0; k < trace.size(); ++k) seq.add(trace.ch1[k], trace.ch2[k]);

  const std::array<std::size_t, 8> cuts = {0, 13, 100, 5'000, 5'001, 40'000, 99'999, 100'000};
  BivariateMoments merged;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    BivariateMoments chunk;
    for (std::size_t k = cuts[c]; k < cuts[c + 1]; ++k) chunk.add(trace.ch1[k], trace.ch2[k]);
    merged.merge(chunk);
  }
  CHECK(merged.count() == seq.count());
  CHECK(close_rel(merged.mean_x(), seq.mean_x(), 1e-12));
  CHECK(close_rel(merged.covariance(), seq.covariance(), 1e-12));
  CHECK(close_rel(merged.variance_x(), seq.variance_x(), 1e-12));
  CHECK(close_rel(merged.variance_y(), seq.variance_y(), 1e-12));
}

TEST_CASE("snl calibration on exact lines") {
  const std::vector<std::pair<double, double>> no_floor = {{1, 2}, {2, 4}, {3, 6}, {4, 8}};
  const SnlCalibration a = calibrate_snl(no_floor);
  CHECK(a.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(close_abs(a.intercept, 0.0, 1e-12));
  CHECK(a.r_squared == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<std::pair<double, double>> with_floor = {{1, 2.5}, {2, 4.5}, {4, 8.5}};
  const SnlCalibration b = calibrate_snl(with_floor);
  CHECK(b.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(b.intercept == doctest::Approx(0.5).epsilon(1e-12));
  // the extrapolation discards the electronic-noise floor
  CHECK(b.snl_at(0.1) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(b.fit_points.size() == 3);
}

TEST_CASE("snl calibration rejects degenerate ladders") {
  using Points = std::vector<std::pair<double, double>>;
  CHECK_THROWS_AS(calibrate_snl(Points{{1, 1}, {2, 2}}), CalibrationError);
  CHECK_THROWS_AS(calibrate_snl(Points{{1, 1}, {1, 2}, {1, 3}}), CalibrationError);
  CHECK_THROWS_AS(calibrate_snl(Points{{-1, 1}, {2, 2}, {3, 3}}), CalibrationError);
  CHECK_THROWS_AS(calibrate_snl(Points{{1, 0.0}, {2, 2}, {3, 3}}), CalibrationError);
  // decreasing variance: nonpositive slope
  CHECK_THROWS_AS(calibrate_snl(Points{{1, 4}, {2, 3}, {3, 2}}), CalibrationError);
}

TEST_CASE("snl calibration recovers the shot-noise slope from traces") {
  const double max_power = 8.0;
  const double sigma = std::sqrt(0.02 * max_power / 2.0);  // per detector
  std::vector<std::pair<double, double>> ladder;
  std::size_t idx = 0;
  for (const double power : {1.0, 2.0, 4.0, 8.0}) {
    SimulationConfig cfg;
    cfg.lo = LocalOscillator(std::sqrt(power));
    cfg.noise = DetectorNoiseModel(sigma, sigma, 0.0);
    cfg.n_samples = 200'000;
    cfg.seed = derive_seed(2025, 17, idx++);
    ladder.emplace_back(power, difference_variance(sample_trace_pair(cfg)).value);
  }
  const SnlCalibration cal = calibrate_snl(ladder);
  CHECK(close_rel(cal.slope, 1.0, 0.02));
  CHECK(close_abs(cal.intercept, 0.02 * max_power, 0.05));
}

TEST_CASE("squeezing from the subtraction method") {
  const TracePair trace = squeezed_trace(1'000'000);
  const double snl_exact = difference_variance(trace).value;
  CHECK(squeezing_from_subtraction(trace, snl_exact) == 0.0);
  CHECK(close_abs(squeezing_from_subtraction(trace, 1.0), -1.65, 0.1));
  CHECK_THROWS_AS(squeezing_from_subtraction(trace, 0.0), std::domain_error);

  // tiny LO power with fixed electronic noise: the reading turns positive
  SimulationConfig cfg;
  cfg.state = GaussianState(0.171, 0.79);
  cfg.lo = LocalOscillator(0.01);
  cfg.noise = DetectorNoiseModel(0.5, 0.5, 0.0);
  cfg.n_samples = 400'000;
  cfg.seed = 61;
  const TracePair dim = sample_trace_pair(cfg);
  const double snl = 1e-4;  // 4 a^2 / 4
  const double expected = 10.0 * std::log10((4.0 * 1e-4 * 0.171 + 0.5) / snl);
  CHECK(squeezing_from_subtraction(dim, snl) > 30.0);
  CHECK(close_abs(squeezing_from_subtraction(dim, snl), expected, 0.2));
}

TEST_CASE("squeezing from the covariance method inverts the covariance relation") {
  // two-sample traces with exact sample covariance 2*a*b
  const TracePair zero = make_trace({0.5, -0.5}, {0.0, 0.0});
  CHECK(squeezing_from_covariance(zero, 1.0) == 0.0);

  const TracePair squeezed = make_trace({0.5, -0.5}, {0.079, -0.079});
  CHECK(close_abs(squeezing_from_covariance(squeezed, 1.0), -1.65, 0.01));

  const TracePair excess = make_trace({0.5, -0.5}, {-0.54, 0.54});
  CHECK(close_abs(squeezing_from_covariance(excess, 1.0), 5.0, 0.01));

  // generalized inversion for a non-shot-limited LO reduces correctly
  CHECK(squeezing_from_covariance(zero, 1.0, 0.5) == doctest::Approx(10.0 * std::log10(2.0)));

  const TracePair too_big = make_trace({0.5, -0.5}, {0.5, -0.5});
  CHECK_THROWS_AS(squeezing_from_covariance(too_big, 1.0), CovarianceOutOfRange);
  try {
    squeezing_from_covariance(too_big, 1.0);
  } catch (const CovarianceOutOfRange& e) {
    CHECK(e.covariance == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK_THROWS_AS(squeezing_from_covariance(zero, -1.0), std::domain_error);
}

TEST_CASE("state classification by covariance sign") {
  CHECK(classify_state({0.079, 0.001, 1'000'000}).verdict == Verdict::Squeezed);
  CHECK(classify_state({0.079, 0.001, 1'000'000}).z_score == doctest::Approx(79.0));
  CHECK(classify_state({0.0005, 0.001, 1'000'000}).verdict == Verdict::CoherentConsistent);
  CHECK(classify_state({-0.54, 0.002, 1'000'000}).verdict == Verdict::ExcessNoise);

  CHECK(classify_state({0.0, 0.0, 100}).verdict == Verdict::CoherentConsistent);
  const StateVerdict exact = classify_state({0.5, 0.0, 100});
  CHECK(exact.verdict == Verdict::Squeezed);
  CHECK(std::isinf(exact.z_score));
  CHECK(classify_state({-0.5, 0.0, 100}).verdict == Verdict::ExcessNoise);

  CHECK(classify_state({0.5, 0.1, 1}).verdict == Verdict::Inconclusive);
  CHECK_THROWS_AS(classify_state({0.0, 1.0, 100}, 0.0), std::domain_error);

  // custom threshold
  CHECK(classify_state({0.002, 0.001, 1000}, 1.0).verdict == Verdict::Squeezed);
}

TEST_CASE("electronic noise does not move the covariance") {
  // lighter in-suite version of the rejection property
  const std::array<double, 3> sigmas = {0.0, 1.0, 10.0};
  std::array<EstimateWithError, 3> cov;
  std::array<EstimateWithError, 3> diff;
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    const TracePair trace = squeezed_trace(500'000, sigmas[i], 0.0, 100 + i);
    cov[i] = covariance(trace);
    diff[i] = difference_variance(trace);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) {
      const double se = std::hypot(cov[i].std_error, cov[j].std_error);
      CHECK(close_abs(cov[i].value, cov[j].value, 4.0 * se));
    }
  }
  for (std::size_t i = 1; i < 3; ++i) {
    const double added = 2.0 * sigmas[i] * sigmas[i];
    const double se = std::hypot(diff[i].std_error, diff[0].std_error);
    CHECK(close_abs(diff[i].value - diff[0].value, added, 4.0 * se));
  }
}
