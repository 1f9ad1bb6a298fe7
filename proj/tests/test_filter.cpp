#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "ionwave/constants.hpp"
#include "ionwave/errors.hpp"
#include "ionwave/filter.hpp"

using namespace ionwave;

TEST_SUITE("filter") {

TEST_CASE("butterworth magnitude matches the maximally flat closed form") {
  for (int n : {1, 2, 3, 5}) {
    const double w0 = kTwoPi * 160e3;
    const FilterSpec f = FilterSpec::butterworth(n, w0);
    CHECK(f.magnitude(0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.magnitude(w0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    for (double r : {0.3, 2.0, 7.5}) {
      const double expect = 1.0 / std::sqrt(1.0 + std::pow(r, 2 * n));
      CHECK(f.magnitude(r * w0) == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("order-3 gain at 8 w0 is 1/512 within 0.2%") {
  const FilterSpec f = FilterSpec::butterworth(3, kTwoPi * 1e5);
  CHECK(f.magnitude(8.0 * kTwoPi * 1e5) ==
        doctest::Approx(1.0 / 512.0).epsilon(2e-3));
}

TEST_CASE("butterworth magnitude is monotone non-increasing") {
  const FilterSpec f = FilterSpec::butterworth(3, kTwoPi * 2e5);
  double prev = f.magnitude(0.0);
  for (int i = 1; i <= 300; ++i) {
    const double m = f.magnitude(i * kTwoPi * 1e4);
    CHECK(m <= prev + 1e-15);
    prev = m;
  }
}

TEST_CASE("order 3 rolls off faster than order 1 beyond the corner") {
  const double w0 = kTwoPi * 160e3;
  const FilterSpec f1 = FilterSpec::butterworth(1, w0);
  const FilterSpec f3 = FilterSpec::butterworth(3, w0);
  for (double r = 1.05; r < 100.0; r *= 1.5)
    CHECK(f3.magnitude(r * w0) <= f1.magnitude(r * w0));
}

TEST_CASE("loaded rc pair differs from two independent sections") {
  const FilterSpec rc = FilterSpec::defaultRcPair();
  CHECK(rc.magnitude(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  const double w0 = kTwoPi * 160e3;
  // unloaded approximation: product of two first-order responses
  const double unloaded = 1.0 / (1.0 + std::pow(w0 / w0, 2));
  const double loaded = rc.magnitude(w0);
  CHECK(loaded < unloaded);  // loading lowers the corner
  // far above the corner both fall as 1/w^2: ratio approaches a constant
  const double hi = rc.magnitude(100 * w0) / rc.magnitude(200 * w0);
  CHECK(hi == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("default butterworth beats the rc pair by 22 dB at 3.6 MHz") {
  const FilterSpec rc = FilterSpec::defaultRcPair();
  const FilterSpec bw = FilterSpec::defaultButterworth();
  const double w = kTwoPi * 3.6e6;
  const double gain_db =
      20.0 * std::log10(rc.magnitude(w) / bw.magnitude(w));
  CHECK(gain_db == doctest::Approx(22.0).epsilon(1e-6));
}

TEST_CASE("first-order rc step response reaches 1 - 1/e at one time constant") {
  const double rate = 50e6;
  const double w0 = kTwoPi * 160e3;
  const double r = 1e3, c = 1.0 / (w0 * r);
  const FilterSpec spec = FilterSpec::rcCascade({{r, c}});
  DiscreteFilter f(spec, rate);
  f.warmStart(0.0);
  const int n_tau = static_cast<int>(std::round(rate / w0));
  double y = 0.0;
  for (int i = 0; i <= n_tau; ++i) y = f.step(1.0);
  CHECK(y == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(0.01));
}

TEST_CASE("constant series passes unchanged after a warm start") {
  DiscreteFilter f(FilterSpec::defaultButterworth(), 480e3);
  const std::vector<double> series(100, 3.25);
  const auto out = f.apply(series);
  for (double v : out) CHECK(v == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("step input settles to the final value within 5 time constants") {
  const FilterSpec spec = FilterSpec::defaultRcPair();
  const double rate = 20e6;
  DiscreteFilter f(spec, rate);
  f.warmStart(0.0);
  const double tau = 1.0 / spec.cornerRadS();
  const int n = static_cast<int>(5.0 * tau * rate);
  double y = 0.0;
  for (int i = 0; i < n; ++i) y = f.step(1.0);
  CHECK(y > 0.95);
}

TEST_CASE("sinusoid at the corner comes out at 1/sqrt(2) amplitude") {
  const double w0 = kTwoPi * 160e3;
  const FilterSpec spec = FilterSpec::butterworth(3, w0);
  const double rate = 40e6;
  DiscreteFilter f(spec, rate);
  f.warmStart(0.0);
  double peak = 0.0;
  const int n = static_cast<int>(30.0 * rate / (w0 / kTwoPi));
  for (int i = 0; i < n; ++i) {
    const double y = f.step(std::sin(w0 * i / rate));
    if (i > n / 2) peak = std::max(peak, std::abs(y));
  }
  CHECK(peak == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.02));
}

TEST_CASE("apply is linear and time invariant") {
  const FilterSpec spec = FilterSpec::defaultButterworth();
  std::mt19937 rng(77);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> u1(400), u2(400), mix(400);
  for (int i = 0; i < 400; ++i) {
    u1[i] = g(rng);
    u2[i] = g(rng);
    mix[i] = 2.0 * u1[i] - 0.5 * u2[i];
  }
  DiscreteFilter f(spec, 480e3);
  const auto y1 = f.apply(u1, false);
  const auto y2 = f.apply(u2, false);
  const auto ym = f.apply(mix, false);
  for (int i = 0; i < 400; ++i)
    CHECK(ym[i] == doctest::Approx(2.0 * y1[i] - 0.5 * y2[i]).epsilon(1e-9));
  // time invariance: delayed input gives delayed output
  std::vector<double> u1d(400, 0.0);
  for (int i = 7; i < 400; ++i) u1d[i] = u1[i - 7];
  const auto y1d = f.apply(u1d, false);
  for (int i = 7; i < 400; ++i)
    CHECK(y1d[i] == doctest::Approx(y1[i - 7]).epsilon(1e-9));
}

TEST_CASE("white noise loses energy through the low-pass") {
  const FilterSpec spec = FilterSpec::defaultRcPair();
  std::mt19937 rng(123);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> u(20000);
  for (auto& v : u) v = g(rng);
  DiscreteFilter f(spec, 480e3);
  const auto y = f.apply(u, false);
  double eu = 0, ey = 0;
  for (int i = 0; i < 20000; ++i) {
    eu += u[i] * u[i];
    ey += y[i] * y[i];
  }
  CHECK(ey < eu);
}

TEST_CASE("filter spec files round trip") {
  namespace fs = std::filesystem;
  const auto p = fs::temp_directory_path() / "iw_filter.txt";
  for (const FilterSpec& spec :
       {FilterSpec::defaultRcPair(), FilterSpec::defaultButterworth(),
        FilterSpec::rational({1.0}, {1.0, 1e-6})}) {
    spec.save(p.string());
    const FilterSpec r = FilterSpec::load(p.string());
    CHECK(r.kind == spec.kind);
    for (double w : {0.0, 1e5, 1e7})
      CHECK(r.magnitude(w) == doctest::Approx(spec.magnitude(w)).epsilon(1e-12));
  }
  fs::remove(p);
}

TEST_CASE("unstable rational filters are rejected") {
  CHECK_THROWS_AS(FilterSpec::rational({1.0}, {-1.0, 1e-6}), ConfigError);
  CHECK_THROWS_AS(FilterSpec::rational({1.0}, {1.0, -1e-6}), ConfigError);
}

TEST_CASE("sample rate below twice the corner is rejected") {
  CHECK_THROWS_AS(DiscreteFilter(FilterSpec::butterworth(3, kTwoPi * 300e3),
                                 100e3),
                  ConfigError);
}

TEST_CASE("frequency response csv has the documented schema") {
  namespace fs = std::filesystem;
  const auto p = fs::temp_directory_path() / "iw_resp.csv";
  writeFrequencyResponse(FilterSpec::defaultButterworth(), p.string(), 1e3,
                         1e7, 50);
  std::ifstream in(p);
  std::string header;
  std::getline(in, header);
  CHECK(header == "f_hz,mag,mag_db,phase_rad");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 50);
  fs::remove(p);
}

}  // TEST_SUITE
