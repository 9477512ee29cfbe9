#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "spdc/config.hpp"
#include "spdc/correlation.hpp"
#include "spdc/errors.hpp"
#include "spdc/montecarlo.hpp"
#include "spdc/rng.hpp"
#include "spdc/scenario.hpp"
#include "spdc/spectral.hpp"

using namespace spdc;

namespace {

ErrorCategory category_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.category();
  }
  FAIL("expected an Error");
  return ErrorCategory::internal;
}

// Delay density shared by every simulation in this file: the analytic
// correlation of the default source on the same grid the scenarios use.
const DelaySampler& shared_sampler() {
  static const DelaySampler sampler = [] {
    const auto cfg = built_in_preset("power_sweep");
    const auto corr = make_correlation_config(cfg, make_joint_spectrum(cfg));
    return DelaySampler(to_pdf(analytic_g2(corr, make_grid(-2e-6, 2e-6, 20e-12))));
  }();
  return sampler;
}

SimulationConfig default_sim(double power_mw) {
  const auto cfg = built_in_preset("power_sweep");
  return make_simulation_config(cfg, make_joint_spectrum(cfg), power_mw);
}

std::vector<std::int64_t> merged_unique(const std::vector<std::int64_t>& a,
                                        const std::vector<std::int64_t>& b) {
  std::vector<std::int64_t> out = a;
  out.insert(out.end(), b.begin(), b.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

TEST_CASE("delay sampler matches its density") {
  // single-mode double exponential: the left/right mass split is known
  const double gs = 2.9e6;
  const double gi = 1.7e6;
  const auto pdf = to_pdf(single_mode_g2(gs, gi, make_grid(-2e-6, 2e-6, 20e-12)));
  const DelaySampler sampler(pdf);

  CHECK(sampler.cdf(-2e-6) == 0.0);
  CHECK(sampler.cdf(2e-6) == 1.0);
  CHECK(sampler.cdf(-3e-6) == 0.0);  // clamps outside the grid
  CHECK(sampler.cdf(3e-6) == 1.0);
  CHECK(sampler.cdf(0.0) == doctest::Approx(gs / (gs + gi)).epsilon(1e-4));

  double prev = -1.0;
  for (int k = 0; k <= 400; ++k) {
    const double c = sampler.cdf(-2e-6 + k * 1e-8);
    CHECK(c >= prev);
    prev = c;
  }

  // Kolmogorov-Smirnov distance of a frozen sample against the exact CDF.
  Rng rng(555);
  const std::size_t n = 200000;
  std::vector<double> draws(n);
  for (auto& d : draws) {
    d = sampler.sample(rng);
    REQUIRE(d >= -2e-6);
    REQUIRE(d <= 2e-6);
  }
  std::sort(draws.begin(), draws.end());
  double ks = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double c = sampler.cdf(draws[k]);
    ks = std::max(ks, std::fabs(c - static_cast<double>(k) / n));
    ks = std::max(ks, std::fabs(static_cast<double>(k + 1) / n - c));
  }
  CHECK(ks < 0.004);
}

TEST_CASE("streams are a pure function of the seed") {
  const auto sim = default_sim(1.0);
  const auto a = simulate_stream(sim, shared_sampler(), 2.0, 42);
  const auto b = simulate_stream(sim, shared_sampler(), 2.0, 42);
  CHECK(a.signal.tags_ps == b.signal.tags_ps);
  CHECK(a.idler.tags_ps == b.idler.tags_ps);
  CHECK(a.generated_pairs == b.generated_pairs);
  CHECK(a.recorded_pairs == b.recorded_pairs);

  const auto c = simulate_stream(sim, shared_sampler(), 2.0, 43);
  CHECK(a.signal.tags_ps != c.signal.tags_ps);
  CHECK(a.idler.tags_ps != c.idler.tags_ps);
}

TEST_CASE("chunked simulation composes to the full run") {
  auto sim = default_sim(1.0);
  sim.gate.duty = 1.0;  // keep wall time equal to measurement time

  const std::uint64_t seed = 7;
  const auto full = simulate_stream(sim, shared_sampler(), 5.0, seed);
  const auto head = simulate_chunks(sim, shared_sampler(), 0, 2, 5.0, seed);
  const auto tail = simulate_chunks(sim, shared_sampler(), 2, 3, 5.0, seed);

  CHECK(merged_unique(head.signal.tags_ps, tail.signal.tags_ps) == full.signal.tags_ps);
  CHECK(merged_unique(head.idler.tags_ps, tail.idler.tags_ps) == full.idler.tags_ps);
  CHECK(head.generated_pairs + tail.generated_pairs == full.generated_pairs);
  CHECK(head.recorded_pairs + tail.recorded_pairs == full.recorded_pairs);
  // chunk calls describe the same underlying run
  CHECK(head.measurement_time_s == full.measurement_time_s);
  CHECK(tail.measurement_time_s == full.measurement_time_s);

  // Chunk content depends only on (seed, chunk index): a shorter run is the
  // long run's first chunks with the recording window cut at its own end.
  const auto prefix = simulate_stream(sim, shared_sampler(), 2.0, seed);
  auto cut = [](std::vector<std::int64_t> tags) {
    tags.erase(std::remove_if(tags.begin(), tags.end(),
                              [](std::int64_t t) { return t >= 2'000'000'000'000; }),
               tags.end());
    return tags;
  };
  CHECK(prefix.signal.tags_ps == cut(head.signal.tags_ps));
  CHECK(prefix.idler.tags_ps == cut(head.idler.tags_ps));
}

TEST_CASE("recorded rates close against the configured chains") {
  const auto sim = default_sim(1.0);
  const auto res = simulate_stream(sim, shared_sampler(), 60.0, 4242);

  CHECK(res.measurement_time_s == 60.0);
  CHECK(res.wall_time_s == doctest::Approx(60.0 / 0.55).epsilon(1e-3));

  // expected singles per measurement second: pairs through each chain plus
  // darks plus pump-proportional background
  const double s_expect = sim.source.pair_rate_hz() * sim.signal.efficiency() +
                          sim.signal.dark_count_rate_hz +
                          sim.signal.background_rate_per_mw_hz * sim.source.pump_power_mw;
  const double i_expect = sim.source.pair_rate_hz() * sim.idler.efficiency() +
                          sim.idler.dark_count_rate_hz +
                          sim.idler.background_rate_per_mw_hz * sim.source.pump_power_mw;
  const double s_rate = static_cast<double>(res.signal.tags_ps.size()) / 60.0;
  const double i_rate = static_cast<double>(res.idler.tags_ps.size()) / 60.0;
  CHECK(s_rate == doctest::Approx(s_expect).epsilon(0.02));
  CHECK(i_rate == doctest::Approx(i_expect).epsilon(0.02));

  CHECK(static_cast<double>(res.generated_pairs) ==
        doctest::Approx(sim.source.pair_rate_hz() * 60.0).epsilon(0.01));
  const double pair_eff = sim.signal.efficiency() * sim.idler.efficiency();
  CHECK(static_cast<double>(res.recorded_pairs) / static_cast<double>(res.generated_pairs) ==
        doctest::Approx(pair_eff).epsilon(0.10));

  // gate windows: 5.5 ms open every 10 ms, exact in integer picoseconds
  for (const auto* stream : {&res.signal, &res.idler}) {
    REQUIRE(!stream->tags_ps.empty());
    for (const std::int64_t t : stream->tags_ps) {
      REQUIRE(t >= 0);
      REQUIRE(t % 10'000'000'000 < 5'500'000'000);
    }
    CHECK(static_cast<std::uint64_t>(stream->tags_ps.back()) < stream->duration_ps);
  }
}

TEST_CASE("extra transmission thins only its own channel") {
  auto base = default_sim(1.0);
  base.gate.duty = 1.0;
  base.signal.dark_count_rate_hz = 0.0;
  base.signal.background_rate_per_mw_hz = 0.0;
  base.idler.dark_count_rate_hz = 0.0;
  base.idler.background_rate_per_mw_hz = 0.0;

  auto thinned = base;
  thinned.signal.extra_transmission = 0.5;

  const auto a = simulate_stream(base, shared_sampler(), 20.0, 99);
  const auto b = simulate_stream(thinned, shared_sampler(), 20.0, 99);

  // identical draw order: the idler stream is untouched bit for bit
  CHECK(a.idler.tags_ps == b.idler.tags_ps);
  const double ratio = static_cast<double>(b.signal.tags_ps.size()) /
                       static_cast<double>(a.signal.tags_ps.size());
  CHECK(ratio == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("configuration and density guards") {
  auto sim = default_sim(1.0);
  sim.gate.duty = 0.0;
  CHECK(category_of([&] { sim.validate(); }) == ErrorCategory::validation);
  sim.gate.duty = 1.2;
  CHECK(category_of([&] { sim.validate(); }) == ErrorCategory::validation);

  auto bad_rate = default_sim(1.0);
  bad_rate.source.pair_rate_per_mw_hz = -5.0;
  CHECK(category_of([&] { bad_rate.validate(); }) == ErrorCategory::validation);

  const auto ok = default_sim(1.0);
  CHECK(category_of([&] {
          simulate_stream(ok, shared_sampler(), -1.0, 1);
        }) == ErrorCategory::validation);

  // sampler rejects a trace that is not a unit-area density
  CorrelationTrace not_pdf;
  not_pdf.grid = make_grid(-1e-9, 1e-9, 0.5e-9);
  not_pdf.values.assign(not_pdf.grid.count, 2.0);
  CHECK(category_of([&] { DelaySampler s(not_pdf); }) == ErrorCategory::domain);
}
