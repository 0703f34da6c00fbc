// Copyright 2026 the compsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.

#include <algorithm>
#include <cmath>
#include <vector>

#include "compsim/rng.hpp"
#include "compsim/traffic.hpp"
#include "compsim/types.hpp"
#include "doctest.h"

using namespace compsim;

TEST_SUITE("traffic") {

TEST_CASE("zero rate produces no arrivals") {
  TrafficModel m({0.0, 4000000}, 1e-3);
  RngStream rng(1);
  for (int t = 0; t < 1000; ++t) CHECK(m.arrivals(rng).empty());
}

TEST_CASE("arrival counts are Poisson with the configured mean") {
  const double lambda = 40.0;
  TrafficModel m({lambda, 4000000}, 1e-3);
  RngStream rng(2);
  const int n_tti = 200000;
  long total = 0;
  long zero_ttis = 0;
  for (int t = 0; t < n_tti; ++t) {
    const auto a = m.arrivals(rng);
    total += static_cast<long>(a.size());
    if (a.empty()) ++zero_ttis;
  }
  const double mean_per_tti = lambda * 1e-3;
  const double expect = n_tti * mean_per_tti;
  // Poisson: variance equals the mean.
  CHECK(std::abs(total - expect) < 3.0 * std::sqrt(expect));
  // P(no arrival in a TTI) = exp(-mean).
  const double p0 = std::exp(-mean_per_tti);
  CHECK(std::abs(zero_ttis - n_tti * p0) < 3.0 * std::sqrt(n_tti * p0 * (1.0 - p0)));
}

TEST_CASE("sub-TTI offsets are sorted and in the unit interval") {
  TrafficModel m({5000.0, 4000000}, 1e-3);
  RngStream rng(3);
  bool saw_multi = false;
  for (int t = 0; t < 2000; ++t) {
    const auto a = m.arrivals(rng);
    if (a.size() > 1) saw_multi = true;
    CHECK(std::is_sorted(a.begin(), a.end()));
    for (double o : a) {
      CHECK(o >= 0.0);
      CHECK(o < 1.0);
    }
  }
  CHECK(saw_multi);
}

TEST_CASE("arrivals replay deterministically") {
  TrafficModel m({120.0, 4000000}, 1e-3);
  RngStream a(4), b(4);
  for (int t = 0; t < 500; ++t) {
    const auto xa = m.arrivals(a);
    const auto xb = m.arrivals(b);
    REQUIRE(xa.size() == xb.size());
    for (std::size_t i = 0; i < xa.size(); ++i) CHECK(xa[i] == xb[i]);
  }
}

TEST_CASE("absolute arrival times form an exponential renewal process") {
  // Kolmogorov-Smirnov against Exp(lambda) on inter-arrival gaps assembled
  // from per-TTI counts plus sub-TTI offsets.
  const double lambda = 200.0;
  const double tti_s = 1e-3;
  TrafficModel m({lambda, 4000000}, tti_s);
  RngStream rng(5);
  std::vector<double> times;
  int t = 0;
  while (times.size() < 4000) {
    for (double o : m.arrivals(rng)) times.push_back((t + o) * tti_s);
    ++t;
  }
  std::vector<double> gaps;
  for (std::size_t i = 1; i < times.size(); ++i) gaps.push_back(times[i] - times[i - 1]);
  std::sort(gaps.begin(), gaps.end());
  double d = 0.0;
  const double n = static_cast<double>(gaps.size());
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const double cdf = 1.0 - std::exp(-lambda * gaps[i]);
    d = std::max(d, std::abs(cdf - (i + 1) / n));
    d = std::max(d, std::abs(cdf - i / n));
  }
  // 1% critical value of the KS statistic.
  CHECK(d < 1.628 / std::sqrt(n));
}

TEST_CASE("deliveries consume exactly what fits") {
  FileTransfer f;
  f.ue_id = 7;
  f.size_bits = 1000;
  f.remaining_bits = 1000;
  f.arrival_tti = 10;

  CHECK(record_delivery(f, 400, 11) == 400);
  CHECK(f.remaining_bits == 600);
  CHECK_FALSE(f.complete());
  CHECK(f.completion_tti == -1);

  CHECK(record_delivery(f, 0, 12) == 0);
  CHECK(f.remaining_bits == 600);

  // Clipped at the remainder; completion stamped at this TTI.
  CHECK(record_delivery(f, 10000, 13) == 600);
  CHECK(f.complete());
  CHECK(f.completion_tti == 13);

  CHECK_THROWS_AS(record_delivery(f, 1, 14), RunError);
}

TEST_CASE("delivered totals are conserved") {
  RngStream rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    FileTransfer f;
    f.size_bits = 4000000;
    f.remaining_bits = f.size_bits;
    std::uint64_t consumed = 0;
    std::int64_t tti = 0;
    while (!f.complete()) {
      consumed += record_delivery(f, static_cast<std::uint64_t>(rng.uniform(0.0, 9e5)), tti++);
    }
    CHECK(consumed == f.size_bits);
  }
}

TEST_CASE("throughput counts inclusive TTIs") {
  // 4 Mbit over TTIs 100..199 inclusive at 1 ms each: 40 Mbit/s.
  FileTransfer f;
  f.size_bits = 4000000;
  f.remaining_bits = 0;
  f.arrival_tti = 100;
  f.completion_tti = 199;
  CHECK(upt_bps(f, 1e-3) == doctest::Approx(4.0e7));

  // Same-TTI completion counts one full TTI.
  f.arrival_tti = 42;
  f.completion_tti = 42;
  CHECK(upt_bps(f, 1e-3) == doctest::Approx(4.0e9));
}

TEST_CASE("throughput of an incomplete transfer is rejected") {
  FileTransfer f;
  f.size_bits = 1000;
  f.remaining_bits = 1;
  f.arrival_tti = 0;
  CHECK_THROWS_AS(upt_bps(f, 1e-3), RunError);
}

}  // TEST_SUITE
