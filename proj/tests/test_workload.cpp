#include <doctest.h>

#include <cmath>
#include <sstream>

#include "slab/errors.hpp"
#include "slab/simulator.hpp"
#include "slab/workload.hpp"

using namespace slab;

TEST_CASE("parameter validation") {
  WorkloadParams p = reference_params();
  CHECK_NOTHROW(p.validate());
  p.beta = 1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = reference_params();
  p.alpha = 0.9;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = reference_params();
  p.k_max = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = reference_params();
  p.b_max = 5.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("job demand") {
  CHECK(job_demand(JobSpec{0, 0.0, 1, 10.0, 1.0}) == 10.0);
  CHECK(job_demand(JobSpec{0, 0.0, 10, 25.0, 1.0}) == 250.0);
  CHECK(job_demand(JobSpec{0, 0.0, 3, 10.0, 1.0}) == 30.0);
}

TEST_CASE("offered load inversion") {
  const WorkloadParams p = reference_params();
  CHECK(baseline_cost_mean(p) == doctest::Approx(3.41417 * 15 * 1.5).epsilon(1e-5));
  const double lam = lambda_for_offered_load(0.6, p);
  CHECK(lam == doctest::Approx(0.6 * 200 / (zipf_mean(ZipfDist(10)) * 15 * 1.5)).epsilon(1e-12));
  CHECK(lam == doctest::Approx(1.5617).epsilon(1e-3));
  WorkloadParams q = p;
  q.lambda = lam;
  CHECK(offered_load(q) == doctest::Approx(0.6));
  CHECK(lambda_for_offered_load(1e-9, p) < 1e-8);
  WorkloadParams big = p;
  big.num_nodes = 40;
  CHECK(lambda_for_offered_load(0.6, big) == doctest::Approx(2.0 * lam));
  CHECK_THROWS_AS(lambda_for_offered_load(1.0, p), DomainError);
  WorkloadParams heavy = p;
  heavy.beta = 1.0;
  CHECK_THROWS(lambda_for_offered_load(0.5, heavy));
}

TEST_CASE("generated workload statistics") {
  WorkloadParams p = reference_params();
  p.lambda = 1.0;
  RngStream rng(77);
  const auto jobs = generate_workload(p, 1'000'000, rng);
  REQUIRE(jobs.size() == 1'000'000);
  CHECK(jobs.front().arrival_time > 0.0);
  double prev = 0.0, gaps = 0.0, gaps2 = 0.0;
  std::vector<long> hist(11, 0);
  bool ordered = true, valid = true;
  for (const auto& j : jobs) {
    const double g = j.arrival_time - prev;
    ordered = ordered && g > 0.0;
    gaps += g;
    gaps2 += g * g;
    prev = j.arrival_time;
    valid = valid && j.k >= 1 && j.k <= 10 && j.b >= 10.0 && j.r_cap == 1.0;
    hist[static_cast<std::size_t>(j.k)]++;
  }
  CHECK(ordered);
  CHECK(valid);
  const double n = static_cast<double>(jobs.size());
  const double mean = gaps / n;
  const double se = std::sqrt((gaps2 / n - mean * mean) / n);
  CHECK(std::fabs(mean - 1.0) < 3.0 * se);

  // Chi-square against the Zipf pmf, 9 dof; p > 0.001 means chi2 < 27.88.
  const ZipfDist z(10);
  double chi2 = 0.0;
  for (int k = 1; k <= 10; ++k) {
    const double e = n * z.pmf(k);
    chi2 += (hist[static_cast<std::size_t>(k)] - e) * (hist[static_cast<std::size_t>(k)] - e) / e;
  }
  CHECK(chi2 < 27.88);

  // Demand tail decays polynomially. Beyond 1e3 a million jobs hold too few
  // samples for a slope estimate.
  auto tail = [&](double x) {
    long c = 0;
    for (const auto& j : jobs) c += job_demand(j) > x;
    return static_cast<double>(c) / n;
  };
  const double slope = (std::log(tail(1e3)) - std::log(tail(1e2))) / (std::log(1e3) - std::log(1e2));
  CHECK(slope < -1.5);
  CHECK(slope > -3.5);
}

TEST_CASE("workload determinism and csv round trip") {
  const WorkloadParams p = reference_params();
  RngStream a(5), b(5);
  const auto x = generate_workload(p, 1000, a);
  const auto y = generate_workload(p, 1000, b);
  bool same = true;
  for (std::size_t i = 0; i < x.size(); ++i) {
    same = same && x[i].arrival_time == y[i].arrival_time && x[i].k == y[i].k && x[i].b == y[i].b;
  }
  CHECK(same);

  std::stringstream ss;
  write_workload_csv(ss, x);
  const auto z = read_workload_csv(ss);
  REQUIRE(z.size() == x.size());
  bool exact = true;
  for (std::size_t i = 0; i < x.size(); ++i) {
    exact = exact && z[i].job_id == x[i].job_id && z[i].arrival_time == x[i].arrival_time &&
            z[i].k == x[i].k && z[i].b == x[i].b;
  }
  CHECK(exact);

  std::stringstream bad("job_id,arrival_time,k,b\n0,2.0,1,10\n1,1.0,1,10\n");
  CHECK_THROWS_AS(read_workload_csv(bad), ConfigError);
  std::stringstream bad_header("id,t,k,b\n");
  CHECK_THROWS_AS(read_workload_csv(bad_header), ConfigError);
}

TEST_CASE("baseline load closure in simulation") {
  for (double rho0 : {0.3, 0.6}) {
    WorkloadParams p = reference_params();
    p.lambda = lambda_for_offered_load(rho0, p);
    double util = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      RngStream rng = RngStream(seed).derive(1);
      const auto jobs = generate_workload(p, 55'000, rng);
      SimConfig cfg;
      cfg.num_jobs = 50'000;
      cfg.seed = seed;
      util += run_simulation(jobs, RedundantNone{}, p, cfg).utilization / 5.0;
    }
    CHECK(util == doctest::Approx(rho0).epsilon(0.02 / rho0));
  }
}
