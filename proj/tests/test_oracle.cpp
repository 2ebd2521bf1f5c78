#include <cmath>
#include <set>

#include "cwbc/oracle.hpp"
#include "cwbc/csv.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cwbc;

TEST_CASE("reference probabilities agree with a tiny hand computation") {
    // Two bins, lambda 0, kappa 1, r_star equal to the top bin mean: weights
    // are exp(-1) and 1.
    const std::vector<double> probs =
        oracle::reference_bin_probabilities({0.5, 0.5}, {3.0, 4.0}, 0.0, 1.0, 4.0);
    REQUIRE(probs.size() == 2);
    const double w0 = std::exp(-1.0);
    CHECK(probs[0] == doctest::Approx(w0 / (w0 + 1.0)).epsilon(1e-15));
    CHECK(probs[1] == doctest::Approx(1.0 / (w0 + 1.0)).epsilon(1e-15));
}

TEST_CASE("central differences recover a known quadratic gradient") {
    // f(x, y) = 3x^2 + xy; df/dx = 6x + y, df/dy = x.
    auto fn = [](const std::vector<double>& v) { return 3.0 * v[0] * v[0] + v[0] * v[1]; };
    const std::vector<double> g = oracle::central_difference_gradient(fn, {2.0, -1.0}, 1e-5);
    REQUIRE(g.size() == 2);
    CHECK(g[0] == doctest::Approx(11.0).epsilon(1e-8));
    CHECK(g[1] == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("sampler total variation is near zero for a uniform layout") {
    BinLayout layout = uniform_layout(10);
    Rng rng(7);
    CHECK(oracle::sampler_total_variation(layout, 50000, rng) < 0.01);
}

TEST_CASE("noise moments match the uniform law on its support") {
    const NoiseBounds bounds = noise_bounds(90.0, 100.0, 10.0);
    Rng rng(11);
    const oracle::SampleMoments m = oracle::noise_sample_moments(bounds, 200000, rng);
    CHECK(m.count == 200000);
    CHECK(m.min >= bounds.lower);
    CHECK(m.max <= bounds.upper);
    CHECK(m.mean == doctest::Approx(0.5 * (bounds.lower + bounds.upper)).epsilon(0.01));
    CHECK(m.stddev == doctest::Approx(10.0).epsilon(0.02));
}

TEST_CASE("the standing audit battery passes end to end") {
    const std::vector<oracle::Report> reports = oracle::run_verification(123);
    REQUIRE_FALSE(reports.empty());

    const std::set<std::string> expected = {
        "bin-probs-dual-path", "fd-probe-quadratic", "objective-grad-fd",
        "sampler-tv",          "noise-support",      "noise-std",
        "noise-mean"};
    std::set<std::string> seen;
    for (const auto& r : reports) {
        seen.insert(r.check);
        INFO(r.check, ": measured ", r.measured, " bound ", r.bound);
        CHECK(r.pass);
        CHECK(r.measured <= r.bound);
        CHECK_FALSE(r.detail.empty());
    }
    CHECK(seen == expected);

    // A different seed still passes (the bounds are not tuned to one draw).
    for (const auto& r : oracle::run_verification(321)) CHECK(r.pass);
}

TEST_CASE("audit reports serialize to csv") {
    std::vector<oracle::Report> reports;
    reports.push_back({"alpha-check", "small fixture", 0.125, 0.5, true});
    reports.push_back({"beta-check", "other fixture", 2.0, 1.0, false});

    const std::string path = testutil::tmp_path("oracle") + ".csv";
    oracle::write_reports_csv(reports, path);
    const auto rows = read_csv(path);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"check", "detail", "measured", "bound", "pass"});
    CHECK(rows[1] == std::vector<std::string>{"alpha-check", "small fixture", "0.125", "0.5", "1"});
    CHECK(rows[2] == std::vector<std::string>{"beta-check", "other fixture", "2", "1", "0"});
}
