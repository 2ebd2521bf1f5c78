#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cwbc/conservatism.hpp"
#include "cwbc/weighting.hpp"

namespace cwbc::oracle {

// Cross-checks implemented on purpose as separate arithmetic paths: they
// share no helpers with the code they audit.

// Bin sampling weights recomputed in extended precision with compensated
// summation and no rescaling tricks.
std::vector<double> reference_bin_probabilities(const std::vector<double>& frequency,
                                                const std::vector<double>& mean_return,
                                                double lambda, double kappa, double r_star);

// Central differences (f(x+h) - f(x-h)) / 2h per coordinate.
std::vector<double> central_difference_gradient(
    const std::function<double(const std::vector<double>&)>& fn, const std::vector<double>& at,
    double step);

// Total variation between empirical bin frequencies of the two-stage
// trajectory sampler and the layout's stated bin probabilities.
double sampler_total_variation(const BinLayout& layout, long draws, Rng& rng);

struct SampleMoments {
    double mean = 0.0;
    double stddev = 0.0;
    double min = 0.0;
    double max = 0.0;
    long count = 0;
};

// Streams draws from sample_noise and accumulates moments and the support
// envelope.
SampleMoments noise_sample_moments(const NoiseBounds& bounds, long draws, Rng& rng);

struct Report {
    std::string check;
    std::string detail;
    double measured = 0.0;
    double bound = 0.0;
    bool pass = false;
};

// The standing audit battery: dual-path probability agreement, derivative
// checks of the training objective, sampler law, noise law.
std::vector<Report> run_verification(std::uint64_t seed);

void write_reports_csv(const std::vector<Report>& reports, const std::string& path);

}  // namespace cwbc::oracle
