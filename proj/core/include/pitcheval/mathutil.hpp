#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pitcheval {

// Quantile of the standard normal distribution (Wichura's AS241 algorithm,
// accurate to ~1e-15 over (0, 1)).
double normal_quantile(double p);

double mean(std::span<const double> values);

// Population (divide-by-n) variance.
double population_variance(std::span<const double> values);

double weighted_mean(std::span<const double> values, std::span<const double> weights);

// Weighted population variance: sum w*(x-m)^2 / sum w.
double weighted_population_variance(std::span<const double> values,
                                    std::span<const double> weights);

// Kish effective sample size: (sum w)^2 / sum w^2.
double effective_sample_size(std::span<const double> weights);

}  // namespace pitcheval
