#pragma once

#include <span>
#include <vector>

namespace recex {

// Numerically stable logistic function; saturates cleanly at the extremes.
double sigmoid(double x);

// log(sigmoid(x)) without intermediate overflow/underflow.
double log_sigmoid(double x);

// Shift-invariant softmax. Throws DataError on empty input.
std::vector<double> softmax(std::span<const double> v);

// In-place variant writing into out (same length as v).
void softmax_into(std::span<const double> v, std::span<double> out);

// log-softmax, same stability scheme.
void log_softmax_into(std::span<const double> v, std::span<double> out);

// Population mean / standard deviation, two-pass.
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd population_mean_std(std::span<const double> xs);

}  // namespace recex
