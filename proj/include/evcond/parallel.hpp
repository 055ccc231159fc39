#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace evcond {

/// Worker cap: EVCOND_THREADS when set (>= 1), otherwise the hardware
/// concurrency.
int worker_count();

/// Runs body(begin, end) over a static block partition of [0, n).
/// Results must not depend on the partition: workers write to disjoint
/// slots and any reduction happens afterwards in a fixed order.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

/// Pairwise summation with a fixed topology; the result depends only on
/// the values, never on how many workers produced them.
double pairwise_sum(std::span<const double> values);

}  // namespace evcond
