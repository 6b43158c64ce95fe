#ifndef EMST_PARALLEL_HPP
#define EMST_PARALLEL_HPP

#include <atomic>
#include <bit>
#include <cstddef>
#include <cstdint>

#include <omp.h>

namespace emst
{

/// Where parallel phases run. `threads == 0` means every available thread.
struct Executor
{
  int threads = 0;

  int concurrency() const noexcept
  {
    return threads > 0 ? threads : omp_get_max_threads();
  }
};

/// Static-schedule loop over [0, n). The body must only write to state owned
/// by its index or to atomics.
template <typename Body>
void parallel_for(Executor const &exec, std::size_t n, Body &&body)
{
  auto const count = static_cast<std::int64_t>(n);
#pragma omp parallel for num_threads(exec.concurrency()) schedule(static)
  for (std::int64_t i = 0; i < count; ++i)
    body(static_cast<std::size_t>(i));
}

/// Dynamic-schedule loop for irregular work (tree traversals).
template <typename Body>
void parallel_for_dynamic(Executor const &exec, std::size_t n, Body &&body)
{
  auto const count = static_cast<std::int64_t>(n);
#pragma omp parallel for num_threads(exec.concurrency()) schedule(dynamic, 256)
  for (std::int64_t i = 0; i < count; ++i)
    body(static_cast<std::size_t>(i));
}

/// Dynamic-schedule loop whose body returns a count; the counts are summed.
/// Integer addition is associative, so the total is schedule independent.
template <typename Body>
std::uint64_t parallel_count(Executor const &exec, std::size_t n, Body &&body)
{
  auto const count = static_cast<std::int64_t>(n);
  std::uint64_t total = 0;
#pragma omp parallel for num_threads(exec.concurrency()) schedule(dynamic, 256) reduction(+ : total)
  for (std::int64_t i = 0; i < count; ++i)
    total += body(static_cast<std::size_t>(i));
  return total;
}

namespace detail
{

inline void atomic_min(std::uint64_t &target, std::uint64_t value) noexcept
{
  std::atomic_ref<std::uint64_t> ref(target);
  auto current = ref.load(std::memory_order_relaxed);
  while (value < current &&
         !ref.compare_exchange_weak(current, value, std::memory_order_relaxed))
  {
  }
}

// Non-negative IEEE doubles order the same way as their bit patterns.
inline std::uint64_t ordered_bits(double nonnegative) noexcept
{
  return std::bit_cast<std::uint64_t>(nonnegative);
}

inline double from_ordered_bits(std::uint64_t bits) noexcept
{
  return std::bit_cast<double>(bits);
}

} // namespace detail

} // namespace emst

#endif
