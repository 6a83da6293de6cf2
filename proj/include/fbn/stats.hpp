#pragma once

#include <fbn/random.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fbn
{

/*! \brief Kendall tau as an exact ratio (P - Q) / (P + Q). */
struct tau_value
{
  std::int64_t concordant = 0;
  std::int64_t discordant = 0;

  std::int64_t numerator() const noexcept { return concordant - discordant; }
  std::int64_t denominator() const noexcept { return concordant + discordant; }
  double ratio() const noexcept
  {
    return static_cast<double>( numerator() ) / static_cast<double>( denominator() );
  }
};

/*! \brief Rank agreement of two orderings of the same m >= 2 items. */
tau_value kendall_tau( std::span<std::size_t const> a, std::span<std::size_t const> b );

std::size_t inversion_count( std::span<std::size_t const> perm );

/*! \brief Mahonian numbers: entry q counts permutations of m items with q inversions. Requires m <= 33. */
std::vector<unsigned __int128> mahonian_row( std::size_t m );

/*! \brief Tau values reachable by m-element permutations, from -1 to +1 (q = C(m,2) .. 0 inversions). */
std::vector<double> achievable_taus( std::size_t m );

/*! \brief Inversion count q with tau(identity, p) == tau for q inversions; throws argument_error if unreachable. */
std::size_t inversions_for_tau( std::size_t m, double tau );

/*! \brief Uniform permutation among those with exactly `q` inversions relative to the identity. */
std::vector<std::size_t> sample_permutation_with_inversions( std::size_t m, std::size_t q, rng_type& rng );

std::vector<std::size_t> sample_permutation_with_tau( std::size_t m, double tau, std::uint64_t seed );

struct mean_interval
{
  double mean = 0.0;
  double half_width = 0.0;
};

/*! \brief Sample mean with a Student-t confidence half-width; needs at least two values. */
mean_interval mean_ci( std::span<double const> values, double level = 0.95 );

/*! \brief Two-sided p-value of the one-sample t-test of mean zero (paired differences). */
double paired_t_pvalue( std::span<double const> differences );

} // namespace fbn
