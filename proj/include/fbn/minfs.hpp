#pragma once

#include <fbn/bitdata.hpp>
#include <fbn/loss.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace fbn
{

using feature_mask = std::uint64_t;
inline constexpr std::size_t max_cover_features = 64;

/*! \brief Set-cover form of a Minimum-Feature-Set instance.

  One mask per pair of examples with differing target values; feature `f` is
  set when the two input rows differ in column `f`. Masks are deduplicated and
  any mask that is a superset of another is dropped, since covering the
  smaller one covers it too.
*/
struct cover_instance
{
  std::size_t n_features = 0;
  std::vector<feature_mask> pair_masks; // sorted ascending
};

struct feature_set_result
{
  std::vector<std::size_t> features; // sorted
  std::size_t cardinality = 0;
  bool proven_optimal = false;
};

/*! Throws infeasible_error when two identical input rows carry different target values. */
cover_instance build_cover_instance( bit_matrix const& inputs, std::span<std::uint8_t const> target );
cover_instance build_cover_instance( bit_matrix const& inputs, bit_matrix const& targets, std::size_t target_column );

/*! \brief Removes duplicate masks and masks that strictly contain another mask. */
std::vector<feature_mask> reduce_masks( std::vector<feature_mask> masks, std::size_t n_features );

bool covers( feature_mask selection, std::span<feature_mask const> masks ) noexcept;

feature_set_result solve_minfs_greedy( cover_instance const& instance );

/*! \brief Exact minimum cover by iterative-deepening branch and bound.

  Deterministic: among optimal covers the first one found in the search order
  (lowest feature index first on equal branching scores) is returned.
*/
feature_set_result solve_minfs_exact( cover_instance const& instance );

/*! \brief Szymkiewicz-Simpson coefficient |a ∩ b| / min(|a|, |b|); 0 when either set is empty. */
double overlap_coefficient( std::span<std::size_t const> a, std::span<std::size_t const> b );

/*! \brief Mean overlap coefficient of successive sets; needs at least two sets. */
double nestedness( std::span<std::vector<std::size_t> const> ordered_sets );

struct curriculum_estimate
{
  std::vector<feature_set_result> per_target; // indexed by original target
  std::vector<std::size_t> sizes;             // indexed by original target
  curriculum order;
  std::optional<double> nestedness; // absent for single-target problems
  std::vector<std::vector<std::size_t>> tie_groups;
};

/*! \brief Orders targets by exact minimum feature set size; ties are shuffled under `seed`.

  Throws infeasible_error naming the offending target on contradictory data.
*/
curriculum_estimate estimate_curriculum( dataset const& data, std::uint64_t seed );

} // namespace fbn
