#pragma once

#include <fbn/bitdata.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fbn
{

enum class problem_kind
{
  add,
  sub,
  cpar,
  cmaj,
  cmux,
  file
};

std::string_view to_string( problem_kind kind ) noexcept;
problem_kind parse_problem_kind( std::string_view text );

/*! \brief A benchmark family with its resolved dimensions.

  add/sub: l = 2n, m = n; cpar: l = m = n; cmaj: l = n (odd), m = ceil(n/2);
  cmux: l = 2n - 1, m = n - 1. For `file`, l and m come from the data.
*/
struct problem_spec
{
  problem_kind kind = problem_kind::cpar;
  std::size_t n = 0;
  std::size_t n_inputs = 0;
  std::size_t n_targets = 0;
  std::size_t pool_size = 0; // 2^l for generated problems
  std::string path;          // for kind == file

  std::string id() const;
};

problem_spec make_problem_spec( problem_kind kind, std::size_t n );

/*! \brief Evaluates a generated problem's targets for one input pattern (bit c of `pattern` is input c). */
std::vector<std::uint8_t> problem_targets( problem_spec const& spec, std::uint64_t pattern );

/*! \brief Full truth table; row r is the input pattern with integer value r. */
dataset generate( problem_spec const& spec );

/*! \brief `pool_size` distinct patterns drawn uniformly, rows sorted by pattern value. */
dataset generate_sampled( problem_spec const& spec, std::size_t pool_size, std::uint64_t seed );

dataset gen_add( std::size_t n );
dataset gen_sub( std::size_t n );
dataset gen_cpar( std::size_t n );
dataset gen_cmaj( std::size_t n );
dataset gen_cmux( std::size_t n );

struct state_pairs
{
  dataset data;
  std::vector<std::size_t> removed_targets; // state columns dropped as constant
  std::vector<std::size_t> kept_targets;    // state column of each remaining target
  std::size_t repeats_removed = 0;
  std::size_t duplicate_pairs_removed = 0;
};

/*! \brief Turns a state sequence into (state_t -> state_{t+1}) examples.

  Consecutive repeated states are collapsed first, then identical pairs are
  deduplicated, then target columns constant over all pairs are dropped.
  Throws infeasible_error on contradictory pairs and empty_problem_error when
  every target is constant.
*/
state_pairs timeseries_to_pairs( bit_matrix const& states );

/* Time-series text format: header "w", then one line of w characters from
   {0,1} per state. */
bit_matrix read_timeseries( std::istream& is );

dataset load_dataset( std::filesystem::path const& path, bool allow_inconsistent = false );
void save_dataset( std::filesystem::path const& path, dataset const& data );

} // namespace fbn
