#pragma once

#include <fbn/loss.hpp>
#include <fbn/optimizer.hpp>
#include <fbn/problems.hpp>

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fbn
{

inline constexpr int config_schema_version = 1;

enum class curriculum_mode
{
  given,
  automatic,
  random_tau
};

/*! \brief Gate budget: either `per_target * m` or an absolute count. */
struct gate_budget
{
  std::size_t per_target = 21;
  std::optional<std::size_t> absolute;

  std::size_t resolve( std::size_t n_targets ) const noexcept { return absolute ? *absolute : per_target * n_targets; }
};

/*! Parses "21m" (multiple of the target count) or a plain gate count. */
gate_budget parse_gate_budget( std::string const& text );

/*! LAHC history default: 1000 for cascaded parity, 250 otherwise. */
std::size_t default_history_length( problem_kind kind ) noexcept;

struct experiment_config
{
  problem_spec problem;
  std::optional<std::size_t> pool_sample; // draw a uniform example pool instead of the full table
  std::uint64_t pool_seed = 0;
  std::optional<std::vector<std::size_t>> known_order; // file problems only; identity for generated ones
  std::vector<std::size_t> train_sizes;
  std::size_t replicates = 50;
  std::vector<loss_kind> losses{ loss_kind::l1, loss_kind::lgh };
  curriculum_mode mode = curriculum_mode::given;
  std::optional<std::vector<std::size_t>> given_order;
  std::vector<double> taus;                 // random_tau: empty means every achievable value
  std::size_t permutations_per_tau = 10;
  lahc_config lahc;
  gate_budget gates;
  std::uint64_t base_seed = 1;
  std::size_t workers = 1;
  std::string output;
  bool record_timing = false;
};

/*! \brief Builds a config from the JSON schema (schema_version 1); unknown keys are rejected. */
experiment_config parse_experiment_config( nlohmann::json const& doc );
experiment_config load_experiment_config( std::string const& path );

/*! \brief One training outcome. Target-indexed fields use the problem's original target order. */
struct experiment_record
{
  std::string problem;
  std::size_t train_size = 0;
  std::size_t pool_size = 0;
  std::size_t replicate = 0;
  loss_kind loss = loss_kind::l1;
  std::string variant; // "given", "auto", "baseline" or "tau=<value>"
  std::optional<std::size_t> permutation_index;
  std::vector<std::size_t> curriculum;
  std::uint64_t split_seed = 0;
  std::uint64_t train_seed = 0;
  std::uint64_t split_digest = 0;
  std::vector<double> test_accuracy; // NaN entries when the test set is empty
  double mean_test_accuracy = 0.0;
  double final_training_loss = 0.0;
  bool reached_zero = false;
  std::size_t iterations = 0;
  std::size_t restarts = 0;
  std::optional<double> tau;
  std::optional<double> eta;
  std::optional<std::vector<std::size_t>> mfs_sizes;
  std::optional<double> wall_time;
  std::optional<std::string> error; // flagged records are excluded from summaries

  double fraction() const noexcept
  {
    return pool_size == 0 ? 0.0 : static_cast<double>( train_size ) / static_cast<double>( pool_size );
  }
};

nlohmann::ordered_json to_json( experiment_record const& r );
experiment_record record_from_json( nlohmann::json const& j );
std::string to_json_line( experiment_record const& r );

using record_sink = std::function<void( experiment_record const& )>;

/*! \brief Order-independent digest of a train index set (FNV-1a over the sorted indices). */
std::uint64_t split_digest( std::vector<std::size_t> const& sorted_indices );

/*! \brief Paired-loss experiment: one split per (size, replicate), one network per loss on it.

  Records are delivered to `sink` in job order regardless of worker count.
  The first `skip` jobs are not run (used to resume an interrupted stream).
*/
void run_experiment( experiment_config const& config, record_sink const& sink, std::size_t skip = 0 );
std::vector<experiment_record> run_experiment( experiment_config const& config );

/*! \brief Random-order sweep: per tau stratum, sampled curricula trained with the configured
    ordered losses, plus one L1 baseline per (size, replicate) on the same split. */
void run_tau_sweep( experiment_config const& config, record_sink const& sink, std::size_t skip = 0 );
std::vector<experiment_record> run_tau_sweep( experiment_config const& config );

/*! \brief Runs the configured experiment, appending JSON lines to config.output.

  With `resume`, complete lines already in the file are kept and their jobs skipped.
*/
std::size_t run_to_file( experiment_config const& config, bool tau_sweep, bool resume );

std::vector<experiment_record> read_records( std::istream& is );

struct summary_row
{
  std::string problem;
  std::string size;     // "all" when not grouped by size
  std::string fraction; // empty when not grouped by size
  std::string loss;     // loss, optionally suffixed with ":variant"
  std::string target;   // "mean" or target index
  double mean_acc = 0.0;
  double diff_vs_l1 = 0.0;
  double ci95 = 0.0; // half-width for diff_vs_l1 (for L1 rows: for mean_acc)
  std::size_t count = 0;
};

struct summary
{
  std::vector<summary_row> rows;
  std::vector<std::string> warnings;
};

/*! \brief Groups records by problem plus the chosen keys among {size, loss, variant}. */
summary summarize( std::vector<experiment_record> const& records, std::vector<std::string> const& group_by );
void write_summary_csv( std::ostream& os, summary const& s );

/*! \brief Per-record (acc - paired L1 acc) for records selected by `keep`; target < 0 means mean accuracy. */
std::vector<double> paired_differences( std::vector<experiment_record> const& records,
                                        std::function<bool( experiment_record const& )> const& keep, int target = -1 );

} // namespace fbn
