#pragma once

#include <fbn/bitdata.hpp>

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fbn
{

/*! \brief Target order, position 0 = easiest. Always a bijection on {0..m-1}. */
class curriculum
{
public:
  curriculum() = default;
  explicit curriculum( std::vector<std::size_t> order );

  static curriculum identity( std::size_t m );

  std::size_t size() const noexcept { return order_.size(); }
  std::size_t operator[]( std::size_t position ) const noexcept { return order_[position]; }
  std::vector<std::size_t> const& order() const noexcept { return order_; }

  friend bool operator==( curriculum const&, curriculum const& ) = default;

private:
  std::vector<std::size_t> order_;
};

/*! \brief Error matrix with targets already arranged in curriculum order.

  Stored target-major: row `k` of `by_target()` is the error bit-vector of
  the target at curriculum position `k` over all examples. Per-target error
  counts are exact integers, so delta_k = count_k / n.
*/
class error_summary
{
public:
  error_summary() = default;
  error_summary( std::size_t n_examples, std::size_t n_targets );

  std::size_t n_examples() const noexcept { return by_target_.cols(); }
  std::size_t n_targets() const noexcept { return by_target_.rows(); }

  /*! E_{i,k} with k a curriculum position. */
  bool error( std::size_t example, std::size_t position ) const noexcept { return by_target_.get( position, example ); }

  bit_matrix const& by_target() const noexcept { return by_target_; }
  std::size_t error_count( std::size_t position ) const noexcept { return counts_[position]; }
  std::span<std::size_t const> error_counts() const noexcept { return counts_; }

  /*! The n x m matrix E (columns in curriculum order). */
  bit_matrix error_matrix() const { return by_target_.transposed(); }
  std::vector<double> per_target_error() const;

  /*! Overwrites the errors of curriculum position `k`; padding is cleared and the count refreshed. */
  void assign( std::size_t position, std::span<word_type const> errors );

private:
  bit_matrix by_target_;
  std::vector<std::size_t> counts_;
};

/*! \brief E_{i,k} = |Y_{i,order[k]} - Y'_{i,order[k]}|. */
error_summary make_error_summary( bit_matrix const& targets, bit_matrix const& predictions, curriculum const& order );

/*! \brief Wraps an explicit n x m error matrix (columns taken as already curriculum-ordered). */
error_summary error_summary_from_matrix( bit_matrix const& errors );

double loss_l1( error_summary const& es );
double loss_lw( error_summary const& es );
double loss_llh( error_summary const& es );
double loss_lgh( error_summary const& es );

enum class loss_kind
{
  l1,
  lw,
  llh,
  lgh
};

double compute_loss( loss_kind kind, error_summary const& es );

std::string_view to_string( loss_kind kind ) noexcept;
loss_kind parse_loss_kind( std::string_view text );

} // namespace fbn
