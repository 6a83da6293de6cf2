#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace fbn
{

using word_type = std::uint64_t;
inline constexpr std::size_t word_bits = 64;

constexpr std::size_t words_for( std::size_t bits ) noexcept
{
  return ( bits + word_bits - 1 ) / word_bits;
}

/*! \brief Mask selecting the valid bits of the last word of a `bits`-long row. */
constexpr word_type tail_mask( std::size_t bits ) noexcept
{
  auto const rem = bits % word_bits;
  return rem == 0 ? ~word_type{ 0 } : ( word_type{ 1 } << rem ) - 1;
}

/*! \brief Packed row-major binary matrix.

  Bit `i` of word `w` of row `r` holds cell `(r, w * 64 + i)`. Padding bits
  past `cols()` in the final word of each row are always zero, so word-level
  popcounts are exact.
*/
class bit_matrix
{
public:
  bit_matrix() = default;
  bit_matrix( std::size_t rows, std::size_t cols );

  /*! \brief Builds a matrix from explicit 0/1 rows; throws structural_error on ragged input. */
  static bit_matrix from_rows( std::vector<std::vector<int>> const& rows );

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t words_per_row() const noexcept { return stride_; }

  bool get( std::size_t r, std::size_t c ) const noexcept
  {
    return ( data_[r * stride_ + c / word_bits] >> ( c % word_bits ) ) & 1u;
  }

  void set( std::size_t r, std::size_t c, bool value ) noexcept
  {
    auto& w = data_[r * stride_ + c / word_bits];
    auto const bit = word_type{ 1 } << ( c % word_bits );
    w = value ? ( w | bit ) : ( w & ~bit );
  }

  std::span<word_type const> row_words( std::size_t r ) const noexcept
  {
    return { data_.data() + r * stride_, stride_ };
  }

  /*! Callers writing whole words must keep the padding bits zero (see clear_padding). */
  std::span<word_type> row_words( std::size_t r ) noexcept
  {
    return { data_.data() + r * stride_, stride_ };
  }

  void clear_padding( std::size_t r ) noexcept;

  std::vector<int> row( std::size_t r ) const;

  std::size_t count() const noexcept;
  std::size_t count_row( std::size_t r ) const noexcept;

  bit_matrix transposed() const;
  bit_matrix select_rows( std::span<std::size_t const> indices ) const;
  bit_matrix select_cols( std::span<std::size_t const> indices ) const;

  friend bool operator==( bit_matrix const&, bit_matrix const& ) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t stride_ = 0;
  std::vector<word_type> data_;
};

/*! \brief Input/target example pairs.

  Unless constructed with `allow_inconsistent`, no two identical input rows may
  carry different target rows (infeasible_error otherwise).
*/
class dataset
{
public:
  dataset() = default;
  dataset( bit_matrix inputs, bit_matrix targets, bool allow_inconsistent = false );

  bit_matrix const& inputs() const noexcept { return inputs_; }
  bit_matrix const& targets() const noexcept { return targets_; }

  std::size_t n_examples() const noexcept { return inputs_.rows(); }
  std::size_t n_inputs() const noexcept { return inputs_.cols(); }
  std::size_t n_targets() const noexcept { return targets_.cols(); }

  dataset subset( std::span<std::size_t const> rows ) const;

  /*! \brief Reorders target columns: column k of the result is column `order[k]` of this. */
  dataset permute_targets( std::span<std::size_t const> order ) const;

  friend bool operator==( dataset const&, dataset const& ) = default;

private:
  bit_matrix inputs_;
  bit_matrix targets_;
};

/*! \brief True iff some pair of identical input rows has different target rows. */
bool has_contradiction( bit_matrix const& inputs, bit_matrix const& targets );

struct sample_split
{
  std::vector<std::size_t> train_indices; // sorted
  std::vector<std::size_t> test_indices;  // sorted, exhaustive complement
  double fraction = 0.0;
};

/*! \brief Uniform train sample of `train_size` rows; the test set is every remaining row. */
sample_split make_sample_split( dataset const& data, std::size_t train_size, std::uint64_t seed );

/* Text format: header "l m", then one line of l+m characters per example,
   inputs first, LF line endings, no trailing whitespace. */
void write_dataset( std::ostream& os, dataset const& data );
dataset read_dataset( std::istream& is, bool allow_inconsistent = false );

} // namespace fbn
