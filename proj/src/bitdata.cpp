#include <fbn/bitdata.hpp>

#include <fbn/errors.hpp>
#include <fbn/random.hpp>

#include <algorithm>
#include <bit>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>
#include <unordered_map>

namespace fbn
{

bit_matrix::bit_matrix( std::size_t rows, std::size_t cols )
    : rows_( rows ), cols_( cols ), stride_( words_for( cols ) ), data_( rows * stride_, 0 )
{
}

bit_matrix bit_matrix::from_rows( std::vector<std::vector<int>> const& rows )
{
  if ( rows.empty() )
  {
    return {};
  }
  auto const cols = rows.front().size();
  bit_matrix m( rows.size(), cols );
  for ( std::size_t r = 0; r < rows.size(); ++r )
  {
    if ( rows[r].size() != cols )
    {
      throw structural_error( "ragged rows: row " + std::to_string( r ) + " has " + std::to_string( rows[r].size() ) +
                              " columns, expected " + std::to_string( cols ) );
    }
    for ( std::size_t c = 0; c < cols; ++c )
    {
      if ( rows[r][c] != 0 && rows[r][c] != 1 )
      {
        throw structural_error( "cell values must be 0 or 1" );
      }
      m.set( r, c, rows[r][c] == 1 );
    }
  }
  return m;
}

void bit_matrix::clear_padding( std::size_t r ) noexcept
{
  if ( stride_ > 0 )
  {
    data_[r * stride_ + stride_ - 1] &= tail_mask( cols_ );
  }
}

std::vector<int> bit_matrix::row( std::size_t r ) const
{
  std::vector<int> out( cols_ );
  for ( std::size_t c = 0; c < cols_; ++c )
  {
    out[c] = get( r, c ) ? 1 : 0;
  }
  return out;
}

std::size_t bit_matrix::count() const noexcept
{
  std::size_t total = 0;
  for ( auto w : data_ )
  {
    total += std::popcount( w );
  }
  return total;
}

std::size_t bit_matrix::count_row( std::size_t r ) const noexcept
{
  std::size_t total = 0;
  for ( auto w : row_words( r ) )
  {
    total += std::popcount( w );
  }
  return total;
}

bit_matrix bit_matrix::transposed() const
{
  bit_matrix t( cols_, rows_ );
  for ( std::size_t r = 0; r < rows_; ++r )
  {
    auto const words = row_words( r );
    for ( std::size_t w = 0; w < stride_; ++w )
    {
      for ( auto bits = words[w]; bits != 0; bits &= bits - 1 )
      {
        auto const c = w * word_bits + std::countr_zero( bits );
        t.set( c, r, true );
      }
    }
  }
  return t;
}

bit_matrix bit_matrix::select_rows( std::span<std::size_t const> indices ) const
{
  bit_matrix out( indices.size(), cols_ );
  for ( std::size_t i = 0; i < indices.size(); ++i )
  {
    std::ranges::copy( row_words( indices[i] ), out.row_words( i ).begin() );
  }
  return out;
}

bit_matrix bit_matrix::select_cols( std::span<std::size_t const> indices ) const
{
  bit_matrix out( rows_, indices.size() );
  for ( std::size_t r = 0; r < rows_; ++r )
  {
    for ( std::size_t c = 0; c < indices.size(); ++c )
    {
      out.set( r, c, get( r, indices[c] ) );
    }
  }
  return out;
}

namespace
{

struct row_hash
{
  std::size_t operator()( std::span<word_type const> words ) const noexcept
  {
    std::uint64_t h = 0x51ed270b27d1a5ddull;
    for ( auto w : words )
    {
      h = splitmix64( h ^ w );
    }
    return static_cast<std::size_t>( h );
  }
};

struct row_equal
{
  bool operator()( std::span<word_type const> a, std::span<word_type const> b ) const noexcept
  {
    return std::ranges::equal( a, b );
  }
};

} // namespace

bool has_contradiction( bit_matrix const& inputs, bit_matrix const& targets )
{
  std::unordered_map<std::span<word_type const>, std::size_t, row_hash, row_equal> seen;
  seen.reserve( inputs.rows() );
  for ( std::size_t r = 0; r < inputs.rows(); ++r )
  {
    auto [it, inserted] = seen.try_emplace( inputs.row_words( r ), r );
    if ( !inserted && !std::ranges::equal( targets.row_words( it->second ), targets.row_words( r ) ) )
    {
      return true;
    }
  }
  return false;
}

dataset::dataset( bit_matrix inputs, bit_matrix targets, bool allow_inconsistent )
    : inputs_( std::move( inputs ) ), targets_( std::move( targets ) )
{
  if ( inputs_.rows() != targets_.rows() )
  {
    throw structural_error( "dataset inputs have " + std::to_string( inputs_.rows() ) + " rows but targets have " +
                            std::to_string( targets_.rows() ) );
  }
  if ( !allow_inconsistent && has_contradiction( inputs_, targets_ ) )
  {
    throw infeasible_error( "dataset contains identical inputs with differing targets" );
  }
}

dataset dataset::subset( std::span<std::size_t const> rows ) const
{
  dataset out;
  out.inputs_ = inputs_.select_rows( rows );
  out.targets_ = targets_.select_rows( rows );
  return out;
}

dataset dataset::permute_targets( std::span<std::size_t const> order ) const
{
  if ( order.size() != n_targets() )
  {
    throw argument_error( "target permutation has wrong length" );
  }
  dataset out;
  out.inputs_ = inputs_;
  out.targets_ = targets_.select_cols( order );
  return out;
}

sample_split make_sample_split( dataset const& data, std::size_t train_size, std::uint64_t seed )
{
  auto const n = data.n_examples();
  if ( train_size == 0 || train_size > n )
  {
    throw argument_error( "train_size " + std::to_string( train_size ) + " outside (0, " + std::to_string( n ) + "]" );
  }
  std::vector<std::size_t> perm( n );
  std::iota( perm.begin(), perm.end(), std::size_t{ 0 } );
  rng_type rng( seed );
  // partial Fisher-Yates: the first train_size slots are a uniform sample
  for ( std::size_t i = 0; i < train_size; ++i )
  {
    std::uniform_int_distribution<std::size_t> pick( i, n - 1 );
    std::swap( perm[i], perm[pick( rng )] );
  }
  sample_split split;
  split.train_indices.assign( perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>( train_size ) );
  split.test_indices.assign( perm.begin() + static_cast<std::ptrdiff_t>( train_size ), perm.end() );
  std::ranges::sort( split.train_indices );
  std::ranges::sort( split.test_indices );
  split.fraction = static_cast<double>( train_size ) / static_cast<double>( n );
  return split;
}

void write_dataset( std::ostream& os, dataset const& data )
{
  auto const l = data.n_inputs();
  auto const m = data.n_targets();
  os << l << ' ' << m << '\n';
  std::string line( l + m, '0' );
  for ( std::size_t r = 0; r < data.n_examples(); ++r )
  {
    for ( std::size_t c = 0; c < l; ++c )
    {
      line[c] = data.inputs().get( r, c ) ? '1' : '0';
    }
    for ( std::size_t c = 0; c < m; ++c )
    {
      line[l + c] = data.targets().get( r, c ) ? '1' : '0';
    }
    os << line << '\n';
  }
}

namespace
{

std::size_t parse_count( std::string const& token, std::size_t line_no )
{
  if ( token.empty() || !std::ranges::all_of( token, []( char c ) { return c >= '0' && c <= '9'; } ) )
  {
    throw parse_error( line_no, "expected a non-negative integer, got '" + token + "'" );
  }
  try
  {
    return std::stoull( token );
  }
  catch ( std::out_of_range const& )
  {
    throw parse_error( line_no, "integer out of range: " + token );
  }
}

} // namespace

dataset read_dataset( std::istream& is, bool allow_inconsistent )
{
  std::string line;
  if ( !std::getline( is, line ) )
  {
    throw parse_error( 1, "missing header line 'l m'" );
  }
  auto const space = line.find( ' ' );
  if ( space == std::string::npos || line.find( ' ', space + 1 ) != std::string::npos )
  {
    throw parse_error( 1, "header must be exactly 'l m'" );
  }
  auto const l = parse_count( line.substr( 0, space ), 1 );
  auto const m = parse_count( line.substr( space + 1 ), 1 );

  std::vector<std::string> body;
  std::size_t line_no = 1;
  while ( std::getline( is, line ) )
  {
    ++line_no;
    if ( line.size() != l + m )
    {
      if ( !line.empty() && ( line.back() == ' ' || line.back() == '\t' || line.back() == '\r' ) )
      {
        throw parse_error( line_no, "trailing whitespace" );
      }
      throw parse_error( line_no, "expected " + std::to_string( l + m ) + " characters, got " +
                                      std::to_string( line.size() ) );
    }
    for ( char c : line )
    {
      if ( c != '0' && c != '1' )
      {
        throw parse_error( line_no, std::string( "invalid character '" ) + c + "'" );
      }
    }
    body.push_back( std::move( line ) );
  }

  bit_matrix inputs( body.size(), l );
  bit_matrix targets( body.size(), m );
  for ( std::size_t r = 0; r < body.size(); ++r )
  {
    for ( std::size_t c = 0; c < l; ++c )
    {
      inputs.set( r, c, body[r][c] == '1' );
    }
    for ( std::size_t c = 0; c < m; ++c )
    {
      targets.set( r, c, body[r][l + c] == '1' );
    }
  }
  return dataset( std::move( inputs ), std::move( targets ), allow_inconsistent );
}

} // namespace fbn
