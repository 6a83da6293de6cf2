#include <fbn/loss.hpp>

#include <fbn/errors.hpp>

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>

namespace fbn
{

curriculum::curriculum( std::vector<std::size_t> order ) : order_( std::move( order ) )
{
  std::vector<bool> seen( order_.size(), false );
  for ( auto t : order_ )
  {
    if ( t >= order_.size() || seen[t] )
    {
      throw argument_error( "curriculum is not a permutation of 0.." + std::to_string( order_.size() ) + "-1" );
    }
    seen[t] = true;
  }
}

curriculum curriculum::identity( std::size_t m )
{
  std::vector<std::size_t> order( m );
  std::iota( order.begin(), order.end(), std::size_t{ 0 } );
  return curriculum( std::move( order ) );
}

error_summary::error_summary( std::size_t n_examples, std::size_t n_targets )
    : by_target_( n_targets, n_examples ), counts_( n_targets, 0 )
{
}

std::vector<double> error_summary::per_target_error() const
{
  std::vector<double> delta( n_targets(), 0.0 );
  if ( n_examples() == 0 )
  {
    return delta;
  }
  for ( std::size_t k = 0; k < n_targets(); ++k )
  {
    delta[k] = static_cast<double>( counts_[k] ) / static_cast<double>( n_examples() );
  }
  return delta;
}

void error_summary::assign( std::size_t position, std::span<word_type const> errors )
{
  auto row = by_target_.row_words( position );
  std::copy( errors.begin(), errors.end(), row.begin() );
  by_target_.clear_padding( position );
  counts_[position] = by_target_.count_row( position );
}

error_summary make_error_summary( bit_matrix const& targets, bit_matrix const& predictions, curriculum const& order )
{
  if ( targets.rows() != predictions.rows() || targets.cols() != predictions.cols() )
  {
    throw argument_error( "targets and predictions differ in shape" );
  }
  if ( order.size() != targets.cols() )
  {
    throw argument_error( "curriculum length does not match the number of targets" );
  }
  auto const yt = targets.transposed();
  auto const pt = predictions.transposed();
  error_summary es( targets.rows(), targets.cols() );
  std::vector<word_type> buffer( yt.words_per_row() );
  for ( std::size_t k = 0; k < order.size(); ++k )
  {
    auto const y = yt.row_words( order[k] );
    auto const p = pt.row_words( order[k] );
    for ( std::size_t w = 0; w < buffer.size(); ++w )
    {
      buffer[w] = y[w] ^ p[w];
    }
    es.assign( k, buffer );
  }
  return es;
}

error_summary error_summary_from_matrix( bit_matrix const& errors )
{
  auto const t = errors.transposed();
  error_summary es( errors.rows(), errors.cols() );
  for ( std::size_t k = 0; k < errors.cols(); ++k )
  {
    es.assign( k, t.row_words( k ) );
  }
  return es;
}

namespace
{

void require_nonempty( error_summary const& es )
{
  if ( es.n_examples() == 0 || es.n_targets() == 0 )
  {
    throw argument_error( "loss of an empty error matrix is undefined" );
  }
}

} // namespace

double loss_l1( error_summary const& es )
{
  require_nonempty( es );
  auto const errors = std::accumulate( es.error_counts().begin(), es.error_counts().end(), std::size_t{ 0 } );
  return static_cast<double>( errors ) / static_cast<double>( es.n_examples() * es.n_targets() );
}

// Weights m-k for 0-based position k, normalised by their sum m(m+1)/2 so the all-one matrix maps to 1.
double loss_lw( error_summary const& es )
{
  require_nonempty( es );
  auto const m = es.n_targets();
  std::size_t weighted = 0;
  for ( std::size_t k = 0; k < m; ++k )
  {
    weighted += ( m - k ) * es.error_count( k );
  }
  auto const weight_sum = m * ( m + 1 ) / 2;
  return static_cast<double>( weighted ) / static_cast<double>( es.n_examples() * weight_sum );
}

// a_{i,k} is the running OR of E_{i,0..k}.
double loss_llh( error_summary const& es )
{
  require_nonempty( es );
  auto const& e = es.by_target();
  std::vector<word_type> running( e.words_per_row(), 0 );
  std::size_t total = 0;
  for ( std::size_t k = 0; k < es.n_targets(); ++k )
  {
    auto const row = e.row_words( k );
    for ( std::size_t w = 0; w < running.size(); ++w )
    {
      running[w] |= row[w];
      total += std::popcount( running[w] );
    }
  }
  return static_cast<double>( total ) / static_cast<double>( es.n_examples() * es.n_targets() );
}

// Once any target has a nonzero error count, every later target counts as fully wrong.
double loss_lgh( error_summary const& es )
{
  require_nonempty( es );
  auto const n = static_cast<double>( es.n_examples() );
  auto const m = es.n_targets();
  double sum = 0.0;
  std::size_t k = 0;
  for ( ; k < m; ++k )
  {
    auto const c = es.error_count( k );
    if ( c != 0 )
    {
      sum += static_cast<double>( c ) / n;
      ++k;
      break;
    }
  }
  sum += static_cast<double>( m - k );
  return sum / static_cast<double>( m );
}

double compute_loss( loss_kind kind, error_summary const& es )
{
  switch ( kind )
  {
  case loss_kind::l1:
    return loss_l1( es );
  case loss_kind::lw:
    return loss_lw( es );
  case loss_kind::llh:
    return loss_llh( es );
  case loss_kind::lgh:
    return loss_lgh( es );
  }
  throw argument_error( "unknown loss kind" );
}

std::string_view to_string( loss_kind kind ) noexcept
{
  switch ( kind )
  {
  case loss_kind::l1:
    return "l1";
  case loss_kind::lw:
    return "lw";
  case loss_kind::llh:
    return "llh";
  case loss_kind::lgh:
    return "lgh";
  }
  return "?";
}

loss_kind parse_loss_kind( std::string_view text )
{
  if ( text == "l1" )
    return loss_kind::l1;
  if ( text == "lw" )
    return loss_kind::lw;
  if ( text == "llh" )
    return loss_kind::llh;
  if ( text == "lgh" )
    return loss_kind::lgh;
  throw argument_error( "unknown loss '" + std::string( text ) + "' (expected l1|lw|llh|lgh)" );
}

} // namespace fbn
