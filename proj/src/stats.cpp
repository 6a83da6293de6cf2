#include <fbn/stats.hpp>

#include <fbn/errors.hpp>

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

namespace fbn
{

namespace
{

void require_permutation( std::span<std::size_t const> p )
{
  std::vector<bool> seen( p.size(), false );
  for ( auto v : p )
  {
    if ( v >= p.size() || seen[v] )
    {
      throw argument_error( "argument is not a permutation" );
    }
    seen[v] = true;
  }
}

} // namespace

tau_value kendall_tau( std::span<std::size_t const> a, std::span<std::size_t const> b )
{
  if ( a.size() != b.size() )
  {
    throw argument_error( "kendall_tau: orderings differ in length" );
  }
  if ( a.size() < 2 )
  {
    throw argument_error( "kendall_tau needs at least two items" );
  }
  require_permutation( a );
  require_permutation( b );
  auto const m = a.size();
  std::vector<std::size_t> pos_a( m ), pos_b( m );
  for ( std::size_t i = 0; i < m; ++i )
  {
    pos_a[a[i]] = i;
    pos_b[b[i]] = i;
  }
  tau_value t;
  for ( std::size_t x = 0; x < m; ++x )
  {
    for ( std::size_t y = x + 1; y < m; ++y )
    {
      bool const before_a = pos_a[x] < pos_a[y];
      bool const before_b = pos_b[x] < pos_b[y];
      ( before_a == before_b ? t.concordant : t.discordant ) += 1;
    }
  }
  return t;
}

std::size_t inversion_count( std::span<std::size_t const> perm )
{
  std::size_t q = 0;
  for ( std::size_t i = 0; i < perm.size(); ++i )
  {
    for ( std::size_t j = i + 1; j < perm.size(); ++j )
    {
      q += perm[i] > perm[j];
    }
  }
  return q;
}

std::vector<unsigned __int128> mahonian_row( std::size_t m )
{
  if ( m > 33 )
  {
    throw argument_error( "permutation sampling supports at most 33 items" );
  }
  std::vector<unsigned __int128> row{ 1 };
  for ( std::size_t k = 2; k <= m; ++k )
  {
    // inserting item k adds 0..k-1 inversions
    std::vector<unsigned __int128> next( row.size() + k - 1, 0 );
    for ( std::size_t q = 0; q < row.size(); ++q )
    {
      for ( std::size_t add = 0; add < k; ++add )
      {
        next[q + add] += row[q];
      }
    }
    row = std::move( next );
  }
  return row;
}

std::vector<double> achievable_taus( std::size_t m )
{
  auto const pairs = m * ( m - 1 ) / 2;
  std::vector<double> taus;
  for ( std::size_t q = pairs + 1; q-- > 0; )
  {
    taus.push_back( static_cast<double>( static_cast<std::int64_t>( pairs ) - 2 * static_cast<std::int64_t>( q ) ) /
                    static_cast<double>( pairs ) );
  }
  return taus;
}

std::size_t inversions_for_tau( std::size_t m, double tau )
{
  if ( m < 2 )
  {
    throw argument_error( "tau needs at least two items" );
  }
  auto const pairs = m * ( m - 1 ) / 2;
  // tau = (pairs - 2q) / pairs
  auto const q_real = ( 1.0 - tau ) * static_cast<double>( pairs ) / 2.0;
  auto const q = std::llround( q_real );
  if ( q < 0 || static_cast<std::size_t>( q ) > pairs || std::abs( q_real - static_cast<double>( q ) ) > 1e-9 * pairs )
  {
    std::ostringstream msg;
    msg << "tau " << tau << " is not achievable for m = " << m << "; achievable values:";
    for ( auto t : achievable_taus( m ) )
    {
      msg << ' ' << t;
    }
    throw argument_error( msg.str() );
  }
  return static_cast<std::size_t>( q );
}

namespace
{

unsigned __int128 uniform_below( unsigned __int128 bound, rng_type& rng )
{
  // rejection sampling on 128 random bits
  auto const limit = ~static_cast<unsigned __int128>( 0 ) - ( ~static_cast<unsigned __int128>( 0 ) % bound );
  for ( ;; )
  {
    unsigned __int128 x = ( static_cast<unsigned __int128>( rng() ) << 64 ) | rng();
    if ( x < limit )
    {
      return x % bound;
    }
  }
}

} // namespace

std::vector<std::size_t> sample_permutation_with_inversions( std::size_t m, std::size_t q, rng_type& rng )
{
  auto const pairs = m * ( m - 1 ) / 2;
  if ( q > pairs )
  {
    throw argument_error( "inversion count exceeds m(m-1)/2" );
  }
  // Mahonian rows for every suffix length
  std::vector<std::vector<unsigned __int128>> rows( m + 1 );
  rows[0] = { 1 };
  for ( std::size_t k = 1; k <= m; ++k )
  {
    rows[k] = mahonian_row( k );
  }
  auto count = [&]( std::size_t len, std::size_t inv ) -> unsigned __int128 {
    return inv < rows[len].size() ? rows[len][inv] : 0;
  };

  // Lehmer code: the element placed at position i is the c-th smallest of
  // those remaining, contributing c inversions.
  std::vector<std::size_t> remaining( m );
  std::iota( remaining.begin(), remaining.end(), std::size_t{ 0 } );
  std::vector<std::size_t> perm;
  perm.reserve( m );
  auto left = q;
  for ( std::size_t i = 0; i < m; ++i )
  {
    auto const rest = m - i - 1;
    auto const total = count( rest + 1, left );
    auto r = uniform_below( total, rng );
    std::size_t c = 0;
    for ( ; c <= std::min( left, rest ); ++c )
    {
      auto const w = count( rest, left - c );
      if ( r < w )
      {
        break;
      }
      r -= w;
    }
    perm.push_back( remaining[c] );
    remaining.erase( remaining.begin() + static_cast<std::ptrdiff_t>( c ) );
    left -= c;
  }
  return perm;
}

std::vector<std::size_t> sample_permutation_with_tau( std::size_t m, double tau, std::uint64_t seed )
{
  auto const q = inversions_for_tau( m, tau );
  rng_type rng( seed );
  return sample_permutation_with_inversions( m, q, rng );
}

mean_interval mean_ci( std::span<double const> values, double level )
{
  if ( values.size() < 2 )
  {
    throw argument_error( "confidence interval needs at least two values" );
  }
  if ( !( level > 0.0 && level < 1.0 ) )
  {
    throw argument_error( "confidence level must be in (0, 1)" );
  }
  auto const n = static_cast<double>( values.size() );
  auto const mean = std::accumulate( values.begin(), values.end(), 0.0 ) / n;
  double ss = 0.0;
  for ( auto v : values )
  {
    ss += ( v - mean ) * ( v - mean );
  }
  auto const sd = std::sqrt( ss / ( n - 1.0 ) );
  boost::math::students_t dist( n - 1.0 );
  auto const t = boost::math::quantile( boost::math::complement( dist, ( 1.0 - level ) / 2.0 ) );
  return { mean, t * sd / std::sqrt( n ) };
}

double paired_t_pvalue( std::span<double const> differences )
{
  if ( differences.size() < 2 )
  {
    throw argument_error( "t-test needs at least two values" );
  }
  auto const n = static_cast<double>( differences.size() );
  auto const mean = std::accumulate( differences.begin(), differences.end(), 0.0 ) / n;
  double ss = 0.0;
  for ( auto v : differences )
  {
    ss += ( v - mean ) * ( v - mean );
  }
  auto const se = std::sqrt( ss / ( n - 1.0 ) ) / std::sqrt( n );
  if ( se == 0.0 )
  {
    return mean == 0.0 ? 1.0 : 0.0;
  }
  boost::math::students_t dist( n - 1.0 );
  return 2.0 * boost::math::cdf( boost::math::complement( dist, std::abs( mean / se ) ) );
}

} // namespace fbn
