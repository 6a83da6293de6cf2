#include <doctest.h>

#include <fbn/errors.hpp>
#include <fbn/stats.hpp>

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

using namespace fbn;

namespace
{

using perm = std::vector<std::size_t>;

// direct pair enumeration over item labels
double naive_tau( perm const& a, perm const& b )
{
  auto pos = []( perm const& p, std::size_t item ) {
    return static_cast<std::size_t>( std::ranges::find( p, item ) - p.begin() );
  };
  int P = 0, Q = 0;
  for ( std::size_t x = 0; x < a.size(); ++x )
    for ( std::size_t y = x + 1; y < a.size(); ++y )
    {
      bool const sa = pos( a, x ) < pos( a, y );
      bool const sb = pos( b, x ) < pos( b, y );
      ( sa == sb ? P : Q ) += 1;
    }
  return static_cast<double>( P - Q ) / ( P + Q );
}

perm identity( std::size_t m )
{
  perm p( m );
  std::iota( p.begin(), p.end(), std::size_t{ 0 } );
  return p;
}

} // namespace

TEST_CASE( "kendall tau examples" )
{
  CHECK( kendall_tau( perm{ 0, 1, 2, 3 }, perm{ 0, 1, 2, 3 } ).ratio() == 1.0 );
  CHECK( kendall_tau( perm{ 0, 1, 2, 3 }, perm{ 3, 2, 1, 0 } ).ratio() == -1.0 );
  auto const t = kendall_tau( perm{ 0, 1, 2, 3 }, perm{ 0, 1, 3, 2 } );
  CHECK( t.numerator() == 4 );
  CHECK( t.denominator() == 6 );
  CHECK( t.ratio() == doctest::Approx( 2.0 / 3.0 ) );

  CHECK_THROWS_AS( kendall_tau( perm{ 0, 1 }, perm{ 0, 1, 2 } ), argument_error );
  CHECK_THROWS_AS( kendall_tau( perm{ 0 }, perm{ 0 } ), argument_error );
  CHECK_THROWS_AS( kendall_tau( perm{ 0, 0 }, perm{ 0, 1 } ), argument_error );
}

TEST_CASE( "kendall tau properties" )
{
  std::mt19937_64 rng( 12 );
  for ( int trial = 0; trial < 300; ++trial )
  {
    auto const m = 2 + rng() % 9;
    auto a = identity( m ), b = identity( m ), relabel = identity( m );
    std::shuffle( a.begin(), a.end(), rng );
    std::shuffle( b.begin(), b.end(), rng );
    std::shuffle( relabel.begin(), relabel.end(), rng );
    auto const t = kendall_tau( a, b ).ratio();
    REQUIRE( t == doctest::Approx( naive_tau( a, b ) ) );
    REQUIRE( kendall_tau( b, a ).ratio() == t );
    perm ra, rb;
    for ( auto v : a )
      ra.push_back( relabel[v] );
    for ( auto v : b )
      rb.push_back( relabel[v] );
    REQUIRE( kendall_tau( ra, rb ).ratio() == t );
    // against the identity, discordant pairs are inversions
    REQUIRE( static_cast<std::size_t>( kendall_tau( identity( m ), a ).discordant ) == inversion_count( a ) );
  }
}

TEST_CASE( "mahonian rows sum to m factorial" )
{
  unsigned __int128 fact = 1;
  for ( std::size_t m = 1; m <= 33; ++m )
  {
    fact *= m;
    auto const row = mahonian_row( m );
    CHECK( row.size() == m * ( m - 1 ) / 2 + 1 );
    unsigned __int128 sum = 0;
    for ( auto v : row )
      sum += v;
    REQUIRE( sum == fact );
  }
  CHECK( mahonian_row( 4 ) == std::vector<unsigned __int128>{ 1, 3, 5, 6, 5, 3, 1 } );
  CHECK_THROWS_AS( mahonian_row( 34 ), argument_error );
}

TEST_CASE( "achievable tau values" )
{
  auto const t = achievable_taus( 6 );
  CHECK( t.size() == 16 );
  CHECK( t.front() == -1.0 );
  CHECK( t.back() == 1.0 );
  CHECK( inversions_for_tau( 5, 0.6 ) == 2 );
  CHECK( inversions_for_tau( 5, 1.0 ) == 0 );
  CHECK( inversions_for_tau( 5, -1.0 ) == 10 );
  CHECK_THROWS_WITH_AS( inversions_for_tau( 5, 0.5 ), doctest::Contains( "achievable" ), argument_error );
}

TEST_CASE( "stratified permutation sampling" )
{
  CHECK( sample_permutation_with_tau( 5, 1.0, 3 ) == identity( 5 ) );
  CHECK( sample_permutation_with_tau( 5, -1.0, 3 ) == perm{ 4, 3, 2, 1, 0 } );
  for ( std::uint64_t seed = 0; seed < 50; ++seed )
  {
    auto const p = sample_permutation_with_tau( 5, 0.6, seed );
    CHECK( inversion_count( p ) == 2 );
    CHECK( kendall_tau( identity( 5 ), p ).ratio() == doctest::Approx( 0.6 ) );
  }
}

TEST_CASE( "stratified sampling is uniform within the stratum" )
{
  rng_type rng( 99 );
  int const draws = 10000;
  for ( auto [m, q] : { std::pair{ 4u, 3u }, std::pair{ 5u, 2u }, std::pair{ 5u, 5u } } )
  {
    std::map<perm, int> counts;
    for ( int i = 0; i < draws; ++i )
      ++counts[sample_permutation_with_inversions( m, q, rng )];
    auto const stratum = static_cast<std::size_t>( mahonian_row( m )[q] );
    // every member of the stratum shows up, and only members
    perm p = identity( m );
    std::size_t members = 0;
    do
    {
      if ( inversion_count( p ) == q )
      {
        ++members;
        CHECK( counts.contains( p ) );
      }
    } while ( std::next_permutation( p.begin(), p.end() ) );
    CHECK( members == stratum );
    CHECK( counts.size() == stratum );

    double const expected = static_cast<double>( draws ) / stratum;
    double chi2 = 0.0;
    for ( auto const& [k, c] : counts )
      chi2 += ( c - expected ) * ( c - expected ) / expected;
    boost::math::chi_squared dist( static_cast<double>( stratum - 1 ) );
    CHECK( chi2 < boost::math::quantile( dist, 0.99 ) );
  }
}

TEST_CASE( "mean confidence interval" )
{
  std::vector<double> constant( 10, 0.3 );
  auto const c = mean_ci( constant );
  CHECK( c.mean == doctest::Approx( 0.3 ) );
  CHECK( c.half_width == doctest::Approx( 0.0 ).epsilon( 1e-12 ) );

  std::vector<double> two{ 0.0, 1.0 };
  auto const t = mean_ci( two );
  CHECK( t.mean == 0.5 );
  // sd = 1/sqrt(2), t_{0.975,1} = 12.7062
  CHECK( t.half_width == doctest::Approx( 12.7062047 * 0.5 ).epsilon( 1e-6 ) );

  std::vector<double> one{ 1.0 };
  CHECK_THROWS_AS( mean_ci( one ), argument_error );
}

TEST_CASE( "confidence interval coverage on Bernoulli(0.5)" )
{
  std::mt19937_64 rng( 1 );
  std::bernoulli_distribution coin( 0.5 );
  int covered = 0;
  int const trials = 1000;
  for ( int t = 0; t < trials; ++t )
  {
    std::vector<double> v( 1000 );
    for ( auto& x : v )
      x = coin( rng );
    auto const ci = mean_ci( v );
    covered += std::abs( ci.mean - 0.5 ) <= ci.half_width;
  }
  // binomial(1000, 0.95): sd ~6.9
  CHECK( covered >= 925 );
  CHECK( covered <= 975 );
}

TEST_CASE( "paired t-test" )
{
  std::vector<double> zero( 5, 0.0 );
  CHECK( paired_t_pvalue( zero ) == 1.0 );
  std::vector<double> shifted{ 1.0, 1.0, 1.0 };
  CHECK( paired_t_pvalue( shifted ) == 0.0 );
  // t = 4.899 on 3 df; reference value from an independent statistics package
  std::vector<double> d{ 0.1, 0.2, 0.3, 0.2 };
  CHECK( paired_t_pvalue( d ) == doctest::Approx( 0.01627660345942855 ).epsilon( 1e-9 ) );
  CHECK( paired_t_pvalue( d ) < 0.05 );
}
