#include <doctest.h>

#include <fbn/errors.hpp>
#include <fbn/minfs.hpp>
#include <fbn/problems.hpp>

#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <random>

using namespace fbn;

namespace
{

std::vector<std::uint8_t> column( bit_matrix const& t, std::size_t c )
{
  std::vector<std::uint8_t> out;
  for ( std::size_t r = 0; r < t.rows(); ++r )
    out.push_back( t.get( r, c ) );
  return out;
}

std::vector<int> int_column( bit_matrix const& t, std::size_t c )
{
  std::vector<int> out;
  for ( std::size_t r = 0; r < t.rows(); ++r )
    out.push_back( t.get( r, c ) );
  return out;
}

// S distinguishes every differing-target pair of the raw data
bool distinguishes( bit_matrix const& x, std::vector<int> const& target, std::vector<std::size_t> const& s )
{
  for ( std::size_t i = 0; i < x.rows(); ++i )
    for ( std::size_t j = i + 1; j < x.rows(); ++j )
    {
      if ( target[i] == target[j] )
        continue;
      bool differ = false;
      for ( auto f : s )
        differ = differ || x.get( i, f ) != x.get( j, f );
      if ( !differ )
        return false;
    }
  return true;
}

// random consistent data: distinct input rows, random target
dataset consistent_data( std::size_t n, std::size_t p, std::size_t m, std::mt19937_64& rng )
{
  n = std::min<std::size_t>( n, std::size_t{ 1 } << p );
  std::vector<std::uint64_t> pool( std::size_t{ 1 } << p );
  std::iota( pool.begin(), pool.end(), std::uint64_t{ 0 } );
  std::shuffle( pool.begin(), pool.end(), rng );
  bit_matrix x( n, p );
  for ( std::size_t r = 0; r < n; ++r )
    for ( std::size_t c = 0; c < p; ++c )
      x.set( r, c, ( pool[r] >> c ) & 1u );
  return dataset( x, oracle::random_matrix( n, m, rng ) );
}

} // namespace

TEST_CASE( "cover instance construction" )
{
  auto const constant = build_cover_instance( bit_matrix::from_rows( { { 0 }, { 1 } } ), std::vector<std::uint8_t>{ 1, 1 } );
  CHECK( constant.pair_masks.empty() );

  auto const one = build_cover_instance( bit_matrix::from_rows( { { 0 }, { 1 } } ), std::vector<std::uint8_t>{ 0, 1 } );
  CHECK( one.pair_masks == std::vector<feature_mask>{ 0b1 } );

  auto const two = build_cover_instance( bit_matrix::from_rows( { { 0, 0 }, { 0, 1 }, { 1, 0 } } ),
                                         std::vector<std::uint8_t>{ 0, 1, 1 } );
  CHECK( two.pair_masks == std::vector<feature_mask>{ 0b01, 0b10 } );

  CHECK_THROWS_AS( build_cover_instance( bit_matrix::from_rows( { { 1 }, { 1 } } ), std::vector<std::uint8_t>{ 0, 1 } ),
                   infeasible_error );
  CHECK_THROWS_AS( build_cover_instance( bit_matrix( 0, 3 ), std::vector<std::uint8_t>{} ), argument_error );
  CHECK_THROWS_AS( build_cover_instance( bit_matrix( 2, 65 ), std::vector<std::uint8_t>{ 0, 1 } ), argument_error );
}

TEST_CASE( "mask reduction" )
{
  auto const r = reduce_masks( { 0b011, 0b001, 0b001, 0b110, 0b111 }, 3 );
  CHECK( r == std::vector<feature_mask>{ 0b001, 0b110 } );

  // the dominance pass must agree with a quadratic reference at both sizes
  std::mt19937_64 rng( 2 );
  for ( std::size_t p : { 6u, 30u } )
  {
    for ( int trial = 0; trial < 50; ++trial )
    {
      std::vector<feature_mask> masks;
      for ( int i = 0; i < 60; ++i )
      {
        feature_mask m = 0;
        while ( m == 0 )
          m = rng() & rng() & ( ( feature_mask{ 1 } << p ) - 1 );
        masks.push_back( m );
      }
      std::vector<feature_mask> expect;
      for ( auto a : masks )
      {
        bool dominated = false;
        for ( auto b : masks )
          dominated = dominated || ( b != a && ( b & a ) == b );
        if ( !dominated )
          expect.push_back( a );
      }
      std::ranges::sort( expect );
      expect.erase( std::unique( expect.begin(), expect.end() ), expect.end() );
      REQUIRE( reduce_masks( masks, p ) == expect );
    }
  }
}

TEST_CASE( "solver examples" )
{
  cover_instance none{ 3, {} };
  auto const r0 = solve_minfs_exact( none );
  CHECK( r0.features.empty() );
  CHECK( r0.cardinality == 0 );
  CHECK( r0.proven_optimal );

  cover_instance forced{ 2, { 0b01, 0b10 } };
  CHECK( solve_minfs_exact( forced ).features == std::vector<std::size_t>{ 0, 1 } );

  cover_instance easy{ 2, { 0b01, 0b11 } };
  auto const g = solve_minfs_greedy( easy );
  CHECK( g.features == std::vector<std::size_t>{ 0 } );
  CHECK_FALSE( g.proven_optimal );
}

TEST_CASE( "exact solver equals exhaustive search, greedy is an upper bound" )
{
  std::mt19937_64 rng( 8 );
  for ( int trial = 0; trial < 300; ++trial )
  {
    auto const p = 1 + rng() % 12;
    auto const n = 2 + rng() % 39;
    auto const d = consistent_data( n, p, 1, rng );
    auto const target = int_column( d.targets(), 0 );
    auto const inst = build_cover_instance( d.inputs(), d.targets(), 0 );
    auto const exact = solve_minfs_exact( inst );
    auto const greedy = solve_minfs_greedy( inst );
    REQUIRE( exact.cardinality == oracle::brute_force_mfs( d.inputs(), target ) );
    REQUIRE( exact.cardinality == exact.features.size() );
    REQUIRE( distinguishes( d.inputs(), target, exact.features ) );
    REQUIRE( distinguishes( d.inputs(), target, greedy.features ) );
    REQUIRE( greedy.cardinality >= exact.cardinality );
  }
}

TEST_CASE( "exact solver on raw cover instances up to 16 features" )
{
  std::mt19937_64 rng( 15 );
  for ( int trial = 0; trial < 150; ++trial )
  {
    auto const p = 1 + rng() % 16;
    std::vector<feature_mask> masks;
    auto const k = 1 + rng() % 30;
    for ( std::size_t i = 0; i < k; ++i )
    {
      feature_mask m = 0;
      while ( m == 0 )
        m = rng() & rng() & ( ( feature_mask{ 1 } << p ) - 1 );
      masks.push_back( m );
    }
    cover_instance inst{ p, reduce_masks( masks, p ) };
    auto const exact = solve_minfs_exact( inst );
    feature_mask sel = 0;
    for ( auto f : exact.features )
      sel |= feature_mask{ 1 } << f;
    REQUIRE( covers( sel, masks ) );
    REQUIRE( exact.cardinality == oracle::brute_force_cover( p, masks ) );
  }
}

TEST_CASE( "exact solver is deterministic and prefers low feature indices" )
{
  // {0,1} and {2,3} each cover both masks; the lower pair must come back
  cover_instance inst{ 4, { 0b0101, 0b1010 } };
  auto const a = solve_minfs_exact( inst );
  CHECK( a.cardinality == 2 );
  CHECK( a.features == std::vector<std::size_t>{ 0, 1 } );
  CHECK( solve_minfs_exact( inst ).features == a.features );
}

TEST_CASE( "cascaded parity feature sets are prefixes" )
{
  auto const d = gen_cpar( 7 );
  for ( std::size_t k = 0; k < 7; ++k )
  {
    auto const r = solve_minfs_exact( build_cover_instance( d.inputs(), column( d.targets(), k ) ) );
    std::vector<std::size_t> prefix( k + 1 );
    std::iota( prefix.begin(), prefix.end(), std::size_t{ 0 } );
    CHECK( r.features == prefix );
    if ( k <= 4 )
      CHECK( oracle::brute_force_mfs( d.inputs(), int_column( d.targets(), k ) ) == k + 1 );
  }
}

TEST_CASE( "adding examples never shrinks the feature set" )
{
  std::mt19937_64 rng( 30 );
  for ( int trial = 0; trial < 100; ++trial )
  {
    auto const d = consistent_data( 30, 8, 1, rng );
    std::vector<std::size_t> rows;
    std::size_t last = 0;
    for ( std::size_t r = 0; r < d.n_examples(); ++r )
    {
      rows.push_back( r );
      auto const s = d.subset( rows );
      auto const c = solve_minfs_exact( build_cover_instance( s.inputs(), s.targets(), 0 ) ).cardinality;
      REQUIRE( c >= last );
      last = c;
    }
  }
}

TEST_CASE( "overlap coefficient" )
{
  std::vector<std::size_t> a{ 1, 2 }, b{ 1, 2, 3 }, c{ 4, 5 }, d{ 1, 2, 3 }, e{ 3, 4 }, none;
  CHECK( overlap_coefficient( a, b ) == 1.0 );
  CHECK( overlap_coefficient( a, c ) == 0.0 );
  CHECK( overlap_coefficient( d, e ) == 0.5 );
  CHECK( overlap_coefficient( e, d ) == 0.5 );
  CHECK( overlap_coefficient( none, a ) == 0.0 );
}

TEST_CASE( "nestedness" )
{
  std::vector<std::vector<std::size_t>> chain{ { 0 }, { 0, 1 }, { 0, 1, 2 } };
  std::vector<std::vector<std::size_t>> disjoint{ { 0 }, { 1 }, { 2 } };
  std::vector<std::vector<std::size_t>> mixed{ { 1 }, { 1, 2 }, { 3 } };
  CHECK( nestedness( chain ) == 1.0 );
  CHECK( nestedness( disjoint ) == 0.0 );
  CHECK( nestedness( mixed ) == 0.5 );
  std::vector<std::vector<std::size_t>> single{ { 0 } };
  CHECK_THROWS_AS( nestedness( single ), argument_error );
}

TEST_CASE( "curriculum estimate" )
{
  SUBCASE( "full cascaded parity" )
  {
    auto const est = estimate_curriculum( gen_cpar( 7 ), 3 );
    CHECK( est.sizes == std::vector<std::size_t>{ 1, 2, 3, 4, 5, 6, 7 } );
    CHECK( est.order == curriculum::identity( 7 ) );
    REQUIRE( est.nestedness );
    CHECK( *est.nestedness == 1.0 );
  }
  SUBCASE( "disjoint singleton sets" )
  {
    // target 0 = x0, target 1 = x1
    auto const x = oracle::all_patterns( 2 );
    auto const est = estimate_curriculum( dataset( x, x ), 1 );
    CHECK( *est.nestedness == 0.0 );
  }
  SUBCASE( "identical targets tie and shuffle reproducibly" )
  {
    auto const x = oracle::all_patterns( 3 );
    bit_matrix t( 8, 4 );
    for ( std::size_t r = 0; r < 8; ++r )
      for ( std::size_t c = 0; c < 4; ++c )
        t.set( r, c, x.get( r, 0 ) != x.get( r, 1 ) );
    dataset d( x, t );
    auto const a = estimate_curriculum( d, 9 );
    CHECK( a.sizes == std::vector<std::size_t>{ 2, 2, 2, 2 } );
    CHECK( a.tie_groups.size() == 1 );
    CHECK( estimate_curriculum( d, 9 ).order == a.order );
    bool varies = false;
    for ( std::uint64_t s = 0; s < 20 && !varies; ++s )
      varies = estimate_curriculum( d, s ).order != a.order;
    CHECK( varies );
  }
  SUBCASE( "single target has no nestedness" )
  {
    auto const est = estimate_curriculum( gen_cpar( 1 ), 0 );
    CHECK_FALSE( est.nestedness );
  }
  SUBCASE( "contradictions name the target" )
  {
    auto const x = bit_matrix::from_rows( { { 0 }, { 0 } } );
    dataset d( x, bit_matrix::from_rows( { { 0, 1 }, { 0, 0 } } ), true );
    CHECK_THROWS_WITH_AS( estimate_curriculum( d, 0 ), doctest::Contains( "target 1" ), infeasible_error );
  }
}
