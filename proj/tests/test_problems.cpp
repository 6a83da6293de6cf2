#include <doctest.h>

#include <fbn/errors.hpp>
#include <fbn/problems.hpp>

#include "oracles.hpp"

#include <bit>
#include <filesystem>
#include <set>
#include <sstream>

using namespace fbn;

namespace
{

std::uint64_t row_value( bit_matrix const& m, std::size_t r, std::size_t from, std::size_t count )
{
  std::uint64_t v = 0;
  for ( std::size_t i = 0; i < count; ++i )
    v |= static_cast<std::uint64_t>( m.get( r, from + i ) ) << i;
  return v;
}

void check_exhaustive( dataset const& d, std::size_t l, std::size_t m )
{
  CHECK( d.n_inputs() == l );
  CHECK( d.n_targets() == m );
  REQUIRE( d.n_examples() == ( std::size_t{ 1 } << l ) );
  for ( std::size_t r = 0; r < d.n_examples(); ++r )
    REQUIRE( row_value( d.inputs(), r, 0, l ) == r );
}

} // namespace

TEST_CASE( "addition and subtraction agree with integer arithmetic" )
{
  for ( std::size_t n = 1; n <= 6; ++n )
  {
    auto const add = gen_add( n );
    auto const sub = gen_sub( n );
    check_exhaustive( add, 2 * n, n );
    check_exhaustive( sub, 2 * n, n );
    auto const mask = ( std::uint64_t{ 1 } << n ) - 1;
    for ( std::size_t r = 0; r < add.n_examples(); ++r )
    {
      auto const x = row_value( add.inputs(), r, 0, n );
      auto const y = row_value( add.inputs(), r, n, n );
      REQUIRE( row_value( add.targets(), r, 0, n ) == ( ( x + y ) & mask ) );
      REQUIRE( row_value( sub.targets(), r, 0, n ) == ( ( x - y ) & mask ) );
    }
  }
}

TEST_CASE( "addition and subtraction examples" )
{
  auto const spec2 = make_problem_spec( problem_kind::add, 2 );
  // x = 1, y = 1 -> 2
  CHECK( problem_targets( spec2, 0b0101 ) == std::vector<std::uint8_t>{ 0, 1 } );
  CHECK( problem_targets( make_problem_spec( problem_kind::add, 1 ), 0 ) == std::vector<std::uint8_t>{ 0 } );
  // x = 2, y = 1 -> 1
  CHECK( problem_targets( make_problem_spec( problem_kind::sub, 2 ), 0b0110 ) == std::vector<std::uint8_t>{ 1, 0 } );
  auto const sub3 = make_problem_spec( problem_kind::sub, 3 );
  for ( std::uint64_t x = 0; x < 8; ++x )
    CHECK( problem_targets( sub3, x | ( x << 3 ) ) == std::vector<std::uint8_t>{ 0, 0, 0 } );
}

TEST_CASE( "cascaded parity is a running xor" )
{
  auto const d = gen_cpar( 7 );
  check_exhaustive( d, 7, 7 );
  for ( std::size_t r = 0; r < d.n_examples(); ++r )
  {
    int acc = 0;
    for ( std::size_t i = 0; i < 7; ++i )
    {
      acc ^= static_cast<int>( d.inputs().get( r, i ) );
      REQUIRE( d.targets().get( r, i ) == ( acc == 1 ) );
    }
  }
  // x = 1010101 read left to right as x_0..x_6
  CHECK( problem_targets( make_problem_spec( problem_kind::cpar, 7 ), 0b1010101 ) ==
         std::vector<std::uint8_t>{ 1, 1, 0, 0, 1, 1, 0 } );
}

TEST_CASE( "cascaded majority is prefix strict majority" )
{
  auto const d = gen_cmaj( 9 );
  check_exhaustive( d, 9, 5 );
  for ( std::size_t r = 0; r < d.n_examples(); ++r )
    for ( std::size_t i = 0; i < 5; ++i )
    {
      auto const ones = std::popcount( r & ( ( std::uint64_t{ 1 } << ( 2 * i + 1 ) ) - 1 ) );
      REQUIRE( d.targets().get( r, i ) == ( static_cast<std::size_t>( ones ) > i ) );
    }
  auto const spec = make_problem_spec( problem_kind::cmaj, 9 );
  CHECK( problem_targets( spec, 0b11 ) == std::vector<std::uint8_t>{ 1, 1, 0, 0, 0 } );
  CHECK( problem_targets( spec, 0x1ff ) == std::vector<std::uint8_t>{ 1, 1, 1, 1, 1 } );
  CHECK_THROWS_AS( make_problem_spec( problem_kind::cmaj, 8 ), argument_error );
}

TEST_CASE( "cascaded multiplexer" )
{
  auto const n = 4u;
  auto const d = gen_cmux( n );
  check_exhaustive( d, 2 * n - 1, n - 1 );
  auto const spec = make_problem_spec( problem_kind::cmux, n );
  for ( std::uint64_t data = 0; data < 16; ++data )
  {
    // all selects 0: pass d_0 through
    auto const pass = problem_targets( spec, data );
    for ( auto z : pass )
      CHECK( z == ( data & 1u ) );
    // all selects 1: stage i picks d_{i+1}
    auto const pick = problem_targets( spec, data | ( 0b111u << n ) );
    for ( std::size_t i = 0; i < n - 1; ++i )
      CHECK( pick[i] == ( ( data >> ( i + 1 ) ) & 1u ) );
  }
  // independent chain recomputation on every row
  for ( std::size_t r = 0; r < d.n_examples(); ++r )
  {
    auto dbit = [&]( std::size_t i ) { return ( r >> i ) & 1u; };
    auto sbit = [&]( std::size_t i ) { return ( r >> ( n + i ) ) & 1u; };
    auto z = sbit( 0 ) ? dbit( 1 ) : dbit( 0 );
    REQUIRE( d.targets().get( r, 0 ) == ( z == 1 ) );
    for ( std::size_t i = 1; i < n - 1; ++i )
    {
      z = sbit( i ) ? dbit( i + 1 ) : z;
      REQUIRE( d.targets().get( r, i ) == ( z == 1 ) );
    }
  }
  CHECK_THROWS_AS( make_problem_spec( problem_kind::cmux, 1 ), argument_error );
}

TEST_CASE( "benchmark dimensions" )
{
  auto dims = []( problem_kind k, std::size_t n ) {
    auto const s = make_problem_spec( k, n );
    return std::tuple{ s.n_inputs, s.n_targets, s.pool_size };
  };
  CHECK( dims( problem_kind::cpar, 7 ) == std::tuple{ 7u, 7u, 128u } );
  CHECK( dims( problem_kind::cmaj, 9 ) == std::tuple{ 9u, 5u, 512u } );
  CHECK( dims( problem_kind::sub, 5 ) == std::tuple{ 10u, 5u, 1024u } );
  CHECK( dims( problem_kind::add, 6 ) == std::tuple{ 12u, 6u, 4096u } );
  CHECK( dims( problem_kind::cmux, 8 ) == std::tuple{ 15u, 7u, 32768u } );
  CHECK( gen_cmux( 8 ).n_examples() == 32768 );
}

TEST_CASE( "problem kind names" )
{
  for ( auto k : { problem_kind::add, problem_kind::sub, problem_kind::cpar, problem_kind::cmaj, problem_kind::cmux } )
    CHECK( parse_problem_kind( to_string( k ) ) == k );
  CHECK_THROWS_AS( parse_problem_kind( "xor" ), argument_error );
}

TEST_CASE( "sampled pools" )
{
  auto const spec = make_problem_spec( problem_kind::add, 5 );
  auto const d = generate_sampled( spec, 100, 7 );
  CHECK( d.n_examples() == 100 );
  CHECK( generate_sampled( spec, 100, 7 ) == d );
  std::set<std::uint64_t> seen;
  for ( std::size_t r = 0; r < d.n_examples(); ++r )
  {
    auto const p = row_value( d.inputs(), r, 0, 10 );
    CHECK( seen.insert( p ).second );
    std::vector<int> expect;
    for ( auto z : problem_targets( spec, p ) )
      expect.push_back( z );
    CHECK( d.targets().row( r ) == expect );
  }
  CHECK_THROWS_AS( generate_sampled( spec, 0, 1 ), argument_error );
  CHECK_THROWS_AS( generate_sampled( spec, 1025, 1 ), argument_error );
}

namespace
{
bit_matrix states( std::vector<std::string> const& rows )
{
  std::vector<std::vector<int>> v;
  for ( auto const& s : rows )
  {
    v.emplace_back();
    for ( char c : s )
      v.back().push_back( c - '0' );
  }
  return bit_matrix::from_rows( v );
}
} // namespace

TEST_CASE( "time series to pairs" )
{
  SUBCASE( "repeats collapse before pairing" )
  {
    auto const p = timeseries_to_pairs( states( { "01", "01", "10", "10", "01" } ) );
    CHECK( p.repeats_removed == 2 );
    REQUIRE( p.data.n_examples() == 2 );
    CHECK( p.data.inputs().row( 0 ) == std::vector<int>{ 0, 1 } );
    CHECK( p.data.targets().row( 0 ) == std::vector<int>{ 1, 0 } );
    // A, A, B leaves the single pair A -> B, whose targets are all constant
    CHECK_THROWS_AS( timeseries_to_pairs( states( { "01", "01", "10" } ) ), empty_problem_error );
  }
  SUBCASE( "constant columns are dropped and reported" )
  {
    auto const p = timeseries_to_pairs( states( { "001", "101", "011", "111" } ) );
    CHECK( p.removed_targets == std::vector<std::size_t>{ 2 } );
    CHECK( p.kept_targets == std::vector<std::size_t>{ 0, 1 } );
    CHECK( p.data.n_targets() == 2 );
    CHECK( p.data.n_inputs() == 3 );
  }
  SUBCASE( "duplicate pairs are removed" )
  {
    auto const p = timeseries_to_pairs( states( { "00", "11", "00", "11" } ) );
    CHECK( p.duplicate_pairs_removed == 1 );
    CHECK( p.data.n_examples() == 2 );
  }
  SUBCASE( "ten nodes, one constant target" )
  {
    auto const p = timeseries_to_pairs(
        states( { "1000000001", "0100000001", "0010000001", "0001000001", "0000100001",
                  "0000010001", "0000001001", "0000000101", "0000000011", "1000000001" } ) );
    CHECK( p.data.n_inputs() == 10 );
    CHECK( p.data.n_targets() == 9 );
    CHECK( p.removed_targets == std::vector<std::size_t>{ 9 } );
  }
  SUBCASE( "errors" )
  {
    CHECK_THROWS_AS( timeseries_to_pairs( states( { "01", "10", "01", "11" } ) ), infeasible_error );
    CHECK_THROWS_AS( timeseries_to_pairs( states( { "01", "01" } ) ), empty_problem_error );
    CHECK_THROWS_AS( timeseries_to_pairs( states( { "01" } ) ), argument_error );
  }
  SUBCASE( "output is consistent with no constant targets" )
  {
    std::mt19937_64 rng( 6 );
    int checked = 0;
    for ( int trial = 0; trial < 200; ++trial )
    {
      // a deterministic update rule guarantees consistency
      std::uint64_t s = rng() & 0x3f;
      bit_matrix st( 12, 6 );
      for ( std::size_t t = 0; t < 12; ++t )
      {
        for ( std::size_t c = 0; c < 6; ++c )
          st.set( t, c, ( s >> c ) & 1u );
        s = ( ( s * 5 + 3 ) ^ ( s >> 2 ) ) & 0x3f;
      }
      try
      {
        auto const p = timeseries_to_pairs( st );
        CHECK_FALSE( has_contradiction( p.data.inputs(), p.data.targets() ) );
        for ( std::size_t c = 0; c < p.data.n_targets(); ++c )
        {
          auto const ones = [&] {
            std::size_t k = 0;
            for ( std::size_t r = 0; r < p.data.n_examples(); ++r )
              k += p.data.targets().get( r, c );
            return k;
          }();
          CHECK( ones > 0 );
          CHECK( ones < p.data.n_examples() );
        }
        ++checked;
      }
      catch ( empty_problem_error const& )
      {
      }
    }
    CHECK( checked > 100 );
  }
}

TEST_CASE( "time series format" )
{
  std::istringstream ok( "3\n010\n110\n" );
  CHECK( read_timeseries( ok ) == states( { "010", "110" } ) );
  std::istringstream bad( "3\n010\n11\n" );
  try
  {
    read_timeseries( bad );
    FAIL( "expected parse_error" );
  }
  catch ( parse_error const& e )
  {
    CHECK( e.line() == 3 );
  }
}

TEST_CASE( "dataset files" )
{
  auto const path = std::filesystem::temp_directory_path() / "fbn_test_problems.txt";
  auto const d = gen_add( 2 );
  save_dataset( path, d );
  CHECK( load_dataset( path ) == d );
  std::filesystem::remove( path );
  CHECK_THROWS_AS( load_dataset( path ), argument_error );
}
