#include <fbn/problems.hpp>

#include <fbn/errors.hpp>
#include <fbn/random.hpp>

#include <algorithm>
#include <bit>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>
#include <string>
#include <unordered_set>

namespace fbn
{

std::string_view to_string( problem_kind kind ) noexcept
{
  switch ( kind )
  {
  case problem_kind::add:
    return "add";
  case problem_kind::sub:
    return "sub";
  case problem_kind::cpar:
    return "cpar";
  case problem_kind::cmaj:
    return "cmaj";
  case problem_kind::cmux:
    return "cmux";
  case problem_kind::file:
    return "file";
  }
  return "?";
}

problem_kind parse_problem_kind( std::string_view text )
{
  for ( auto k : { problem_kind::add, problem_kind::sub, problem_kind::cpar, problem_kind::cmaj, problem_kind::cmux,
                   problem_kind::file } )
  {
    if ( text == to_string( k ) )
    {
      return k;
    }
  }
  throw argument_error( "unknown problem kind '" + std::string( text ) + "' (expected add|sub|cpar|cmaj|cmux|file)" );
}

std::string problem_spec::id() const
{
  if ( kind == problem_kind::file )
  {
    return "file:" + path;
  }
  return std::string( to_string( kind ) ) + std::to_string( n );
}

problem_spec make_problem_spec( problem_kind kind, std::size_t n )
{
  problem_spec spec;
  spec.kind = kind;
  spec.n = n;
  switch ( kind )
  {
  case problem_kind::add:
  case problem_kind::sub:
    if ( n < 1 )
      throw argument_error( "add/sub need n >= 1" );
    spec.n_inputs = 2 * n;
    spec.n_targets = n;
    break;
  case problem_kind::cpar:
    if ( n < 1 )
      throw argument_error( "cpar needs n >= 1" );
    spec.n_inputs = n;
    spec.n_targets = n;
    break;
  case problem_kind::cmaj:
    if ( n < 1 || n % 2 == 0 )
      throw argument_error( "cmaj needs an odd n >= 1, got " + std::to_string( n ) );
    spec.n_inputs = n;
    spec.n_targets = ( n + 1 ) / 2;
    break;
  case problem_kind::cmux:
    if ( n < 2 )
      throw argument_error( "cmux needs n >= 2" );
    spec.n_inputs = 2 * n - 1;
    spec.n_targets = n - 1;
    break;
  case problem_kind::file:
    throw argument_error( "file problems take their dimensions from the data" );
  }
  if ( spec.n_inputs > 63 )
  {
    throw argument_error( "generated problems support at most 63 inputs" );
  }
  spec.pool_size = std::size_t{ 1 } << spec.n_inputs;
  return spec;
}

std::vector<std::uint8_t> problem_targets( problem_spec const& spec, std::uint64_t pattern )
{
  auto bit = [pattern]( std::size_t i ) -> bool { return ( pattern >> i ) & 1u; };
  auto const n = spec.n;
  std::vector<std::uint8_t> z( spec.n_targets );
  switch ( spec.kind )
  {
  case problem_kind::add: {
    bool carry = false;
    for ( std::size_t i = 0; i < n; ++i )
    {
      bool const x = bit( i ), y = bit( n + i );
      z[i] = x ^ y ^ carry;
      carry = ( x && y ) || ( carry && ( x ^ y ) );
    }
    break;
  }
  case problem_kind::sub: {
    bool borrow = false;
    for ( std::size_t i = 0; i < n; ++i )
    {
      bool const x = bit( i ), y = bit( n + i );
      z[i] = x ^ y ^ borrow;
      borrow = ( !x && y ) || ( borrow && !( x ^ y ) );
    }
    break;
  }
  case problem_kind::cpar: {
    bool parity = false;
    for ( std::size_t i = 0; i < n; ++i )
    {
      parity ^= bit( i );
      z[i] = parity;
    }
    break;
  }
  case problem_kind::cmaj: {
    // z_i: strict majority of the odd-length prefix x_0..x_{2i}
    std::size_t ones = bit( 0 );
    z[0] = ones > 0;
    for ( std::size_t i = 1; i < spec.n_targets; ++i )
    {
      ones += bit( 2 * i - 1 ) + bit( 2 * i );
      z[i] = ones > i;
    }
    break;
  }
  case problem_kind::cmux: {
    // inputs d_0..d_{n-1} then s_0..s_{n-2}; stage i selects between z_{i-1} and d_{i+1}
    auto d = [&]( std::size_t i ) { return bit( i ); };
    auto s = [&]( std::size_t i ) { return bit( n + i ); };
    bool prev = s( 0 ) ? d( 1 ) : d( 0 );
    z[0] = prev;
    for ( std::size_t i = 1; i + 1 < n; ++i )
    {
      prev = s( i ) ? d( i + 1 ) : prev;
      z[i] = prev;
    }
    break;
  }
  case problem_kind::file:
    throw argument_error( "file problems have no generator" );
  }
  return z;
}

namespace
{

dataset build_from_patterns( problem_spec const& spec, std::span<std::uint64_t const> patterns )
{
  bit_matrix inputs( patterns.size(), spec.n_inputs );
  bit_matrix targets( patterns.size(), spec.n_targets );
  for ( std::size_t r = 0; r < patterns.size(); ++r )
  {
    if ( spec.n_inputs > 0 )
    {
      inputs.row_words( r )[0] = patterns[r];
      inputs.clear_padding( r );
    }
    auto const z = problem_targets( spec, patterns[r] );
    for ( std::size_t j = 0; j < z.size(); ++j )
    {
      targets.set( r, j, z[j] != 0 );
    }
  }
  // every row is a distinct pattern, so the consistency check cannot fail
  return dataset( std::move( inputs ), std::move( targets ), true );
}

constexpr std::size_t max_full_inputs = 24;

} // namespace

dataset generate( problem_spec const& spec )
{
  if ( spec.kind == problem_kind::file )
  {
    return load_dataset( spec.path );
  }
  if ( spec.n_inputs > max_full_inputs )
  {
    throw argument_error( "full truth table of " + std::to_string( spec.n_inputs ) +
                          " inputs is too large; use a sampled pool" );
  }
  std::vector<std::uint64_t> patterns( spec.pool_size );
  std::iota( patterns.begin(), patterns.end(), std::uint64_t{ 0 } );
  return build_from_patterns( spec, patterns );
}

dataset generate_sampled( problem_spec const& spec, std::size_t pool_size, std::uint64_t seed )
{
  auto const total = spec.pool_size;
  if ( pool_size == 0 || pool_size > total )
  {
    throw argument_error( "sample pool size must be in (0, 2^l]" );
  }
  rng_type rng( seed );
  std::vector<std::uint64_t> patterns;
  if ( spec.n_inputs <= 22 )
  {
    std::vector<std::uint64_t> all( total );
    std::iota( all.begin(), all.end(), std::uint64_t{ 0 } );
    for ( std::size_t i = 0; i < pool_size; ++i )
    {
      std::uniform_int_distribution<std::size_t> pick( i, total - 1 );
      std::swap( all[i], all[pick( rng )] );
    }
    patterns.assign( all.begin(), all.begin() + static_cast<std::ptrdiff_t>( pool_size ) );
  }
  else
  {
    std::unordered_set<std::uint64_t> seen;
    std::uniform_int_distribution<std::uint64_t> pick( 0, total - 1 );
    while ( patterns.size() < pool_size )
    {
      auto const p = pick( rng );
      if ( seen.insert( p ).second )
      {
        patterns.push_back( p );
      }
    }
  }
  std::ranges::sort( patterns );
  return build_from_patterns( spec, patterns );
}

dataset gen_add( std::size_t n ) { return generate( make_problem_spec( problem_kind::add, n ) ); }
dataset gen_sub( std::size_t n ) { return generate( make_problem_spec( problem_kind::sub, n ) ); }
dataset gen_cpar( std::size_t n ) { return generate( make_problem_spec( problem_kind::cpar, n ) ); }
dataset gen_cmaj( std::size_t n ) { return generate( make_problem_spec( problem_kind::cmaj, n ) ); }
dataset gen_cmux( std::size_t n ) { return generate( make_problem_spec( problem_kind::cmux, n ) ); }

state_pairs timeseries_to_pairs( bit_matrix const& states )
{
  if ( states.rows() < 2 )
  {
    throw argument_error( "time series needs at least two states" );
  }
  state_pairs out;

  std::vector<std::size_t> kept_states{ 0 };
  for ( std::size_t t = 1; t < states.rows(); ++t )
  {
    if ( std::ranges::equal( states.row_words( t ), states.row_words( kept_states.back() ) ) )
    {
      ++out.repeats_removed;
    }
    else
    {
      kept_states.push_back( t );
    }
  }
  if ( kept_states.size() < 2 )
  {
    throw empty_problem_error( "time series has a single distinct state after repeat removal" );
  }

  std::vector<std::size_t> from, to;
  std::set<std::pair<std::vector<int>, std::vector<int>>> seen;
  for ( std::size_t k = 0; k + 1 < kept_states.size(); ++k )
  {
    auto key = std::make_pair( states.row( kept_states[k] ), states.row( kept_states[k + 1] ) );
    if ( !seen.insert( std::move( key ) ).second )
    {
      ++out.duplicate_pairs_removed;
      continue;
    }
    from.push_back( kept_states[k] );
    to.push_back( kept_states[k + 1] );
  }

  auto const inputs = states.select_rows( from );
  auto const outputs = states.select_rows( to );
  if ( has_contradiction( inputs, outputs ) )
  {
    throw infeasible_error( "time series maps one state to two different successors" );
  }

  for ( std::size_t c = 0; c < outputs.cols(); ++c )
  {
    bool const first = outputs.get( 0, c );
    bool constant = true;
    for ( std::size_t r = 1; r < outputs.rows() && constant; ++r )
    {
      constant = outputs.get( r, c ) == first;
    }
    ( constant ? out.removed_targets : out.kept_targets ).push_back( c );
  }
  if ( out.kept_targets.empty() )
  {
    throw empty_problem_error( "every target is constant after preprocessing" );
  }
  out.data = dataset( inputs, outputs.select_cols( out.kept_targets ) );
  return out;
}

bit_matrix read_timeseries( std::istream& is )
{
  std::string line;
  if ( !std::getline( is, line ) )
  {
    throw parse_error( 1, "missing header line 'w'" );
  }
  if ( line.empty() || !std::ranges::all_of( line, []( char c ) { return c >= '0' && c <= '9'; } ) )
  {
    throw parse_error( 1, "header must be the state width" );
  }
  auto const width = std::stoull( line );
  std::vector<std::vector<int>> rows;
  std::size_t line_no = 1;
  while ( std::getline( is, line ) )
  {
    ++line_no;
    if ( line.size() != width )
    {
      throw parse_error( line_no, "expected " + std::to_string( width ) + " characters, got " +
                                      std::to_string( line.size() ) );
    }
    std::vector<int> row( width );
    for ( std::size_t c = 0; c < width; ++c )
    {
      if ( line[c] != '0' && line[c] != '1' )
      {
        throw parse_error( line_no, std::string( "invalid character '" ) + line[c] + "'" );
      }
      row[c] = line[c] - '0';
    }
    rows.push_back( std::move( row ) );
  }
  auto m = bit_matrix::from_rows( rows );
  return rows.empty() ? bit_matrix( 0, width ) : m;
}

dataset load_dataset( std::filesystem::path const& path, bool allow_inconsistent )
{
  std::ifstream in( path );
  if ( !in )
  {
    throw argument_error( "cannot open dataset file " + path.string() );
  }
  return read_dataset( in, allow_inconsistent );
}

void save_dataset( std::filesystem::path const& path, dataset const& data )
{
  std::ofstream out( path );
  if ( !out )
  {
    throw argument_error( "cannot write dataset file " + path.string() );
  }
  write_dataset( out, data );
}

} // namespace fbn
