#include <fbn/network.hpp>

#include <fbn/errors.hpp>

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace fbn
{

network::network( std::size_t n_inputs, std::size_t n_outputs, std::vector<sources> gates )
    : n_inputs_( n_inputs ), n_outputs_( n_outputs ), gates_( std::move( gates ) )
{
}

bool check_feedforward( network const& net ) noexcept
{
  if ( net.n_outputs() > net.n_gates() )
  {
    return false;
  }
  for ( std::size_t g = 0; g < net.n_gates(); ++g )
  {
    auto const limit = net.n_inputs() + g;
    auto const& s = net.gate( g );
    if ( s[0] >= limit || s[1] >= limit )
    {
      return false;
    }
  }
  return true;
}

network random_network( std::size_t n_inputs, std::size_t n_outputs, std::size_t n_gates, rng_type& rng )
{
  if ( n_inputs < 1 )
  {
    throw argument_error( "network needs at least one input" );
  }
  if ( n_gates < n_outputs )
  {
    throw argument_error( "n_gates (" + std::to_string( n_gates ) + ") < n_outputs (" + std::to_string( n_outputs ) + ")" );
  }
  std::vector<network::sources> gates( n_gates );
  for ( std::size_t g = 0; g < n_gates; ++g )
  {
    std::uniform_int_distribution<node_index> pick( 0, static_cast<node_index>( n_inputs + g - 1 ) );
    gates[g][0] = pick( rng );
    gates[g][1] = pick( rng );
  }
  return network( n_inputs, n_outputs, std::move( gates ) );
}

network random_network( std::size_t n_inputs, std::size_t n_outputs, std::size_t n_gates, std::uint64_t seed )
{
  rng_type rng( seed );
  return random_network( n_inputs, n_outputs, n_gates, rng );
}

move propose_move( network const& net, rng_type& rng )
{
  // gate 0 with a single input has nowhere to move; every later gate does
  if ( net.n_gates() == 0 || ( net.n_inputs() + net.n_gates() - 1 < 2 ) )
  {
    throw argument_error( "network has no connection that can be moved" );
  }
  std::uniform_int_distribution<std::size_t> pick_connection( 0, 2 * net.n_gates() - 1 );
  for ( ;; )
  {
    auto const connection = pick_connection( rng );
    auto const g = connection / 2;
    auto const range = net.n_inputs() + g;
    if ( range < 2 )
    {
      continue;
    }
    move mv;
    mv.gate = g;
    mv.slot = connection % 2;
    mv.old_source = net.gate( g )[mv.slot];
    // uniform over the range minus the current source
    std::uniform_int_distribution<node_index> pick_source( 0, static_cast<node_index>( range - 2 ) );
    auto s = pick_source( rng );
    mv.new_source = s >= mv.old_source ? s + 1 : s;
    return mv;
  }
}

network_evaluator::network_evaluator( bit_matrix const& inputs, std::size_t n_gates )
    : n_inputs_( inputs.cols() ),
      n_gates_( n_gates ),
      n_examples_( inputs.rows() ),
      words_( words_for( inputs.rows() ) ),
      last_mask_( tail_mask( inputs.rows() ) ),
      values_( ( n_inputs_ + n_gates ) * words_, 0 ),
      scratch_( ( n_inputs_ + n_gates ) * words_, 0 ),
      changed_( n_inputs_ + n_gates, 0 )
{
  auto const t = inputs.transposed();
  for ( std::size_t c = 0; c < n_inputs_; ++c )
  {
    std::ranges::copy( t.row_words( c ), values_.begin() + static_cast<std::ptrdiff_t>( c * words_ ) );
  }
}

void network_evaluator::evaluate( network const& net )
{
  auto const W = words_;
  for ( std::size_t g = 0; g < n_gates_; ++g )
  {
    auto const& src = net.gate( g );
    word_type const* a = values_.data() + src[0] * W;
    word_type const* b = values_.data() + src[1] * W;
    word_type* out = values_.data() + ( n_inputs_ + g ) * W;
    for ( std::size_t w = 0; w < W; ++w )
    {
      out[w] = ~( a[w] & b[w] );
    }
    if ( W > 0 )
    {
      out[W - 1] &= last_mask_;
    }
  }
  clear_changes();
}

void network_evaluator::evaluate_candidate( network const& net, std::size_t from_gate )
{
  clear_changes();
  auto const W = words_;
  // only gates downstream of a value change are recomputed
  for ( std::size_t g = from_gate; g < n_gates_; ++g )
  {
    auto const& src = net.gate( g );
    if ( g != from_gate && !changed_[src[0]] && !changed_[src[1]] )
    {
      continue;
    }
    auto const node = n_inputs_ + g;
    word_type const* a = ( changed_[src[0]] ? scratch_.data() : values_.data() ) + src[0] * W;
    word_type const* b = ( changed_[src[1]] ? scratch_.data() : values_.data() ) + src[1] * W;
    word_type* out = scratch_.data() + node * W;
    word_type const* old = values_.data() + node * W;
    word_type diff = 0;
    for ( std::size_t w = 0; w < W; ++w )
    {
      out[w] = ~( a[w] & b[w] );
    }
    if ( W > 0 )
    {
      out[W - 1] &= last_mask_;
    }
    for ( std::size_t w = 0; w < W; ++w )
    {
      diff |= out[w] ^ old[w];
    }
    if ( diff != 0 )
    {
      changed_[node] = 1;
      changed_list_.push_back( node );
    }
  }
}

void network_evaluator::commit_candidate()
{
  for ( auto node : changed_list_ )
  {
    auto const begin = static_cast<std::ptrdiff_t>( node * words_ );
    std::copy( scratch_.begin() + begin, scratch_.begin() + begin + static_cast<std::ptrdiff_t>( words_ ),
               values_.begin() + begin );
  }
  clear_changes();
}

void network_evaluator::clear_changes() noexcept
{
  for ( auto node : changed_list_ )
  {
    changed_[node] = 0;
  }
  changed_list_.clear();
}

bit_matrix evaluate( network const& net, bit_matrix const& inputs )
{
  if ( inputs.cols() != net.n_inputs() )
  {
    throw argument_error( "input matrix has " + std::to_string( inputs.cols() ) + " columns, network expects " +
                          std::to_string( net.n_inputs() ) );
  }
  if ( !check_feedforward( net ) )
  {
    throw argument_error( "network violates the feedforward constraint" );
  }
  network_evaluator ev( inputs, net.n_gates() );
  ev.evaluate( net );
  bit_matrix by_output( net.n_outputs(), inputs.rows() );
  for ( std::size_t j = 0; j < net.n_outputs(); ++j )
  {
    std::ranges::copy( ev.node( net.output_node( j ) ), by_output.row_words( j ).begin() );
  }
  return by_output.transposed();
}

void write_network( std::ostream& os, network const& net )
{
  os << net.n_inputs() << ' ' << net.n_outputs() << ' ' << net.n_gates() << '\n';
  for ( auto const& s : net.gates() )
  {
    os << s[0] << ' ' << s[1] << '\n';
  }
}

network read_network( std::istream& is )
{
  std::string line;
  std::size_t line_no = 1;
  if ( !std::getline( is, line ) )
  {
    throw parse_error( 1, "missing header 'l m n_g'" );
  }
  std::size_t l = 0, m = 0, n_g = 0;
  {
    std::istringstream hs( line );
    std::string rest;
    if ( !( hs >> l >> m >> n_g ) || ( hs >> rest ) )
    {
      throw parse_error( 1, "header must be 'l m n_g'" );
    }
  }
  std::vector<network::sources> gates;
  gates.reserve( n_g );
  while ( gates.size() < n_g && std::getline( is, line ) )
  {
    ++line_no;
    std::istringstream ls( line );
    long long a = -1, b = -1;
    std::string rest;
    if ( !( ls >> a >> b ) || ( ls >> rest ) || a < 0 || b < 0 )
    {
      throw parse_error( line_no, "expected 'src_a src_b'" );
    }
    gates.push_back( { static_cast<node_index>( a ), static_cast<node_index>( b ) } );
  }
  if ( gates.size() != n_g )
  {
    throw parse_error( line_no, "expected " + std::to_string( n_g ) + " gate lines, got " + std::to_string( gates.size() ) );
  }
  network net( l, m, std::move( gates ) );
  if ( !check_feedforward( net ) )
  {
    throw parse_error( line_no, "network violates the feedforward constraint" );
  }
  return net;
}

} // namespace fbn
