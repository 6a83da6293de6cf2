#include <fbn/minfs.hpp>

#include <fbn/errors.hpp>
#include <fbn/random.hpp>

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>
#include <unordered_set>

namespace fbn
{

namespace
{

std::vector<feature_mask> pack_rows( bit_matrix const& inputs )
{
  if ( inputs.cols() > max_cover_features )
  {
    throw argument_error( "minimum feature set solver supports at most 64 features, got " +
                          std::to_string( inputs.cols() ) );
  }
  std::vector<feature_mask> rows( inputs.rows() );
  for ( std::size_t r = 0; r < inputs.rows(); ++r )
  {
    rows[r] = inputs.cols() == 0 ? 0 : inputs.row_words( r )[0];
  }
  return rows;
}

template <class T>
void sort_unique( std::vector<T>& v )
{
  std::ranges::sort( v );
  v.erase( std::unique( v.begin(), v.end() ), v.end() );
}

} // namespace

std::vector<feature_mask> reduce_masks( std::vector<feature_mask> masks, std::size_t n_features )
{
  sort_unique( masks );
  if ( masks.size() < 2 )
  {
    return masks;
  }
  std::vector<feature_mask> kept;
  if ( n_features <= 20 )
  {
    // has_sub[s] is set when some present mask is a subset of s (sum over subsets)
    std::vector<std::uint8_t> has_sub( std::size_t{ 1 } << n_features, 0 );
    for ( auto m : masks )
    {
      has_sub[m] = 1;
    }
    for ( std::size_t b = 0; b < n_features; ++b )
    {
      auto const bit = std::size_t{ 1 } << b;
      for ( std::size_t s = 0; s < has_sub.size(); ++s )
      {
        if ( ( s & bit ) && has_sub[s ^ bit] )
        {
          has_sub[s] = 1;
        }
      }
    }
    for ( auto m : masks )
    {
      bool dominated = false;
      for ( auto rest = m; rest != 0 && !dominated; rest &= rest - 1 )
      {
        auto const bit = rest & ( ~rest + 1 );
        dominated = has_sub[m ^ bit] != 0;
      }
      if ( !dominated )
      {
        kept.push_back( m );
      }
    }
  }
  else
  {
    std::ranges::stable_sort( masks, {}, []( feature_mask m ) { return std::popcount( m ); } );
    for ( auto m : masks )
    {
      bool const dominated = std::ranges::any_of( kept, [m]( feature_mask k ) { return ( k & m ) == k; } );
      if ( !dominated )
      {
        kept.push_back( m );
      }
    }
    std::ranges::sort( kept );
  }
  return kept;
}

cover_instance build_cover_instance( bit_matrix const& inputs, std::span<std::uint8_t const> target )
{
  if ( inputs.rows() != target.size() )
  {
    throw argument_error( "target length does not match input rows" );
  }
  if ( target.empty() )
  {
    throw argument_error( "cover instance needs at least one example" );
  }
  auto const rows = pack_rows( inputs );
  std::vector<feature_mask> zeros, ones;
  for ( std::size_t r = 0; r < rows.size(); ++r )
  {
    ( target[r] ? ones : zeros ).push_back( rows[r] );
  }
  sort_unique( zeros );
  sort_unique( ones );

  std::vector<feature_mask> masks;
  auto const p = inputs.cols();
  auto add_all = [&]( auto&& emit ) {
    for ( auto a : zeros )
    {
      for ( auto b : ones )
      {
        auto const m = a ^ b;
        if ( m == 0 )
        {
          throw infeasible_error( "identical inputs with differing target values" );
        }
        emit( m );
      }
    }
  };
  if ( p <= 24 )
  {
    std::vector<bool> present( std::size_t{ 1 } << p, false );
    add_all( [&]( feature_mask m ) { present[m] = true; } );
    for ( std::size_t m = 1; m < present.size(); ++m )
    {
      if ( present[m] )
      {
        masks.push_back( m );
      }
    }
  }
  else
  {
    std::unordered_set<feature_mask> present;
    add_all( [&]( feature_mask m ) { present.insert( m ); } );
    masks.assign( present.begin(), present.end() );
  }

  cover_instance instance;
  instance.n_features = p;
  instance.pair_masks = reduce_masks( std::move( masks ), p );
  return instance;
}

cover_instance build_cover_instance( bit_matrix const& inputs, bit_matrix const& targets, std::size_t target_column )
{
  std::vector<std::uint8_t> column( targets.rows() );
  for ( std::size_t r = 0; r < targets.rows(); ++r )
  {
    column[r] = targets.get( r, target_column ) ? 1 : 0;
  }
  return build_cover_instance( inputs, column );
}

bool covers( feature_mask selection, std::span<feature_mask const> masks ) noexcept
{
  return std::ranges::all_of( masks, [selection]( feature_mask m ) { return ( m & selection ) != 0; } );
}

namespace
{

feature_set_result to_result( feature_mask selection, bool optimal )
{
  feature_set_result r;
  for ( auto rest = selection; rest != 0; rest &= rest - 1 )
  {
    r.features.push_back( static_cast<std::size_t>( std::countr_zero( rest ) ) );
  }
  r.cardinality = r.features.size();
  r.proven_optimal = optimal;
  return r;
}

/* Depth-bounded search for a cover of size <= budget. Branches on the
   uncovered mask with the fewest allowed features: one of its features must be
   chosen. Features tried in earlier sibling branches are excluded from later
   ones, so every subset is visited at most once. */
class cover_search
{
public:
  bool run( std::vector<feature_mask> const& masks, std::size_t budget )
  {
    found_ = 0;
    return dfs( masks, 0, ~feature_mask{ 0 }, budget );
  }

  feature_mask found() const noexcept { return found_; }

private:
  static std::size_t packing_bound( std::vector<feature_mask> const& uncovered, feature_mask allowed )
  {
    // masks that are pairwise disjoint each need their own feature
    feature_mask used = 0;
    std::size_t count = 0;
    for ( auto m : uncovered )
    {
      auto const e = m & allowed;
      if ( ( e & used ) == 0 )
      {
        used |= e;
        ++count;
      }
    }
    return count;
  }

  bool dfs( std::vector<feature_mask> const& uncovered, feature_mask chosen, feature_mask allowed, std::size_t budget )
  {
    if ( uncovered.empty() )
    {
      found_ = chosen;
      return true;
    }
    if ( budget == 0 )
    {
      return false;
    }

    std::size_t best_bits = max_cover_features + 1;
    feature_mask branch = 0;
    for ( auto m : uncovered )
    {
      auto const e = m & allowed;
      auto const bits = static_cast<std::size_t>( std::popcount( e ) );
      if ( bits == 0 )
      {
        return false;
      }
      if ( bits < best_bits )
      {
        best_bits = bits;
        branch = e;
      }
    }
    if ( packing_bound( uncovered, allowed ) > budget )
    {
      return false;
    }

    // try the features of the branching mask by descending coverage, lowest index on ties
    std::vector<std::pair<std::size_t, std::size_t>> candidates;
    for ( auto rest = branch; rest != 0; rest &= rest - 1 )
    {
      auto const f = static_cast<std::size_t>( std::countr_zero( rest ) );
      auto const bit = feature_mask{ 1 } << f;
      auto const cover =
          static_cast<std::size_t>( std::ranges::count_if( uncovered, [bit]( feature_mask m ) { return ( m & bit ) != 0; } ) );
      candidates.emplace_back( cover, f );
    }
    std::ranges::sort( candidates, []( auto const& a, auto const& b ) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    } );

    auto local_allowed = allowed;
    std::vector<feature_mask> next;
    next.reserve( uncovered.size() );
    for ( auto const& [cover, f] : candidates )
    {
      auto const bit = feature_mask{ 1 } << f;
      next.clear();
      for ( auto m : uncovered )
      {
        if ( ( m & bit ) == 0 )
        {
          next.push_back( m );
        }
      }
      if ( dfs( next, chosen | bit, local_allowed & ~bit, budget - 1 ) )
      {
        return true;
      }
      local_allowed &= ~bit;
    }
    return false;
  }

  feature_mask found_ = 0;
};

} // namespace

feature_set_result solve_minfs_greedy( cover_instance const& instance )
{
  std::vector<feature_mask> uncovered = instance.pair_masks;
  feature_mask chosen = 0;
  while ( !uncovered.empty() )
  {
    std::size_t best_feature = 0;
    std::size_t best_cover = 0;
    for ( std::size_t f = 0; f < instance.n_features; ++f )
    {
      auto const bit = feature_mask{ 1 } << f;
      auto const cover =
          static_cast<std::size_t>( std::ranges::count_if( uncovered, [bit]( feature_mask m ) { return ( m & bit ) != 0; } ) );
      if ( cover > best_cover )
      {
        best_cover = cover;
        best_feature = f;
      }
    }
    if ( best_cover == 0 )
    {
      throw argument_error( "cover instance contains an empty mask" );
    }
    auto const bit = feature_mask{ 1 } << best_feature;
    chosen |= bit;
    std::erase_if( uncovered, [bit]( feature_mask m ) { return ( m & bit ) != 0; } );
  }
  return to_result( chosen, false );
}

feature_set_result solve_minfs_exact( cover_instance const& instance )
{
  if ( instance.pair_masks.empty() )
  {
    return to_result( 0, true );
  }
  if ( std::ranges::any_of( instance.pair_masks, []( feature_mask m ) { return m == 0; } ) )
  {
    throw argument_error( "cover instance contains an empty mask" );
  }
  auto const upper = solve_minfs_greedy( instance ).cardinality;

  // most constrained masks first, which tightens the packing bound
  auto masks = instance.pair_masks;
  std::ranges::stable_sort( masks, {}, []( feature_mask m ) { return std::popcount( m ); } );

  cover_search search;
  for ( std::size_t k = 1; k <= upper; ++k )
  {
    if ( search.run( masks, k ) )
    {
      return to_result( search.found(), true );
    }
  }
  // unreachable: the greedy cover proves a cover of size `upper` exists
  throw std::logic_error( "exact cover search failed to reach the greedy bound" );
}

double overlap_coefficient( std::span<std::size_t const> a, std::span<std::size_t const> b )
{
  if ( a.empty() || b.empty() )
  {
    return 0.0;
  }
  std::vector<std::size_t> sa( a.begin(), a.end() ), sb( b.begin(), b.end() );
  sort_unique( sa );
  sort_unique( sb );
  std::vector<std::size_t> common;
  std::ranges::set_intersection( sa, sb, std::back_inserter( common ) );
  return static_cast<double>( common.size() ) / static_cast<double>( std::min( sa.size(), sb.size() ) );
}

double nestedness( std::span<std::vector<std::size_t> const> ordered_sets )
{
  if ( ordered_sets.size() < 2 )
  {
    throw argument_error( "nestedness needs at least two feature sets" );
  }
  double sum = 0.0;
  for ( std::size_t i = 1; i < ordered_sets.size(); ++i )
  {
    sum += overlap_coefficient( ordered_sets[i], ordered_sets[i - 1] );
  }
  return sum / static_cast<double>( ordered_sets.size() - 1 );
}

curriculum_estimate estimate_curriculum( dataset const& data, std::uint64_t seed )
{
  auto const m = data.n_targets();
  curriculum_estimate est;
  est.per_target.reserve( m );
  for ( std::size_t t = 0; t < m; ++t )
  {
    try
    {
      est.per_target.push_back( solve_minfs_exact( build_cover_instance( data.inputs(), data.targets(), t ) ) );
    }
    catch ( infeasible_error const& e )
    {
      throw infeasible_error( "target " + std::to_string( t ) + ": " + e.what() );
    }
    est.sizes.push_back( est.per_target.back().cardinality );
  }

  std::vector<std::size_t> order( m );
  std::iota( order.begin(), order.end(), std::size_t{ 0 } );
  rng_type rng( seed );
  std::shuffle( order.begin(), order.end(), rng );
  std::ranges::stable_sort( order, {}, [&]( std::size_t t ) { return est.sizes[t]; } );

  for ( std::size_t i = 0; i < m; )
  {
    auto j = i + 1;
    while ( j < m && est.sizes[order[j]] == est.sizes[order[i]] )
    {
      ++j;
    }
    if ( j - i > 1 )
    {
      est.tie_groups.emplace_back( order.begin() + static_cast<std::ptrdiff_t>( i ), order.begin() + static_cast<std::ptrdiff_t>( j ) );
    }
    i = j;
  }

  if ( m >= 2 )
  {
    std::vector<std::vector<std::size_t>> ordered;
    for ( auto t : order )
    {
      ordered.push_back( est.per_target[t].features );
    }
    est.nestedness = nestedness( ordered );
  }
  est.order = curriculum( std::move( order ) );
  return est;
}

} // namespace fbn
