#include <fbn/harness.hpp>

#include <fbn/errors.hpp>
#include <fbn/minfs.hpp>
#include <fbn/random.hpp>
#include <fbn/stats.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

namespace fbn
{

using nlohmann::json;
using nlohmann::ordered_json;

gate_budget parse_gate_budget( std::string const& text )
{
  auto digits = [&]( std::string const& s ) {
    if ( s.empty() || !std::ranges::all_of( s, []( char c ) { return c >= '0' && c <= '9'; } ) )
    {
      throw argument_error( "gate budget must be '<k>m' or a gate count, got '" + text + "'" );
    }
    return static_cast<std::size_t>( std::stoull( s ) );
  };
  gate_budget g;
  if ( !text.empty() && text.back() == 'm' )
  {
    g.per_target = digits( text.substr( 0, text.size() - 1 ) );
  }
  else
  {
    g.absolute = digits( text );
  }
  return g;
}

std::size_t default_history_length( problem_kind kind ) noexcept
{
  return kind == problem_kind::cpar ? 1000 : 250;
}

// ---------------------------------------------------------------------------
// configuration

namespace
{

void reject_unknown_keys( json const& obj, std::set<std::string> const& allowed, std::string const& where )
{
  if ( !obj.is_object() )
  {
    throw argument_error( where + " must be an object" );
  }
  for ( auto const& [key, value] : obj.items() )
  {
    if ( !allowed.contains( key ) )
    {
      throw argument_error( "unknown key '" + key + "' in " + where );
    }
  }
}

std::vector<std::size_t> index_list( json const& j, std::string const& what )
{
  if ( !j.is_array() )
  {
    throw argument_error( what + " must be an array" );
  }
  std::vector<std::size_t> out;
  for ( auto const& v : j )
  {
    if ( !v.is_number_integer() || v.get<std::int64_t>() < 0 )
    {
      throw argument_error( what + " must hold non-negative integers" );
    }
    out.push_back( v.get<std::size_t>() );
  }
  return out;
}

} // namespace

experiment_config parse_experiment_config( json const& doc )
{
  reject_unknown_keys( doc,
                       { "schema_version", "problem", "pool", "train_sizes", "replicates", "losses", "curriculum", "gates",
                         "lahc", "base_seed", "workers", "output", "record_timing" },
                       "config" );
  if ( !doc.contains( "schema_version" ) || doc["schema_version"] != config_schema_version )
  {
    throw argument_error( "config schema_version must be " + std::to_string( config_schema_version ) );
  }

  experiment_config cfg;
  auto const& problem = doc.at( "problem" );
  reject_unknown_keys( problem, { "kind", "n", "path", "known_order" }, "problem" );
  auto const kind = parse_problem_kind( problem.at( "kind" ).get<std::string>() );
  if ( kind == problem_kind::file )
  {
    cfg.problem.kind = kind;
    cfg.problem.path = problem.at( "path" ).get<std::string>();
    if ( problem.contains( "known_order" ) )
    {
      cfg.known_order = index_list( problem["known_order"], "problem.known_order" );
    }
  }
  else
  {
    cfg.problem = make_problem_spec( kind, problem.at( "n" ).get<std::size_t>() );
    if ( problem.contains( "known_order" ) )
    {
      throw argument_error( "known_order is only meaningful for file problems" );
    }
  }

  if ( doc.contains( "pool" ) )
  {
    auto const& pool = doc["pool"];
    reject_unknown_keys( pool, { "size", "seed" }, "pool" );
    if ( kind == problem_kind::file )
    {
      throw argument_error( "pool sampling applies to generated problems only" );
    }
    cfg.pool_sample = pool.at( "size" ).get<std::size_t>();
    cfg.pool_seed = pool.value( "seed", std::uint64_t{ 0 } );
  }

  cfg.train_sizes = index_list( doc.at( "train_sizes" ), "train_sizes" );
  if ( cfg.train_sizes.empty() )
  {
    throw argument_error( "train_sizes must not be empty" );
  }
  cfg.replicates = doc.value( "replicates", std::size_t{ 50 } );
  if ( cfg.replicates < 1 )
  {
    throw argument_error( "replicates must be >= 1" );
  }
  if ( doc.contains( "losses" ) )
  {
    cfg.losses.clear();
    for ( auto const& l : doc["losses"] )
    {
      cfg.losses.push_back( parse_loss_kind( l.get<std::string>() ) );
    }
    if ( cfg.losses.empty() )
    {
      throw argument_error( "losses must not be empty" );
    }
  }

  if ( doc.contains( "curriculum" ) )
  {
    auto const& cur = doc["curriculum"];
    reject_unknown_keys( cur, { "mode", "order", "taus", "permutations" }, "curriculum" );
    auto const mode = cur.at( "mode" ).get<std::string>();
    if ( mode == "given" )
    {
      cfg.mode = curriculum_mode::given;
      if ( cur.contains( "order" ) )
      {
        cfg.given_order = index_list( cur["order"], "curriculum.order" );
      }
    }
    else if ( mode == "auto" )
    {
      cfg.mode = curriculum_mode::automatic;
    }
    else if ( mode == "random_tau" )
    {
      cfg.mode = curriculum_mode::random_tau;
      if ( cur.contains( "taus" ) )
      {
        cfg.taus = cur["taus"].get<std::vector<double>>();
      }
      cfg.permutations_per_tau = cur.value( "permutations", std::size_t{ 10 } );
    }
    else
    {
      throw argument_error( "curriculum.mode must be given|auto|random_tau" );
    }
  }

  cfg.gates = parse_gate_budget( doc.value( "gates", std::string( "21m" ) ) );

  cfg.lahc.history_length = default_history_length( kind );
  if ( doc.contains( "lahc" ) )
  {
    auto const& l = doc["lahc"];
    reject_unknown_keys( l, { "history", "iterations", "restarts", "return_best" }, "lahc" );
    cfg.lahc.history_length = l.value( "history", cfg.lahc.history_length );
    cfg.lahc.iteration_limit = l.value( "iterations", cfg.lahc.iteration_limit );
    cfg.lahc.restart_limit = l.value( "restarts", cfg.lahc.restart_limit );
    cfg.lahc.return_best = l.value( "return_best", false );
  }
  if ( cfg.lahc.history_length == 0 || cfg.lahc.iteration_limit == 0 )
  {
    throw argument_error( "lahc.history and lahc.iterations must be positive" );
  }

  cfg.base_seed = doc.value( "base_seed", std::uint64_t{ 1 } );
  cfg.workers = std::max<std::size_t>( 1, doc.value( "workers", std::size_t{ 1 } ) );
  cfg.output = doc.value( "output", std::string{} );
  cfg.record_timing = doc.value( "record_timing", false );
  return cfg;
}

experiment_config load_experiment_config( std::string const& path )
{
  std::ifstream in( path );
  if ( !in )
  {
    throw argument_error( "cannot open config file " + path );
  }
  json doc;
  try
  {
    doc = json::parse( in );
  }
  catch ( json::parse_error const& e )
  {
    throw argument_error( "config " + path + " is not valid JSON: " + e.what() );
  }
  return parse_experiment_config( doc );
}

// ---------------------------------------------------------------------------
// records

namespace
{

ordered_json nullable( double v )
{
  return std::isnan( v ) ? ordered_json( nullptr ) : ordered_json( v );
}

} // namespace

ordered_json to_json( experiment_record const& r )
{
  ordered_json j;
  j["problem"] = r.problem;
  j["train_size"] = r.train_size;
  j["pool_size"] = r.pool_size;
  j["fraction"] = r.fraction();
  j["replicate"] = r.replicate;
  j["loss"] = std::string( to_string( r.loss ) );
  j["variant"] = r.variant;
  if ( r.permutation_index )
    j["permutation_index"] = *r.permutation_index;
  j["curriculum"] = r.curriculum;
  j["split_seed"] = r.split_seed;
  j["train_seed"] = r.train_seed;
  j["split_digest"] = r.split_digest;
  auto acc = ordered_json::array();
  for ( auto a : r.test_accuracy )
  {
    acc.push_back( nullable( a ) );
  }
  j["test_accuracy"] = acc;
  j["mean_test_accuracy"] = nullable( r.mean_test_accuracy );
  j["final_training_loss"] = r.final_training_loss;
  j["reached_zero"] = r.reached_zero;
  j["iterations"] = r.iterations;
  j["restarts"] = r.restarts;
  if ( r.tau )
    j["tau"] = *r.tau;
  if ( r.eta )
    j["eta"] = *r.eta;
  if ( r.mfs_sizes )
    j["mfs_sizes"] = *r.mfs_sizes;
  if ( r.wall_time )
    j["wall_time"] = *r.wall_time;
  if ( r.error )
    j["error"] = *r.error;
  return j;
}

std::string to_json_line( experiment_record const& r )
{
  return to_json( r ).dump();
}

experiment_record record_from_json( json const& j )
{
  auto number_or_nan = []( json const& v ) {
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  };
  experiment_record r;
  r.problem = j.at( "problem" ).get<std::string>();
  r.train_size = j.at( "train_size" ).get<std::size_t>();
  r.pool_size = j.at( "pool_size" ).get<std::size_t>();
  r.replicate = j.at( "replicate" ).get<std::size_t>();
  r.loss = parse_loss_kind( j.at( "loss" ).get<std::string>() );
  r.variant = j.at( "variant" ).get<std::string>();
  if ( j.contains( "permutation_index" ) )
    r.permutation_index = j["permutation_index"].get<std::size_t>();
  r.curriculum = j.at( "curriculum" ).get<std::vector<std::size_t>>();
  r.split_seed = j.at( "split_seed" ).get<std::uint64_t>();
  r.train_seed = j.at( "train_seed" ).get<std::uint64_t>();
  r.split_digest = j.at( "split_digest" ).get<std::uint64_t>();
  for ( auto const& a : j.at( "test_accuracy" ) )
  {
    r.test_accuracy.push_back( number_or_nan( a ) );
  }
  r.mean_test_accuracy = number_or_nan( j.at( "mean_test_accuracy" ) );
  r.final_training_loss = j.at( "final_training_loss" ).get<double>();
  r.reached_zero = j.at( "reached_zero" ).get<bool>();
  r.iterations = j.at( "iterations" ).get<std::size_t>();
  r.restarts = j.at( "restarts" ).get<std::size_t>();
  if ( j.contains( "tau" ) )
    r.tau = j["tau"].get<double>();
  if ( j.contains( "eta" ) )
    r.eta = j["eta"].get<double>();
  if ( j.contains( "mfs_sizes" ) )
    r.mfs_sizes = j["mfs_sizes"].get<std::vector<std::size_t>>();
  if ( j.contains( "wall_time" ) )
    r.wall_time = j["wall_time"].get<double>();
  if ( j.contains( "error" ) )
    r.error = j["error"].get<std::string>();
  return r;
}

std::vector<experiment_record> read_records( std::istream& is )
{
  std::vector<experiment_record> out;
  std::string line;
  std::size_t line_no = 0;
  while ( std::getline( is, line ) )
  {
    ++line_no;
    if ( line.empty() )
    {
      continue;
    }
    try
    {
      out.push_back( record_from_json( json::parse( line ) ) );
    }
    catch ( json::exception const& e )
    {
      throw parse_error( line_no, e.what() );
    }
  }
  return out;
}

std::uint64_t split_digest( std::vector<std::size_t> const& sorted_indices )
{
  std::uint64_t h = 0xcbf29ce484222325ull;
  for ( auto i : sorted_indices )
  {
    for ( int b = 0; b < 8; ++b )
    {
      h ^= ( static_cast<std::uint64_t>( i ) >> ( 8 * b ) ) & 0xffu;
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// running

namespace
{

constexpr std::uint64_t role_split = fnv1a( "split" );
constexpr std::uint64_t role_shuffle = fnv1a( "shuffle" );
constexpr std::uint64_t role_curriculum = fnv1a( "curriculum" );
constexpr std::uint64_t role_train = fnv1a( "train" );
constexpr std::uint64_t role_permutation = fnv1a( "permutation" );

struct problem_data
{
  dataset pool;
  std::vector<std::size_t> known_order; // empty when unknown
  std::string id;
};

problem_data load_problem( experiment_config const& cfg )
{
  problem_data p;
  // file pools may be contradictory (noisy measurements); such replicates are
  // flagged when a curriculum has to be estimated
  if ( cfg.problem.kind == problem_kind::file )
    p.pool = load_dataset( cfg.problem.path, true );
  else
    p.pool = cfg.pool_sample ? generate_sampled( cfg.problem, *cfg.pool_sample, cfg.pool_seed ) : generate( cfg.problem );
  p.id = cfg.problem.id();
  if ( cfg.pool_sample )
  {
    p.id += "@pool" + std::to_string( *cfg.pool_sample ) + ":" + std::to_string( cfg.pool_seed );
  }
  if ( cfg.problem.kind != problem_kind::file )
  {
    p.known_order = curriculum::identity( p.pool.n_targets() ).order();
  }
  else if ( cfg.known_order )
  {
    p.known_order = curriculum( *cfg.known_order ).order();
    if ( p.known_order.size() != p.pool.n_targets() )
    {
      throw argument_error( "known_order length does not match the number of targets" );
    }
  }
  for ( auto s : cfg.train_sizes )
  {
    if ( s == 0 || s > p.pool.n_examples() )
    {
      throw argument_error( "train size " + std::to_string( s ) + " outside (0, " +
                            std::to_string( p.pool.n_examples() ) + "]" );
    }
  }
  if ( cfg.given_order && cfg.given_order->size() != p.pool.n_targets() )
  {
    throw argument_error( "curriculum.order length does not match the number of targets" );
  }
  return p;
}

/* Everything shared by the jobs of one (size, replicate): the split, the
   training/test data in training column order and the curriculum. Training
   column k holds original target column_of[k]. */
struct replicate_context
{
  std::size_t size = 0;
  std::size_t replicate = 0;
  std::uint64_t split_seed = 0;
  std::uint64_t digest = 0;
  dataset train;
  dataset test;
  std::vector<std::size_t> column_of;
  curriculum order; // over training columns
  std::optional<double> tau;
  std::optional<double> eta;
  std::optional<std::vector<std::size_t>> mfs_sizes;
  std::optional<std::string> error;
};

std::vector<std::size_t> to_original( replicate_context const& ctx, curriculum const& order )
{
  std::vector<std::size_t> out;
  for ( auto k : order.order() )
  {
    out.push_back( ctx.column_of[k] );
  }
  return out;
}

std::optional<double> tau_against( std::vector<std::size_t> const& known, std::vector<std::size_t> const& order )
{
  if ( known.size() < 2 || known.size() != order.size() )
  {
    return std::nullopt;
  }
  return kendall_tau( known, order ).ratio();
}

replicate_context make_context( experiment_config const& cfg, problem_data const& prob, std::size_t size,
                                std::size_t replicate, curriculum_mode mode )
{
  replicate_context ctx;
  ctx.size = size;
  ctx.replicate = replicate;
  ctx.split_seed = derive_seed( cfg.base_seed, { size, replicate, role_split } );
  auto const split = make_sample_split( prob.pool, size, ctx.split_seed );
  ctx.digest = split_digest( split.train_indices );
  auto const m = prob.pool.n_targets();

  if ( mode == curriculum_mode::automatic )
  {
    // shuffle the target columns so no ordering information leaks into the estimate
    ctx.column_of = curriculum::identity( m ).order();
    rng_type rng( derive_seed( cfg.base_seed, { size, replicate, role_shuffle } ) );
    std::shuffle( ctx.column_of.begin(), ctx.column_of.end(), rng );
    ctx.train = prob.pool.subset( split.train_indices ).permute_targets( ctx.column_of );
    ctx.test = prob.pool.subset( split.test_indices ).permute_targets( ctx.column_of );
    try
    {
      auto const est = estimate_curriculum( ctx.train, derive_seed( cfg.base_seed, { size, replicate, role_curriculum } ) );
      ctx.order = est.order;
      ctx.eta = est.nestedness;
      std::vector<std::size_t> sizes( m );
      for ( std::size_t k = 0; k < m; ++k )
      {
        sizes[ctx.column_of[k]] = est.sizes[k];
      }
      ctx.mfs_sizes = sizes;
    }
    catch ( infeasible_error const& e )
    {
      ctx.error = std::string( "minimum feature set infeasible: " ) + e.what();
      ctx.order = curriculum::identity( m );
    }
  }
  else
  {
    ctx.column_of = curriculum::identity( m ).order();
    ctx.train = prob.pool.subset( split.train_indices );
    ctx.test = prob.pool.subset( split.test_indices );
    if ( cfg.given_order )
    {
      ctx.order = curriculum( *cfg.given_order );
    }
    else if ( !prob.known_order.empty() )
    {
      ctx.order = curriculum( prob.known_order );
    }
    else
    {
      ctx.order = curriculum::identity( m );
    }
  }
  ctx.tau = tau_against( prob.known_order, to_original( ctx, ctx.order ) );
  return ctx;
}

experiment_record train_record( experiment_config const& cfg, problem_data const& prob, replicate_context const& ctx,
                                loss_kind loss, curriculum const& order, std::uint64_t train_seed,
                                std::string variant )
{
  experiment_record r;
  r.problem = prob.id;
  r.train_size = ctx.size;
  r.pool_size = prob.pool.n_examples();
  r.replicate = ctx.replicate;
  r.loss = loss;
  r.variant = std::move( variant );
  r.curriculum = to_original( ctx, order );
  r.split_seed = ctx.split_seed;
  r.train_seed = train_seed;
  r.split_digest = ctx.digest;
  r.tau = tau_against( prob.known_order, r.curriculum );
  r.eta = ctx.eta;
  r.mfs_sizes = ctx.mfs_sizes;
  auto const m = prob.pool.n_targets();
  r.test_accuracy.assign( m, std::numeric_limits<double>::quiet_NaN() );
  r.mean_test_accuracy = std::numeric_limits<double>::quiet_NaN();
  if ( ctx.error )
  {
    r.error = ctx.error;
    return r;
  }

  auto const start = std::chrono::steady_clock::now();
  auto lahc = cfg.lahc;
  lahc.loss = loss;
  lahc.order = order;
  auto const result = lahc_train( ctx.train, lahc, cfg.gates.resolve( m ), train_seed );
  auto const acc = per_target_accuracy( result.net, ctx.test );
  for ( std::size_t k = 0; k < m; ++k )
  {
    r.test_accuracy[ctx.column_of[k]] = acc[k];
  }
  if ( ctx.test.n_examples() > 0 )
  {
    r.mean_test_accuracy = std::accumulate( acc.begin(), acc.end(), 0.0 ) / static_cast<double>( m );
  }
  r.final_training_loss = result.final_training_loss;
  r.reached_zero = result.reached_zero;
  r.iterations = result.iterations_used;
  r.restarts = result.restarts_used;
  if ( cfg.record_timing )
  {
    r.wall_time = std::chrono::duration<double>( std::chrono::steady_clock::now() - start ).count();
  }
  return r;
}

/* Runs jobs [skip, n) on `workers` threads and hands records to the sink in
   job order. All randomness lives in per-job seeds, so the stream does not
   depend on scheduling. */
void run_jobs( std::size_t n_jobs, std::size_t skip, std::size_t workers,
               std::function<experiment_record( std::size_t )> const& work, record_sink const& sink )
{
  if ( skip >= n_jobs )
  {
    return;
  }
  if ( workers <= 1 )
  {
    for ( std::size_t i = skip; i < n_jobs; ++i )
    {
      sink( work( i ) );
    }
    return;
  }

  std::mutex mtx;
  std::condition_variable cv;
  std::map<std::size_t, experiment_record> done;
  std::exception_ptr failure;
  std::atomic<std::size_t> next{ skip };
  std::atomic<bool> stop{ false };

  auto worker = [&] {
    for ( ;; )
    {
      auto const i = next.fetch_add( 1 );
      if ( i >= n_jobs || stop )
      {
        return;
      }
      try
      {
        auto rec = work( i );
        std::lock_guard lock( mtx );
        done.emplace( i, std::move( rec ) );
      }
      catch ( ... )
      {
        std::lock_guard lock( mtx );
        if ( !failure )
        {
          failure = std::current_exception();
        }
        stop = true;
      }
      cv.notify_all();
    }
  };

  std::vector<std::jthread> pool;
  for ( std::size_t w = 0; w < std::min( workers, n_jobs - skip ); ++w )
  {
    pool.emplace_back( worker );
  }
  for ( std::size_t emit = skip; emit < n_jobs; ++emit )
  {
    std::unique_lock lock( mtx );
    cv.wait( lock, [&] { return failure || done.contains( emit ); } );
    if ( failure )
    {
      lock.unlock();
      pool.clear();
      std::rethrow_exception( failure );
    }
    auto rec = std::move( done.at( emit ) );
    done.erase( emit );
    lock.unlock();
    sink( rec );
  }
}

std::string tau_label( double tau )
{
  char buf[32];
  std::snprintf( buf, sizeof buf, "tau=%+.6f", tau );
  return buf;
}

} // namespace

void run_experiment( experiment_config const& cfg, record_sink const& sink, std::size_t skip )
{
  if ( cfg.mode == curriculum_mode::random_tau )
  {
    throw argument_error( "random_tau configs run through the tau sweep" );
  }
  auto const prob = load_problem( cfg );
  auto const n_losses = cfg.losses.size();
  auto const n_jobs = cfg.train_sizes.size() * cfg.replicates * n_losses;
  std::string const variant = cfg.mode == curriculum_mode::automatic ? "auto" : "given";

  run_jobs( n_jobs, skip, cfg.workers,
            [&]( std::size_t job ) {
              auto const loss_idx = job % n_losses;
              auto const rep = ( job / n_losses ) % cfg.replicates;
              auto const size = cfg.train_sizes[job / ( n_losses * cfg.replicates )];
              auto const ctx = make_context( cfg, prob, size, rep, cfg.mode );
              auto const seed = derive_seed( cfg.base_seed, { size, rep, role_train } );
              return train_record( cfg, prob, ctx, cfg.losses[loss_idx], ctx.order, seed, variant );
            },
            sink );
}

std::vector<experiment_record> run_experiment( experiment_config const& config )
{
  std::vector<experiment_record> out;
  run_experiment( config, [&]( experiment_record const& r ) { out.push_back( r ); } );
  return out;
}

void run_tau_sweep( experiment_config const& cfg, record_sink const& sink, std::size_t skip )
{
  auto const prob = load_problem( cfg );
  if ( prob.known_order.empty() )
  {
    throw argument_error( "tau sweep needs a problem with a known target order" );
  }
  auto const m = prob.pool.n_targets();
  if ( m < 2 )
  {
    throw argument_error( "tau sweep needs at least two targets" );
  }

  std::vector<std::size_t> strata; // inversion counts
  if ( cfg.taus.empty() )
  {
    for ( auto q = m * ( m - 1 ) / 2 + 1; q-- > 0; )
    {
      strata.push_back( q );
    }
  }
  else
  {
    for ( auto t : cfg.taus )
    {
      strata.push_back( inversions_for_tau( m, t ) );
    }
  }

  std::vector<loss_kind> ordered;
  for ( auto l : cfg.losses )
  {
    if ( l != loss_kind::l1 )
    {
      ordered.push_back( l );
    }
  }
  if ( ordered.empty() )
  {
    ordered.push_back( loss_kind::lgh );
  }

  // job layout per (size, replicate): baseline first, then stratum x permutation x loss
  auto const per_rep = 1 + strata.size() * cfg.permutations_per_tau * ordered.size();
  auto const n_jobs = cfg.train_sizes.size() * cfg.replicates * per_rep;
  auto const pairs = m * ( m - 1 ) / 2;

  run_jobs( n_jobs, skip, cfg.workers,
            [&]( std::size_t job ) {
              auto const within = job % per_rep;
              auto const rep = ( job / per_rep ) % cfg.replicates;
              auto const size = cfg.train_sizes[job / ( per_rep * cfg.replicates )];
              auto const ctx = make_context( cfg, prob, size, rep, curriculum_mode::given );
              auto const base_train_seed = derive_seed( cfg.base_seed, { size, rep, role_train } );
              if ( within == 0 )
              {
                return train_record( cfg, prob, ctx, loss_kind::l1, curriculum( prob.known_order ), base_train_seed,
                                     "baseline" );
              }
              auto const rest = within - 1;
              auto const loss = ordered[rest % ordered.size()];
              auto const perm_idx = ( rest / ordered.size() ) % cfg.permutations_per_tau;
              auto const q = strata[rest / ( ordered.size() * cfg.permutations_per_tau )];

              rng_type prng( derive_seed( cfg.base_seed, { role_permutation, q, perm_idx } ) );
              auto const p = sample_permutation_with_inversions( m, q, prng );
              std::vector<std::size_t> order( m );
              for ( std::size_t k = 0; k < m; ++k )
              {
                order[k] = prob.known_order[p[k]];
              }
              auto const tau = static_cast<double>( static_cast<std::int64_t>( pairs ) - 2 * static_cast<std::int64_t>( q ) ) /
                               static_cast<double>( pairs );
              auto const seed = derive_seed( cfg.base_seed, { size, rep, role_train, q, perm_idx } );
              auto rec = train_record( cfg, prob, ctx, loss, curriculum( order ), seed, tau_label( tau ) );
              rec.permutation_index = perm_idx;
              return rec;
            },
            sink );
}

std::vector<experiment_record> run_tau_sweep( experiment_config const& config )
{
  std::vector<experiment_record> out;
  run_tau_sweep( config, [&]( experiment_record const& r ) { out.push_back( r ); } );
  return out;
}

std::size_t run_to_file( experiment_config const& config, bool tau_sweep, bool resume )
{
  if ( config.output.empty() )
  {
    throw argument_error( "config has no output path" );
  }
  std::size_t existing = 0;
  if ( resume )
  {
    std::ifstream in( config.output );
    std::string line;
    std::vector<std::string> complete;
    while ( std::getline( in, line ) )
    {
      if ( in.eof() || !json::accept( line ) )
      {
        break; // partial trailing line from an interrupted run
      }
      complete.push_back( line );
    }
    in.close();
    existing = complete.size();
    std::ofstream rewrite( config.output, std::ios::trunc );
    for ( auto const& l : complete )
    {
      rewrite << l << '\n';
    }
  }
  std::ofstream out( config.output, resume ? std::ios::app : std::ios::trunc );
  if ( !out )
  {
    throw argument_error( "cannot write records to " + config.output );
  }
  std::size_t written = 0;
  auto sink = [&]( experiment_record const& r ) {
    out << to_json_line( r ) << '\n';
    out.flush();
    ++written;
  };
  if ( tau_sweep )
  {
    run_tau_sweep( config, sink, existing );
  }
  else
  {
    run_experiment( config, sink, existing );
  }
  return written;
}

// ---------------------------------------------------------------------------
// summaries

std::vector<double> paired_differences( std::vector<experiment_record> const& records,
                                        std::function<bool( experiment_record const& )> const& keep, int target )
{
  using key = std::tuple<std::string, std::size_t, std::size_t, std::string>;
  std::map<key, experiment_record const*> baselines;
  for ( auto const& r : records )
  {
    if ( r.loss == loss_kind::l1 && !r.error )
    {
      baselines.emplace( key{ r.problem, r.train_size, r.replicate, r.variant }, &r );
    }
  }
  auto value = [target]( experiment_record const& r ) {
    return target < 0 ? r.mean_test_accuracy : r.test_accuracy.at( static_cast<std::size_t>( target ) );
  };
  std::vector<double> diffs;
  for ( auto const& r : records )
  {
    if ( r.error || !keep( r ) )
    {
      continue;
    }
    auto it = baselines.find( key{ r.problem, r.train_size, r.replicate, r.variant } );
    if ( it == baselines.end() )
    {
      it = baselines.find( key{ r.problem, r.train_size, r.replicate, "baseline" } );
    }
    if ( it == baselines.end() )
    {
      continue;
    }
    auto const d = value( r ) - value( *it->second );
    if ( !std::isnan( d ) )
    {
      diffs.push_back( d );
    }
  }
  return diffs;
}

summary summarize( std::vector<experiment_record> const& records, std::vector<std::string> const& group_by )
{
  if ( records.empty() )
  {
    throw argument_error( "no records to summarise" );
  }
  bool by_size = false, by_loss = false, by_variant = false;
  for ( auto const& g : group_by )
  {
    if ( g == "size" )
      by_size = true;
    else if ( g == "loss" )
      by_loss = true;
    else if ( g == "variant" )
      by_variant = true;
    else if ( g != "problem" )
      throw argument_error( "unknown group-by key '" + g + "' (expected size|loss|variant)" );
  }

  using group_key = std::tuple<std::string, std::size_t, std::string, std::string>;
  auto key_of = [&]( experiment_record const& r ) {
    return group_key{ r.problem, by_size ? r.train_size : 0, by_loss ? std::string( to_string( r.loss ) ) : "all",
                      by_variant ? r.variant : "" };
  };

  std::map<group_key, std::vector<experiment_record const*>> groups;
  for ( auto const& r : records )
  {
    if ( !r.error )
    {
      groups[key_of( r )].push_back( &r );
    }
  }

  summary s;
  for ( auto const& [k, members] : groups )
  {
    auto const& [problem, size, loss, variant] = k;
    auto const m = members.front()->test_accuracy.size();
    bool const is_l1 = loss == "l1";
    std::set<experiment_record const*> member_set( members.begin(), members.end() );
    auto keep = [&]( experiment_record const& r ) { return member_set.contains( &r ); };

    for ( int t = -1; t < static_cast<int>( m ); ++t )
    {
      std::vector<double> accs;
      for ( auto const* r : members )
      {
        auto const v = t < 0 ? r->mean_test_accuracy : r->test_accuracy[static_cast<std::size_t>( t )];
        if ( !std::isnan( v ) )
        {
          accs.push_back( v );
        }
      }
      if ( accs.empty() )
      {
        continue;
      }
      summary_row row;
      row.problem = problem;
      row.size = by_size ? std::to_string( size ) : "all";
      if ( by_size )
      {
        std::ostringstream f;
        f << members.front()->fraction();
        row.fraction = f.str();
      }
      row.loss = by_variant && !variant.empty() ? loss + ":" + variant : loss;
      row.target = t < 0 ? "mean" : std::to_string( t );
      row.mean_acc = std::accumulate( accs.begin(), accs.end(), 0.0 ) / static_cast<double>( accs.size() );
      row.count = accs.size();
      if ( is_l1 )
      {
        row.diff_vs_l1 = 0.0;
        row.ci95 = accs.size() >= 2 ? mean_ci( accs ).half_width : 0.0;
      }
      else
      {
        auto const diffs = paired_differences( records, keep, t );
        if ( diffs.empty() )
        {
          if ( t < 0 )
          {
            s.warnings.push_back( "no paired L1 baseline for group " + problem + " size " + row.size + " loss " +
                                  row.loss + "; skipped" );
          }
          continue;
        }
        auto const ci = diffs.size() >= 2 ? mean_ci( diffs ) : mean_interval{ diffs.front(), 0.0 };
        row.diff_vs_l1 = ci.mean;
        row.ci95 = ci.half_width;
      }
      s.rows.push_back( row );
    }
  }
  return s;
}

void write_summary_csv( std::ostream& os, summary const& s )
{
  os << "problem,size,fraction,loss,target,mean_acc,diff_vs_l1,ci95\n";
  for ( auto const& r : s.rows )
  {
    os << r.problem << ',' << r.size << ',' << r.fraction << ',' << r.loss << ',' << r.target << ',' << r.mean_acc
       << ',' << r.diff_vs_l1 << ',' << r.ci95 << '\n';
  }
}

} // namespace fbn
