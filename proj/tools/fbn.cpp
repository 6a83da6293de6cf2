// Command-line front end: data generation, MFS reports, single training runs
// and the experiment harness.

#include <fbn/bitdata.hpp>
#include <fbn/errors.hpp>
#include <fbn/harness.hpp>
#include <fbn/minfs.hpp>
#include <fbn/network.hpp>
#include <fbn/optimizer.hpp>
#include <fbn/problems.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

using namespace fbn;
using nlohmann::ordered_json;

namespace
{

std::vector<std::size_t> parse_index_list( std::string const& text )
{
  std::vector<std::size_t> out;
  std::stringstream ss( text );
  std::string item;
  while ( std::getline( ss, item, ',' ) )
  {
    if ( item.empty() || item.find_first_not_of( "0123456789" ) != std::string::npos )
    {
      throw argument_error( "bad index list '" + text + "'" );
    }
    out.push_back( std::stoull( item ) );
  }
  return out;
}

std::vector<std::string> split_keys( std::string const& text )
{
  std::vector<std::string> out;
  std::stringstream ss( text );
  std::string item;
  while ( std::getline( ss, item, ',' ) )
  {
    if ( !item.empty() )
      out.push_back( item );
  }
  return out;
}

ordered_json minfs_report( dataset const& data, std::uint64_t seed )
{
  auto const est = estimate_curriculum( data, seed );
  auto const m = data.n_targets();
  ordered_json report;
  report["n_examples"] = data.n_examples();
  report["n_inputs"] = data.n_inputs();
  report["n_targets"] = m;
  auto targets = ordered_json::array();
  for ( std::size_t k = 0; k < m; ++k )
  {
    targets.push_back( { { "target", k },
                         { "features", est.per_target[k].features },
                         { "size", est.sizes[k] },
                         { "proven_optimal", est.per_target[k].proven_optimal } } );
  }
  report["targets"] = targets;
  report["order"] = est.order.order();
  report["tie_groups"] = est.tie_groups;
  auto sigma = ordered_json::array();
  for ( std::size_t a = 0; a < m; ++a )
  {
    auto row = ordered_json::array();
    for ( std::size_t b = 0; b < m; ++b )
    {
      row.push_back( overlap_coefficient( est.per_target[a].features, est.per_target[b].features ) );
    }
    sigma.push_back( row );
  }
  report["overlap"] = sigma;
  report["nestedness"] = est.nestedness ? ordered_json( *est.nestedness ) : ordered_json( nullptr );
  return report;
}

void write_text( std::string const& path, auto&& writer )
{
  std::ofstream out( path );
  if ( !out )
  {
    throw argument_error( "cannot write " + path );
  }
  writer( out );
}

} // namespace

int main( int argc, char** argv )
{
  CLI::App app{ "Feedforward Boolean network training with curriculum losses" };
  app.require_subcommand( 1 );

  // generate
  auto* gen = app.add_subcommand( "generate", "Write a benchmark truth table as a dataset file" );
  std::string gen_kind, gen_out;
  std::size_t gen_n = 0, gen_sample = 0;
  std::uint64_t gen_seed = 0;
  gen->add_option( "--kind", gen_kind, "add|sub|cpar|cmaj|cmux" )->required();
  gen->add_option( "--n", gen_n, "Problem size" )->required();
  gen->add_option( "--out", gen_out, "Output dataset file" )->required();
  gen->add_option( "--sample", gen_sample, "Draw this many distinct patterns instead of the full table" );
  gen->add_option( "--seed", gen_seed, "Seed for --sample" );

  // pairs
  auto* pairs = app.add_subcommand( "pairs", "Turn a state time series into a transition dataset" );
  std::string pairs_in, pairs_out;
  pairs->add_option( "--in", pairs_in, "Time-series file" )->required();
  pairs->add_option( "--out", pairs_out, "Output dataset file" )->required();

  // minfs
  auto* mfs = app.add_subcommand( "minfs", "Exact minimum feature sets per target and the implied curriculum" );
  std::string mfs_data, mfs_out;
  std::uint64_t mfs_seed = 0;
  mfs->add_option( "--data", mfs_data, "Dataset file" )->required();
  mfs->add_option( "--seed", mfs_seed, "Seed for tie shuffling" );
  mfs->add_option( "--out", mfs_out, "Write the JSON report here instead of stdout" );

  // train
  auto* train = app.add_subcommand( "train", "Train one network with LAHC and print the result" );
  std::string tr_data, tr_loss = "l1", tr_cur = "identity", tr_gates = "21m", tr_save;
  std::size_t tr_history = 250, tr_iters = 200'000, tr_restarts = 9;
  std::uint64_t tr_seed = 1;
  bool tr_best = false;
  train->add_option( "--data", tr_data, "Dataset file" )->required();
  train->add_option( "--loss", tr_loss, "l1|lw|llh|lgh" );
  train->add_option( "--curriculum", tr_cur, "identity | auto | given:i,j,..." );
  train->add_option( "--gates", tr_gates, "'<k>m' or an absolute gate count" );
  train->add_option( "--history", tr_history, "LAHC history length" );
  train->add_option( "--iterations", tr_iters, "Iterations per attempt" );
  train->add_option( "--restarts", tr_restarts, "Restarts after the first attempt" );
  train->add_option( "--seed", tr_seed, "Training seed" );
  train->add_flag( "--best", tr_best, "Return the best network over all attempts" );
  train->add_option( "--save-network", tr_save, "Write the trained network to this file" );

  // experiment / tau-sweep
  std::string ex_config;
  bool ex_resume = false;
  std::size_t ex_workers = 0;
  auto* exp = app.add_subcommand( "experiment", "Run a paired-loss experiment from a config file" );
  auto* tau = app.add_subcommand( "tau-sweep", "Run a random-order tau sweep from a config file" );
  for ( auto* sc : { exp, tau } )
  {
    sc->add_option( "--config", ex_config, "JSON config file" )->required();
    sc->add_flag( "--resume", ex_resume, "Keep complete records already in the output file" );
    sc->add_option( "--workers", ex_workers, "Override the configured worker count" );
  }

  // summarize
  auto* sum = app.add_subcommand( "summarize", "Aggregate JSON-lines records into CSV" );
  std::string sum_in, sum_out, sum_group = "size,loss";
  sum->add_option( "--in", sum_in, "Records file" )->required();
  sum->add_option( "--group-by", sum_group, "Comma list of size, loss, variant" );
  sum->add_option( "--out", sum_out, "CSV output (stdout when absent)" );

  CLI11_PARSE( app, argc, argv );

  try
  {
    if ( gen->parsed() )
    {
      auto const spec = make_problem_spec( parse_problem_kind( gen_kind ), gen_n );
      auto const data = gen_sample ? generate_sampled( spec, gen_sample, gen_seed ) : generate( spec );
      save_dataset( gen_out, data );
      std::cerr << spec.id() << ": " << data.n_examples() << " examples, l = " << data.n_inputs()
                << ", m = " << data.n_targets() << "\n";
    }
    else if ( pairs->parsed() )
    {
      std::ifstream in( pairs_in );
      if ( !in )
        throw argument_error( "cannot open " + pairs_in );
      auto const result = timeseries_to_pairs( read_timeseries( in ) );
      save_dataset( pairs_out, result.data );
      std::cout << "examples: " << result.data.n_examples() << "\n"
                << "repeated states collapsed: " << result.repeats_removed << "\n"
                << "duplicate pairs removed: " << result.duplicate_pairs_removed << "\n"
                << "constant target columns removed:";
      for ( auto c : result.removed_targets )
        std::cout << ' ' << c;
      std::cout << "\nkept target columns:";
      for ( auto c : result.kept_targets )
        std::cout << ' ' << c;
      std::cout << "\n";
    }
    else if ( mfs->parsed() )
    {
      auto const report = minfs_report( load_dataset( mfs_data ), mfs_seed ).dump( 2 );
      if ( mfs_out.empty() )
        std::cout << report << "\n";
      else
        write_text( mfs_out, [&]( std::ostream& os ) { os << report << "\n"; } );
    }
    else if ( train->parsed() )
    {
      auto const data = load_dataset( tr_data );
      lahc_config cfg;
      cfg.loss = parse_loss_kind( tr_loss );
      cfg.history_length = tr_history;
      cfg.iteration_limit = tr_iters;
      cfg.restart_limit = tr_restarts;
      cfg.return_best = tr_best;
      if ( tr_cur == "auto" )
        cfg.order = estimate_curriculum( data, tr_seed ).order;
      else if ( tr_cur.starts_with( "given:" ) )
        cfg.order = curriculum( parse_index_list( tr_cur.substr( 6 ) ) );
      else if ( tr_cur == "identity" )
        cfg.order = curriculum::identity( data.n_targets() );
      else
        throw argument_error( "--curriculum must be identity, auto or given:i,j,..." );
      if ( cfg.order.size() != data.n_targets() )
        throw argument_error( "curriculum length does not match the number of targets" );
      if ( cfg.history_length == 0 || cfg.iteration_limit == 0 )
        throw argument_error( "--history and --iterations must be positive" );

      auto const n_gates = parse_gate_budget( tr_gates ).resolve( data.n_targets() );
      auto const result = lahc_train( data, cfg, n_gates, tr_seed );
      ordered_json j;
      j["loss"] = tr_loss;
      j["curriculum"] = cfg.order.order();
      j["n_gates"] = n_gates;
      j["final_training_loss"] = result.final_training_loss;
      j["iterations_used"] = result.iterations_used;
      j["restarts_used"] = result.restarts_used;
      j["reached_zero"] = result.reached_zero;
      j["best_training_loss"] = result.best_training_loss;
      j["training_accuracy"] = per_target_accuracy( result.net, data );
      std::cout << j.dump( 2 ) << "\n";
      if ( !tr_save.empty() )
        write_text( tr_save, [&]( std::ostream& os ) { write_network( os, result.net ); } );
    }
    else if ( exp->parsed() || tau->parsed() )
    {
      auto cfg = load_experiment_config( ex_config );
      if ( ex_workers > 0 )
        cfg.workers = ex_workers;
      bool const sweep = tau->parsed() || cfg.mode == curriculum_mode::random_tau;
      auto const written = run_to_file( cfg, sweep, ex_resume );
      std::cerr << "wrote " << written << " records to " << cfg.output << "\n";
    }
    else if ( sum->parsed() )
    {
      std::ifstream in( sum_in );
      if ( !in )
        throw argument_error( "cannot open " + sum_in );
      auto const s = summarize( read_records( in ), split_keys( sum_group ) );
      for ( auto const& w : s.warnings )
        std::cerr << "warning: " << w << "\n";
      if ( sum_out.empty() )
        write_summary_csv( std::cout, s );
      else
        write_text( sum_out, [&]( std::ostream& os ) { write_summary_csv( os, s ); } );
    }
  }
  catch ( std::exception const& e )
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
