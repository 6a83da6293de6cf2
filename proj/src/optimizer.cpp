#include <fbn/optimizer.hpp>

#include <fbn/errors.hpp>
#include <fbn/random.hpp>

#include <algorithm>
#include <limits>
#include <string>

namespace fbn
{

double guiding_cost( network const& net, dataset const& data, loss_kind loss, curriculum const& order )
{
  auto const predictions = evaluate( net, data.inputs() );
  auto const& ord = order.size() == 0 ? curriculum::identity( data.n_targets() ) : order;
  return compute_loss( loss, make_error_summary( data.targets(), predictions, ord ) );
}

namespace
{

/* LAHC problem over network structures. Candidate gates are evaluated into the
   evaluator's scratch buffer starting at the moved gate, so a rejected move
   costs one partial evaluation and nothing else. */
class network_training_problem
{
public:
  network_training_problem( dataset const& train, lahc_config const& config, std::size_t n_gates, std::uint64_t seed )
      : train_( train ),
        loss_( config.loss ),
        order_( config.order.size() == 0 ? curriculum::identity( train.n_targets() ) : config.order ),
        n_gates_( n_gates ),
        rng_( seed ),
        evaluator_( train.inputs(), n_gates ),
        errors_( train.n_examples(), train.n_targets() ),
        buffer_( evaluator_.words() )
  {
    auto const t = train.targets().transposed();
    targets_by_position_.reserve( order_.size() );
    for ( std::size_t k = 0; k < order_.size(); ++k )
    {
      auto const row = t.row_words( order_[k] );
      targets_by_position_.emplace_back( row.begin(), row.end() );
    }
  }

  double initialise()
  {
    current_ = random_network( train_.n_inputs(), train_.n_targets(), n_gates_, rng_ );
    evaluator_.evaluate( current_ );
    current_cost_ = cost_of( [this]( std::size_t node ) { return evaluator_.node( node ); } );
    return current_cost_;
  }

  double propose()
  {
    pending_ = propose_move( current_, rng_ );
    apply_move( current_, pending_ );
    evaluator_.evaluate_candidate( current_, pending_.gate );
    bool outputs_changed = false;
    for ( std::size_t j = 0; j < current_.n_outputs() && !outputs_changed; ++j )
    {
      outputs_changed = evaluator_.candidate_changed( current_.output_node( j ) );
    }
    pending_cost_ = outputs_changed ? cost_of( [this]( std::size_t node ) { return evaluator_.candidate_node( node ); } )
                                    : current_cost_;
    return pending_cost_;
  }

  void accept()
  {
    evaluator_.commit_candidate();
    current_cost_ = pending_cost_;
  }

  void reject() { revert_move( current_, pending_ ); }

  void end_attempt( double cost )
  {
    if ( !has_best_ || cost < best_cost_ )
    {
      best_ = current_;
      best_cost_ = cost;
      has_best_ = true;
    }
  }

  network const& current() const noexcept { return current_; }
  network const& best() const noexcept { return best_; }
  double best_cost() const noexcept { return best_cost_; }

private:
  template <class NodeFn>
  double cost_of( NodeFn&& node )
  {
    auto const W = evaluator_.words();
    for ( std::size_t k = 0; k < order_.size(); ++k )
    {
      auto const out = node( current_.output_node( order_[k] ) );
      auto const& y = targets_by_position_[k];
      for ( std::size_t w = 0; w < W; ++w )
      {
        buffer_[w] = out[w] ^ y[w];
      }
      errors_.assign( k, buffer_ );
    }
    return compute_loss( loss_, errors_ );
  }

  dataset const& train_;
  loss_kind loss_;
  curriculum order_;
  std::size_t n_gates_;
  rng_type rng_;
  network_evaluator evaluator_;
  error_summary errors_;
  std::vector<word_type> buffer_;
  std::vector<std::vector<word_type>> targets_by_position_;
  network current_;
  move pending_;
  double current_cost_ = 0.0;
  double pending_cost_ = 0.0;
  network best_;
  double best_cost_ = 0.0;
  bool has_best_ = false;
};

} // namespace

train_result lahc_train( dataset const& train, lahc_config const& config, std::size_t n_gates, std::uint64_t seed )
{
  if ( train.n_examples() == 0 )
  {
    throw argument_error( "training set is empty" );
  }
  if ( n_gates < train.n_targets() )
  {
    throw argument_error( "n_gates (" + std::to_string( n_gates ) + ") < number of targets (" +
                          std::to_string( train.n_targets() ) + ")" );
  }
  if ( config.history_length == 0 || config.iteration_limit == 0 )
  {
    throw argument_error( "history length and iteration limit must be positive" );
  }
  if ( config.order.size() != 0 && config.order.size() != train.n_targets() )
  {
    throw argument_error( "curriculum length does not match the number of targets" );
  }

  network_training_problem problem( train, config, n_gates, seed );
  auto const stats = late_acceptance_search( problem, config.history_length, config.iteration_limit, config.restart_limit );

  train_result result;
  result.iterations_used = stats.iterations;
  result.restarts_used = stats.restarts;
  result.best_network = problem.best();
  result.best_training_loss = problem.best_cost();
  if ( config.return_best )
  {
    result.net = problem.best();
    result.final_training_loss = problem.best_cost();
  }
  else
  {
    result.net = problem.current();
    result.final_training_loss = stats.final_cost;
  }
  result.reached_zero = result.final_training_loss == 0.0;
  return result;
}

std::vector<double> per_target_accuracy( network const& net, dataset const& data )
{
  std::vector<double> acc( data.n_targets(), std::numeric_limits<double>::quiet_NaN() );
  if ( data.n_examples() == 0 )
  {
    return acc;
  }
  auto const predictions = evaluate( net, data.inputs() );
  auto const errors = make_error_summary( data.targets(), predictions, curriculum::identity( data.n_targets() ) );
  for ( std::size_t j = 0; j < data.n_targets(); ++j )
  {
    acc[j] = 1.0 - static_cast<double>( errors.error_count( j ) ) / static_cast<double>( data.n_examples() );
  }
  return acc;
}

} // namespace fbn
