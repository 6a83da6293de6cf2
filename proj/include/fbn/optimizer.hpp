#pragma once

#include <fbn/bitdata.hpp>
#include <fbn/loss.hpp>
#include <fbn/network.hpp>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace fbn
{

struct lahc_config
{
  std::size_t history_length = 250;
  std::size_t iteration_limit = 200'000;
  std::size_t restart_limit = 9;
  loss_kind loss = loss_kind::l1;
  curriculum order; // empty means identity
  bool return_best = false;
};

/*! \brief Late-acceptance rule: take the candidate if it beats the cost recorded
    one history length ago, or is no worse than the current cost. */
constexpr bool lahc_accepts( double candidate, double history_slot, double current ) noexcept
{
  return candidate < history_slot || candidate <= current;
}

struct lahc_stats
{
  double final_cost = 0.0;
  std::size_t iterations = 0;          // summed over all attempts
  std::size_t last_attempt_iterations = 0;
  std::size_t restarts = 0;            // attempts after the first
  bool reached_zero = false;
};

/*! \brief Late-Acceptance Hill Climbing with random restarts.

  `Problem` provides:
    double initialise();   // fresh random solution, returns its cost
    double propose();      // builds a neighbour of the current solution, returns its cost
    void accept();         // the neighbour becomes the current solution
    void reject();         // the neighbour is discarded
    void end_attempt( double cost );

  Each attempt fills the history with the initial cost, then on iteration `i`
  compares against slot `i mod L` and writes the (possibly updated) current
  cost back into that slot. An attempt stops at zero cost or after
  `iteration_limit` iterations; at most `restart_limit` restarts follow the
  first attempt.
*/
template <class Problem>
lahc_stats late_acceptance_search( Problem& problem, std::size_t history_length, std::size_t iteration_limit,
                                   std::size_t restart_limit )
{
  lahc_stats stats;
  std::vector<double> history( history_length );
  for ( std::size_t attempt = 0;; ++attempt )
  {
    double cost = problem.initialise();
    std::fill( history.begin(), history.end(), cost );
    std::size_t i = 0;
    while ( i < iteration_limit && cost != 0.0 )
    {
      double const candidate = problem.propose();
      auto const v = i % history_length;
      if ( lahc_accepts( candidate, history[v], cost ) )
      {
        problem.accept();
        cost = candidate;
      }
      else
      {
        problem.reject();
      }
      history[v] = cost;
      ++i;
    }
    stats.iterations += i;
    stats.last_attempt_iterations = i;
    stats.final_cost = cost;
    stats.restarts = attempt;
    problem.end_attempt( cost );
    if ( cost == 0.0 || attempt == restart_limit )
    {
      stats.reached_zero = cost == 0.0;
      return stats;
    }
  }
}

/*! \brief Selected loss of the network's predictions on `data`, with targets in curriculum order. */
double guiding_cost( network const& net, dataset const& data, loss_kind loss, curriculum const& order );

struct train_result
{
  network net;                // last attempt's network, or the best one when return_best is set
  double final_training_loss = 0.0;
  std::size_t iterations_used = 0;
  std::size_t restarts_used = 0;
  bool reached_zero = false;
  network best_network;       // lowest-cost network over all attempts
  double best_training_loss = 0.0;
};

/*! \brief Trains a NAND network of `n_gates` gates on `train` with LAHC.

  One RNG stream seeded from `seed` drives initialisation and move proposals.
*/
train_result lahc_train( dataset const& train, lahc_config const& config, std::size_t n_gates, std::uint64_t seed );

/*! \brief Fraction of correctly predicted examples per target; NaN for an empty dataset. */
std::vector<double> per_target_accuracy( network const& net, dataset const& data );

} // namespace fbn
