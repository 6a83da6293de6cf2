#pragma once

#include <fbn/bitdata.hpp>
#include <fbn/random.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace fbn
{

using node_index = std::uint32_t;

/*! \brief Feedforward network of 2-input NAND gates.

  Nodes `0 .. l-1` are the inputs and node `l + g` is gate `g`. Output `j`
  is read from gate `n_gates - m + j`. The structure is a plain value and is
  not validated on construction; see check_feedforward.
*/
class network
{
public:
  using sources = std::array<node_index, 2>;

  network() = default;
  network( std::size_t n_inputs, std::size_t n_outputs, std::vector<sources> gates );

  std::size_t n_inputs() const noexcept { return n_inputs_; }
  std::size_t n_outputs() const noexcept { return n_outputs_; }
  std::size_t n_gates() const noexcept { return gates_.size(); }
  std::size_t n_nodes() const noexcept { return n_inputs_ + gates_.size(); }

  sources const& gate( std::size_t g ) const noexcept { return gates_[g]; }
  void set_source( std::size_t g, std::size_t slot, node_index src ) noexcept { gates_[g][slot] = src; }
  std::span<sources const> gates() const noexcept { return gates_; }

  /*! Node index feeding output `j`. */
  std::size_t output_node( std::size_t j ) const noexcept { return n_inputs_ + gates_.size() - n_outputs_ + j; }

  friend bool operator==( network const&, network const& ) = default;

private:
  std::size_t n_inputs_ = 0;
  std::size_t n_outputs_ = 0;
  std::vector<sources> gates_;
};

/*! \brief True iff every gate `g` reads only nodes `< l + g` and the output count fits. */
bool check_feedforward( network const& net ) noexcept;

network random_network( std::size_t n_inputs, std::size_t n_outputs, std::size_t n_gates, rng_type& rng );
network random_network( std::size_t n_inputs, std::size_t n_outputs, std::size_t n_gates, std::uint64_t seed );

/*! \brief A change of one gate input to a different, earlier node. */
struct move
{
  std::size_t gate = 0;
  std::size_t slot = 0;
  node_index old_source = 0;
  node_index new_source = 0;
};

move propose_move( network const& net, rng_type& rng );

inline void apply_move( network& net, move const& mv ) noexcept
{
  net.set_source( mv.gate, mv.slot, mv.new_source );
}

inline void revert_move( network& net, move const& mv ) noexcept
{
  net.set_source( mv.gate, mv.slot, mv.old_source );
}

/*! \brief Evaluates the network on every row of `inputs` (n x l), giving an n x m matrix. */
bit_matrix evaluate( network const& net, bit_matrix const& inputs );

/*! \brief Reusable bit-parallel evaluation workspace.

  Holds one bit-vector over all examples per node. Inputs are loaded once
  (transposed), gates are recomputed on demand. `evaluate_candidate` starts at
  the moved gate and recomputes only gates fed by a changed value, writing to a
  scratch buffer so that the committed values stay untouched until
  `commit_candidate`.
*/
class network_evaluator
{
public:
  network_evaluator( bit_matrix const& inputs, std::size_t n_gates );

  std::size_t n_examples() const noexcept { return n_examples_; }
  std::size_t words() const noexcept { return words_; }
  word_type last_word_mask() const noexcept { return last_mask_; }

  void evaluate( network const& net );
  void evaluate_candidate( network const& net, std::size_t from_gate );
  void commit_candidate();

  std::span<word_type const> node( std::size_t index ) const noexcept
  {
    return { values_.data() + index * words_, words_ };
  }
  /*! True when the last candidate evaluation changed the value of `index`. */
  bool candidate_changed( std::size_t index ) const noexcept { return changed_[index] != 0; }

  std::span<word_type const> candidate_node( std::size_t index ) const noexcept
  {
    return changed_[index] ? std::span<word_type const>{ scratch_.data() + index * words_, words_ } : node( index );
  }

private:
  std::size_t n_inputs_;
  std::size_t n_gates_;
  std::size_t n_examples_;
  std::size_t words_;
  word_type last_mask_;
  std::vector<word_type> values_;
  std::vector<word_type> scratch_;
  std::vector<std::uint8_t> changed_; // candidate value differs from the committed one
  std::vector<std::size_t> changed_list_;

  void clear_changes() noexcept;
};

/* Text format: "l m n_g" then one "src_a src_b" line per gate. */
void write_network( std::ostream& os, network const& net );
network read_network( std::istream& is );

} // namespace fbn
