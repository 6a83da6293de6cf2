#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fbn
{

/*! \brief Malformed in-memory structure (ragged rows, shape mismatch on construction). */
class structural_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/*! \brief Precondition on an argument violated. */
class argument_error : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/*! \brief Text input could not be parsed; carries the 1-based line number. */
class parse_error : public std::runtime_error
{
public:
  parse_error( std::size_t line, const std::string& what )
      : std::runtime_error( "line " + std::to_string( line ) + ": " + what ), line_( line )
  {
  }

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/*! \brief Data is contradictory: identical inputs map to different targets. */
class infeasible_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/*! \brief Preprocessing left nothing to learn. */
class empty_problem_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

} // namespace fbn
