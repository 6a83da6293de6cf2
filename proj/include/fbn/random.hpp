#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace fbn
{

using rng_type = std::mt19937_64;

/*! \brief One round of the splitmix64 finaliser. */
constexpr std::uint64_t splitmix64( std::uint64_t x ) noexcept
{
  x += 0x9e3779b97f4a7c15ull;
  x = ( x ^ ( x >> 30 ) ) * 0xbf58476d1ce4e5b9ull;
  x = ( x ^ ( x >> 27 ) ) * 0x94d049bb133111ebull;
  return x ^ ( x >> 31 );
}

/*! \brief Derives a child seed from a parent seed and a list of integer keys.
 *
 * seed_0 = splitmix64(base); seed_{k+1} = splitmix64(seed_k ^ key_k).
 * Keys are folded in order, so (a, b) and (b, a) give different seeds.
 */
constexpr std::uint64_t derive_seed( std::uint64_t base, std::initializer_list<std::uint64_t> keys ) noexcept
{
  auto s = splitmix64( base );
  for ( auto k : keys )
  {
    s = splitmix64( s ^ k );
  }
  return s;
}

/*! \brief 64-bit FNV-1a of a string, used to turn role names into seed keys. */
constexpr std::uint64_t fnv1a( std::string_view text ) noexcept
{
  std::uint64_t h = 0xcbf29ce484222325ull;
  for ( char c : text )
  {
    h ^= static_cast<unsigned char>( c );
    h *= 0x100000001b3ull;
  }
  return h;
}

} // namespace fbn
