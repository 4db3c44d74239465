#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace flowbench {

// splitmix64 step; used both as a mixer and as the core of Rng.
inline uint64_t splitmix64(uint64_t x)
{
   x += 0x9E3779B97F4A7C15ULL;
   x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
   x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
   return x ^ (x >> 31);
}

inline uint64_t fnv1a(std::string_view s)
{
   uint64_t h = 0xCBF29CE484222325ULL;
   for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001B3ULL;
   }
   return h;
}

// Stable per-stage seed: mixing the label keeps independent stages decorrelated
// while everything remains reproducible from one master seed.
inline uint64_t derive_seed(uint64_t master, std::string_view label)
{
   return splitmix64(master ^ fnv1a(label));
}

// Half-up rounding of a non-negative quantity to an integer count.
inline int64_t round_half_up(double x)
{
   return static_cast<int64_t>(std::llround(x));
}

// Deterministic RNG with a fixed algorithm; std:: distributions are avoided so
// streams are identical across standard libraries.
class Rng {
 public:
   explicit Rng(uint64_t seed) : state_(seed) {}

   uint64_t next_u64()
   {
      state_ += 0x9E3779B97F4A7C15ULL;
      uint64_t x = state_;
      x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
      x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
      return x ^ (x >> 31);
   }

   // Uniform in [0, 1).
   double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

   // Uniform integer in [0, n); rejection keeps it unbiased.
   uint64_t bounded(uint64_t n)
   {
      if (n == 0)
         return 0;
      uint64_t threshold = (0 - n) % n;
      for (;;) {
         uint64_t r = next_u64();
         if (r >= threshold)
            return r % n;
      }
   }

   double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

   double normal(double mean = 0.0, double stdev = 1.0)
   {
      if (have_spare_) {
         have_spare_ = false;
         return mean + stdev * spare_;
      }
      double u1 = 0.0;
      do {
         u1 = next_double();
      } while (u1 <= 0.0);
      double u2 = next_double();
      double r = std::sqrt(-2.0 * std::log(u1));
      double a = 6.283185307179586476925286766559 * u2;
      spare_ = r * std::sin(a);
      have_spare_ = true;
      return mean + stdev * r * std::cos(a);
   }

   template <typename T>
   void shuffle(std::vector<T>& v)
   {
      for (size_t i = v.size(); i > 1; --i)
         std::swap(v[i - 1], v[bounded(i)]);
   }

 private:
   uint64_t state_;
   double spare_ = 0.0;
   bool have_spare_ = false;
};

inline std::string trim(std::string_view s)
{
   size_t b = 0, e = s.size();
   while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
      ++b;
   while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
      --e;
   return std::string(s.substr(b, e - b));
}

inline std::string to_lower(std::string_view s)
{
   std::string out(s);
   std::transform(out.begin(), out.end(), out.begin(),
                  [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
   return out;
}

} // namespace flowbench
