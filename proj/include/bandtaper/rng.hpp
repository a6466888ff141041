#pragma once

#include <cstdint>
#include <initializer_list>

namespace bandtaper {

/**
 * Counter-based random stream (Philox4x32-10). A generator is addressed by a
 * (seed, stream) pair; distinct streams are statistically independent, so
 * parallel code can hand each unit of work its own stream and produce results
 * that do not depend on scheduling or thread count. All variates are consumed
 * sequentially within one stream.
 */
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform on (0, 1], 53-bit resolution.
  double uniform();

  /// Standard normal via Box-Muller on the counter stream.
  double normal();

  /**
   * Chi-square with df > 0. Integer df uses the sum of df squared normals;
   * fractional df uses 2 * Gamma(df/2) with the Marsaglia-Tsang sampler
   * (rejection; consumes a variable number of stream values).
   */
  double chi_square(double df);

  /// Gamma(shape, 1), shape > 0 (Marsaglia-Tsang; shape < 1 via boosting).
  double gamma(double shape);

 private:
  void refill();

  std::uint32_t key_[2];
  std::uint64_t counter_ = 0;
  std::uint32_t stream_hi_[2];
  std::uint32_t buf_[4];
  int buf_pos_ = 4;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// Collision-resistant stream id from a tag and indices (splitmix64 chain).
std::uint64_t derive_stream(std::initializer_list<std::uint64_t> parts);

/// Fixed stream tags so independent subsystems never share a stream.
namespace stream_tag {
inline constexpr std::uint64_t kDataGen = 0x01;
inline constexpr std::uint64_t kPosterior = 0x02;
inline constexpr std::uint64_t kFoldDraw = 0x03;
inline constexpr std::uint64_t kPanel = 0x04;
inline constexpr std::uint64_t kStudy = 0x05;
}  // namespace stream_tag

}  // namespace bandtaper
