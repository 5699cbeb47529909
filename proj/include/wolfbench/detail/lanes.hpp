#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace wolfbench::detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for an independent stream identified by (master seed, lane path).
inline std::uint64_t lane_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> lane) noexcept {
  std::uint64_t h = splitmix64(seed);
  for (auto part : lane) h = splitmix64(h ^ splitmix64(part + 0x632be59bd9b4e019ULL));
  return h;
}

inline std::mt19937_64 lane_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> lane) {
  return std::mt19937_64(lane_seed(seed, lane));
}

// Stream purposes, kept distinct so no two consumers share a lane.
enum Purpose : std::uint64_t {
  kPopulationReferences = 1,
  kPopulationNoise = 2,
  kPopulationLandscape = 3,
  kFrrTrials = 10,
  kFarTrials = 11,
  kArTrials = 12,
  kProbeCalibration = 20,
  kEmpiricalPs = 21,
  kWolfStart = 30,
  kWolfEvaluate = 31,
  kWolfConfirm = 32,
};

}  // namespace wolfbench::detail
