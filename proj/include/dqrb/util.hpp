#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dqrb {

// Verbosity from the DQRNN_LOG environment variable: 0 (default) silent,
// 1 info, 2 debug. Messages go to stderr so stdout stays machine-readable.
int log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

// Deterministic RNG. Distributions are hand-rolled on top of mt19937_64 so a
// seed produces byte-identical streams independent of the standard library.
struct Rng {
  std::mt19937_64 gen;

  explicit Rng(std::uint64_t seed) : gen(seed) {}

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller without cached spare: one value per call, stateless stream.
  double normal();

  Eigen::Vector3d vec3(double lo, double hi) {
    return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)};
  }
};

// SHA-256 of a byte string, lowercase hex. Used for run manifests.
std::string sha256_hex(const std::string& bytes);

std::string read_file(const std::string& path);           // throws FileError
void write_file(const std::string& path, const std::string& content);

bool file_exists(const std::string& path);

std::string format_double(double v);  // shortest round-trip representation

}  // namespace dqrb
