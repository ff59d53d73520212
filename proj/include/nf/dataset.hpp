#ifndef NF_DATASET_HPP
#define NF_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nf/core.hpp"

namespace nf::data {

inline constexpr int kInputDim = 11;  // v (3) + attitude quaternion (4) + pwm (4)
inline constexpr int kSchemaVersion = 1;

using InputVec = Eigen::Matrix<double, kInputDim, 1>;

/// One learning pair: state input x and residual-force label y.
struct Sample {
  InputVec x = InputVec::Zero();
  Vec3 y = Vec3::Zero();
  double t = 0.0;
  int k = 0;  // wind-condition index
};

InputVec make_input(const Vec3& v, const Quat& q_att, const Vec4& pwm);

struct DatasetMeta {
  int schema_version = kSchemaVersion;
  std::uint64_t seed = 0;
  double rate_hz = 50.0;
  std::uint64_t config_hash = 0;
};

/// K training subdatasets (one per wind condition) plus matching held-out
/// validation subdatasets collected on the benchmark trajectory.
struct FlightDataset {
  std::vector<std::vector<Sample>> train;
  std::vector<std::vector<Sample>> validation;
  DatasetMeta meta;

  std::size_t conditions() const { return train.size(); }
  std::size_t total_train_samples() const;

  /// Subdatasets non-empty, per-sample k equal to the subdataset index,
  /// finite inputs, unit quaternion block to 1e-6.
  void validate() const;
};

/// Directory layout: meta.json + train_<k>.csv + val_<k>.csv.
void save_dataset(const FlightDataset& ds, const std::string& dir);
FlightDataset load_dataset(const std::string& dir);

std::uint64_t fnv1a_hash(const std::string& text);

}  // namespace nf::data

#endif  // NF_DATASET_HPP
