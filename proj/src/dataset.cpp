#include "nf/dataset.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "nf/csv.hpp"

namespace nf::data {

namespace fs = std::filesystem;
using nlohmann::json;

InputVec make_input(const Vec3& v, const Quat& q_att, const Vec4& pwm) {
  InputVec x;
  x.segment<3>(0) = v;
  x[3] = q_att.w();
  x[4] = q_att.x();
  x[5] = q_att.y();
  x[6] = q_att.z();
  x.segment<4>(7) = pwm;
  return x;
}

std::size_t FlightDataset::total_train_samples() const {
  std::size_t n = 0;
  for (const auto& d : train) n += d.size();
  return n;
}

namespace {

void validate_group(const std::vector<std::vector<Sample>>& group,
                    const char* name) {
  for (std::size_t k = 0; k < group.size(); ++k) {
    if (group[k].empty()) {
      throw SchemaMismatch(std::string(name) + " subdataset " +
                           std::to_string(k) + " is empty");
    }
    for (const Sample& s : group[k]) {
      if (s.k != static_cast<int>(k)) {
        throw SchemaMismatch(std::string(name) +
                             " sample condition index mismatch");
      }
      if (!s.x.allFinite() || !s.y.allFinite()) {
        throw SchemaMismatch(std::string(name) + " sample is non-finite");
      }
      const double qn = s.x.segment<4>(3).norm();
      if (std::abs(qn - 1.0) > 1e-6) {
        throw SchemaMismatch(std::string(name) +
                             " quaternion block is not unit norm");
      }
    }
  }
}

const std::vector<std::string> kColumns = {
    "t",    "k",    "v_x",  "v_y",  "v_z",  "q_w",  "q_x",  "q_y", "q_z",
    "pwm_1", "pwm_2", "pwm_3", "pwm_4", "y_x", "y_y", "y_z"};

void write_group(const std::vector<std::vector<Sample>>& group,
                 const std::string& dir, const char* prefix) {
  for (std::size_t k = 0; k < group.size(); ++k) {
    csv::Writer w(dir + "/" + prefix + std::to_string(k) + ".csv", kColumns);
    std::vector<double> row(kColumns.size());
    for (const Sample& s : group[k]) {
      row[0] = s.t;
      row[1] = static_cast<double>(s.k);
      for (int i = 0; i < kInputDim; ++i) row[2 + i] = s.x[i];
      for (int i = 0; i < 3; ++i) row[13 + i] = s.y[i];
      w.row(row);
    }
    w.close();
  }
}

std::vector<Sample> read_subdataset(const std::string& path) {
  const csv::Table table = csv::read(path);
  if (table.header != kColumns) {
    throw SchemaMismatch("unexpected column layout in " + path);
  }
  std::vector<Sample> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    Sample s;
    s.t = row[0];
    s.k = static_cast<int>(row[1]);
    for (int i = 0; i < kInputDim; ++i) s.x[i] = row[2 + i];
    for (int i = 0; i < 3; ++i) s.y[i] = row[13 + i];
    out.push_back(s);
  }
  return out;
}

}  // namespace

void FlightDataset::validate() const {
  if (train.empty()) throw SchemaMismatch("dataset has no subdatasets");
  validate_group(train, "train");
  if (!validation.empty() && validation.size() != train.size()) {
    throw SchemaMismatch("validation/train condition count mismatch");
  }
  validate_group(validation, "validation");
}

void save_dataset(const FlightDataset& ds, const std::string& dir) {
  ds.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoFailure("cannot create dataset directory " + dir);

  json meta;
  meta["schema_version"] = ds.meta.schema_version;
  meta["seed"] = ds.meta.seed;
  meta["rate_hz"] = ds.meta.rate_hz;
  meta["config_hash"] = ds.meta.config_hash;
  meta["conditions"] = ds.train.size();
  json counts = json::array(), val_counts = json::array();
  for (const auto& d : ds.train) counts.push_back(d.size());
  for (const auto& d : ds.validation) val_counts.push_back(d.size());
  meta["train_counts"] = counts;
  meta["val_counts"] = val_counts;

  std::ofstream meta_out(dir + "/meta.json");
  if (!meta_out) throw IoFailure("cannot write " + dir + "/meta.json");
  meta_out << meta.dump(2) << "\n";
  meta_out.close();

  write_group(ds.train, dir, "train_");
  write_group(ds.validation, dir, "val_");
}

FlightDataset load_dataset(const std::string& dir) {
  std::ifstream meta_in(dir + "/meta.json");
  if (!meta_in) throw IoFailure("cannot open " + dir + "/meta.json");
  json meta;
  try {
    meta_in >> meta;
  } catch (const json::exception& e) {
    throw IoFailure("malformed meta.json in " + dir + ": " + e.what());
  }
  FlightDataset ds;
  if (!meta.contains("schema_version") ||
      meta["schema_version"].get<int>() != kSchemaVersion) {
    throw SchemaMismatch("dataset schema version mismatch in " + dir);
  }
  ds.meta.schema_version = meta["schema_version"].get<int>();
  ds.meta.seed = meta.value("seed", std::uint64_t{0});
  ds.meta.rate_hz = meta.value("rate_hz", 50.0);
  ds.meta.config_hash = meta.value("config_hash", std::uint64_t{0});

  const auto conditions = meta.value("conditions", std::size_t{0});
  const auto val_counts =
      meta.value("val_counts", json::array()).size();
  for (std::size_t k = 0; k < conditions; ++k) {
    ds.train.push_back(
        read_subdataset(dir + "/train_" + std::to_string(k) + ".csv"));
  }
  for (std::size_t k = 0; k < val_counts; ++k) {
    ds.validation.push_back(
        read_subdataset(dir + "/val_" + std::to_string(k) + ".csv"));
  }
  ds.validate();
  return ds;
}

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace nf::data
