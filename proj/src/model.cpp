#include "gappy/model.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace gappy {

namespace {

using nlohmann::json;

void add(std::vector<Violation>& out, std::string code, std::string where,
         std::string detail) {
  out.push_back({std::move(code), std::move(where), std::move(detail)});
}

std::string mod_where(std::size_t k) {
  return "modalities[" + std::to_string(k) + "]";
}

bool all_finite(const Matrix& m) {
  const double* p = m.data();
  for (std::size_t i = 0; i < m.rows() * m.cols(); ++i)
    if (!std::isfinite(p[i])) return false;
  return true;
}

// Typed JSON access that names the field on failure.
const json& member(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end())
    throw std::runtime_error("missing field " + where + "." + key);
  return *it;
}

double as_number(const json& j, const std::string& where) {
  if (!j.is_number())
    throw std::runtime_error("expected number at " + where);
  return j.get<double>();
}

int as_int(const json& j, const std::string& where) {
  if (!j.is_number_integer())
    throw std::runtime_error("expected integer at " + where);
  return j.get<int>();
}

const json& as_array(const json& j, const std::string& where) {
  if (!j.is_array())
    throw std::runtime_error("expected array at " + where);
  return j;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& where) {
  const json& rows = as_array(j, where);
  if (rows.empty()) return {};
  const std::size_t ncols = as_array(rows[0], where + "[0]").size();
  Matrix m(rows.size(), ncols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string rw = where + "[" + std::to_string(i) + "]";
    const json& row = as_array(rows[i], rw);
    if (row.size() != ncols)
      throw std::runtime_error("ragged rows at " + rw);
    for (std::size_t c = 0; c < ncols; ++c)
      m(i, c) = as_number(row[c], rw + "[" + std::to_string(c) + "]");
  }
  return m;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<Violation> validate_dataset(const FusionDataset& data) {
  std::vector<Violation> out;
  if (data.intrinsic_dim < 1)
    add(out, "bad_intrinsic_dim", "intrinsic_dim",
        "intrinsic dimension must be >= 1, got " +
            std::to_string(data.intrinsic_dim));
  if (data.modalities.empty())
    add(out, "no_modalities", "modalities", "dataset has no modalities");

  std::set<int> seen_ids;
  for (std::size_t k = 0; k < data.modalities.size(); ++k) {
    const ModalityData& m = data.modalities[k];
    const std::string where = mod_where(k);
    if (!seen_ids.insert(m.modality_id).second)
      add(out, "duplicate_modality_id", where,
          "modality_id " + std::to_string(m.modality_id) + " repeats");
    if (m.ambient_dim < 1)
      add(out, "bad_ambient_dim", where, "ambient_dim must be >= 1");
    else if (data.intrinsic_dim >= 1 && m.ambient_dim < data.intrinsic_dim)
      add(out, "ambient_below_intrinsic", where,
          "ambient_dim " + std::to_string(m.ambient_dim) +
              " < intrinsic_dim " + std::to_string(data.intrinsic_dim));
    if (!(m.sigma > 0.0) || !std::isfinite(m.sigma))
      add(out, "bad_sigma", where, "sigma must be finite and > 0");
    if (m.bursts.empty())
      add(out, "no_bursts", where, "modality has no bursts");
    for (std::size_t i = 0; i < m.bursts.size(); ++i) {
      const Burst& b = m.bursts[i];
      const std::string bw = where + ".bursts[" + std::to_string(i) + "]";
      if (b.samples.rows() < 2)
        add(out, "burst_too_small", bw,
            "burst has M=" + std::to_string(b.samples.rows()) +
                " samples, need M >= 2 for covariance");
      if (m.ambient_dim >= 1 &&
          b.samples.cols() != static_cast<std::size_t>(m.ambient_dim))
        add(out, "dimension_mismatch", bw,
            "sample width " + std::to_string(b.samples.cols()) +
                " != ambient_dim " + std::to_string(m.ambient_dim));
      if (!all_finite(b.samples))
        add(out, "nonfinite_value", bw, "burst contains NaN or Inf");
    }
    if (!m.patch_labels.empty() && m.patch_labels.size() != m.bursts.size())
      add(out, "bad_patch_labels", where,
          "patch_labels size " + std::to_string(m.patch_labels.size()) +
              " != burst count " + std::to_string(m.bursts.size()));
  }

  const int K = static_cast<int>(data.modalities.size());
  for (std::size_t l = 0; l < data.calibration.size(); ++l) {
    const CalibrationLink& c = data.calibration[l];
    const std::string where = "calibration[" + std::to_string(l) + "]";
    const bool mods_ok = c.modality_k >= 0 && c.modality_k < K &&
                         c.modality_s >= 0 && c.modality_s < K;
    if (!mods_ok) {
      add(out, "dangling_calibration", where,
          "modality index out of range (k=" + std::to_string(c.modality_k) +
              ", s=" + std::to_string(c.modality_s) + ")");
      continue;
    }
    if (c.modality_k == c.modality_s)
      add(out, "self_link", where,
          "calibration link must join two distinct modalities");
    const auto in_range = [&](int mod, int burst) {
      return burst >= 0 &&
             burst < static_cast<int>(data.modalities[mod].bursts.size());
    };
    if (!in_range(c.modality_k, c.burst_i) || !in_range(c.modality_s, c.burst_j))
      add(out, "dangling_calibration", where,
          "burst index out of range (i=" + std::to_string(c.burst_i) + ", j=" +
              std::to_string(c.burst_j) + ")");
  }
  return out;
}

void require_valid(const FusionDataset& data) {
  const auto violations = validate_dataset(data);
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << "invalid dataset (" << violations.size() << " violation"
      << (violations.size() == 1 ? "" : "s") << "):";
  for (const auto& v : violations) msg << "\n  " << to_string(v);
  throw std::runtime_error(msg.str());
}

std::string to_string(const Violation& v) {
  return v.code + " at " + v.where + ": " + v.detail;
}

std::string dataset_to_json(const FusionDataset& data) {
  json j;
  j["intrinsic_dim"] = data.intrinsic_dim;
  json mods = json::array();
  for (const auto& m : data.modalities) {
    json jm;
    jm["modality_id"] = m.modality_id;
    jm["ambient_dim"] = m.ambient_dim;
    jm["sigma"] = m.sigma;
    json bursts = json::array();
    for (const auto& b : m.bursts) bursts.push_back(matrix_to_json(b.samples));
    jm["bursts"] = std::move(bursts);
    if (!m.patch_labels.empty()) jm["patch_labels"] = m.patch_labels;
    mods.push_back(std::move(jm));
  }
  j["modalities"] = std::move(mods);
  json calib = json::array();
  for (const auto& c : data.calibration)
    calib.push_back({c.burst_i, c.burst_j, c.modality_k, c.modality_s});
  j["calibration"] = std::move(calib);
  return j.dump(1);
}

FusionDataset dataset_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("dataset parse error: ") + e.what());
  }
  FusionDataset data;
  data.intrinsic_dim = as_int(member(j, "intrinsic_dim", "$"), "intrinsic_dim");
  const json& mods = as_array(member(j, "modalities", "$"), "modalities");
  for (std::size_t k = 0; k < mods.size(); ++k) {
    const std::string where = mod_where(k);
    const json& jm = mods[k];
    ModalityData m;
    m.modality_id = as_int(member(jm, "modality_id", where), where + ".modality_id");
    m.ambient_dim = as_int(member(jm, "ambient_dim", where), where + ".ambient_dim");
    m.sigma = as_number(member(jm, "sigma", where), where + ".sigma");
    const json& bursts = as_array(member(jm, "bursts", where), where + ".bursts");
    for (std::size_t i = 0; i < bursts.size(); ++i) {
      Burst b;
      b.burst_id = static_cast<int>(i);
      b.samples = matrix_from_json(
          bursts[i], where + ".bursts[" + std::to_string(i) + "]");
      m.bursts.push_back(std::move(b));
    }
    if (auto it = jm.find("patch_labels"); it != jm.end()) {
      const json& labels = as_array(*it, where + ".patch_labels");
      for (std::size_t i = 0; i < labels.size(); ++i)
        m.patch_labels.push_back(as_int(
            labels[i], where + ".patch_labels[" + std::to_string(i) + "]"));
    }
    data.modalities.push_back(std::move(m));
  }
  const json& calib = as_array(member(j, "calibration", "$"), "calibration");
  for (std::size_t l = 0; l < calib.size(); ++l) {
    const std::string where = "calibration[" + std::to_string(l) + "]";
    const json& jc = as_array(calib[l], where);
    if (jc.size() != 4)
      throw std::runtime_error("expected [i, j, k, s] quadruplet at " + where);
    CalibrationLink c;
    c.burst_i = as_int(jc[0], where + "[0]");
    c.burst_j = as_int(jc[1], where + "[1]");
    c.modality_k = as_int(jc[2], where + "[2]");
    c.modality_s = as_int(jc[3], where + "[3]");
    data.calibration.push_back(c);
  }
  return data;
}

void save_dataset(const std::string& path, const FusionDataset& data) {
  write_file(path, dataset_to_json(data));
}

FusionDataset load_dataset(const std::string& path) {
  return dataset_from_json(read_file(path));
}

std::string ground_truth_to_json(const GroundTruth& gt) {
  json j;
  j["intrinsic_dim"] = gt.intrinsic_dim;
  j["scenario"] = gt.scenario;
  json mods = json::array();
  for (std::size_t k = 0; k < gt.centers.size(); ++k) {
    json jm;
    jm["modality_id"] = k < gt.modality_ids.size()
                            ? gt.modality_ids[k]
                            : static_cast<int>(k) + 1;
    jm["centers"] = matrix_to_json(gt.centers[k]);
    mods.push_back(std::move(jm));
  }
  j["modalities"] = std::move(mods);
  return j.dump(1);
}

GroundTruth ground_truth_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("ground truth parse error: ") + e.what());
  }
  GroundTruth gt;
  gt.intrinsic_dim = as_int(member(j, "intrinsic_dim", "$"), "intrinsic_dim");
  gt.scenario = member(j, "scenario", "$").get<std::string>();
  const json& mods = as_array(member(j, "modalities", "$"), "modalities");
  for (std::size_t k = 0; k < mods.size(); ++k) {
    const std::string where = mod_where(k);
    gt.modality_ids.push_back(
        as_int(member(mods[k], "modality_id", where), where + ".modality_id"));
    gt.centers.push_back(matrix_from_json(member(mods[k], "centers", where),
                                          where + ".centers"));
  }
  return gt;
}

void save_ground_truth(const std::string& path, const GroundTruth& gt) {
  write_file(path, ground_truth_to_json(gt));
}

GroundTruth load_ground_truth(const std::string& path) {
  return ground_truth_from_json(read_file(path));
}

}  // namespace gappy
