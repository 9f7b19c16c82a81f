#pragma once

#include "hmatch/design/region.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace hmatch {

inline constexpr int kEmulatorFormatVersion = 1;

namespace io {

using nlohmann::json;

inline json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Vec vec_from_json(const json& a) {
  Vec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

inline json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_to_json(m.row(i).transpose()));
  return rows;
}

inline Mat mat_from_json(const json& rows) {
  if (rows.empty()) return Mat(0, 0);
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != static_cast<std::size_t>(m.cols()))
      throw IoError("ragged matrix in JSON");
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
  }
  return m;
}

inline json target_to_json(const ObservationTarget& t) {
  json j{{"id", t.id},       {"z", t.z},
         {"sigma_md", t.sigma_md}, {"sigma_me", t.sigma_me},
         {"dataset", std::string(1, t.dataset)}};
  if (t.window) j["window"] = {(*t.window)[0], (*t.window)[1]};
  return j;
}

inline ObservationTarget target_from_json(const json& j) {
  ObservationTarget t;
  t.id = j.at("id").get<std::string>();
  t.z = j.at("z").get<double>();
  t.sigma_md = j.at("sigma_md").get<double>();
  t.sigma_me = j.at("sigma_me").get<double>();
  const std::string ds = j.value("dataset", std::string("A"));
  t.dataset = ds.empty() ? 'A' : ds[0];
  if (j.contains("window"))
    t.window = {{j["window"][0].get<double>(), j["window"][1].get<double>()}};
  t.validate();
  return t;
}

inline json emulator_to_json(const Emulator& em) {
  const EmulatorSpec& s = em.spec();
  json basis = json::array();
  for (const BasisTerm& b : s.basis) basis.push_back({b.i, b.j});
  json j{{"version", kEmulatorFormatVersion},
         {"output", s.output_id},
         {"residual", s.residual == ResidualModel::correlated ? "correlated" : "uncorrelated"},
         {"basis", basis},
         {"beta", vec_to_json(s.beta)},
         {"active", s.active},
         {"theta", vec_to_json(s.theta)},
         {"sigma_u2", s.sigma_u2},
         {"sigma_w2", s.sigma_w2},
         {"train_x", mat_to_json(em.training().X)},
         {"train_y", vec_to_json(em.training().y)}};
  return j;
}

inline std::shared_ptr<const Emulator> emulator_from_json(const json& j) {
  if (j.value("version", 0) != kEmulatorFormatVersion)
    throw IoError("unsupported emulator format version");
  EmulatorSpec s;
  s.output_id = j.at("output").get<std::string>();
  s.residual = j.at("residual").get<std::string>() == "correlated" ? ResidualModel::correlated
                                                                   : ResidualModel::uncorrelated;
  for (const auto& b : j.at("basis")) s.basis.push_back({b[0].get<int>(), b[1].get<int>()});
  s.beta = vec_from_json(j.at("beta"));
  s.active = j.at("active").get<std::vector<int>>();
  s.theta = vec_from_json(j.at("theta"));
  s.sigma_u2 = j.at("sigma_u2").get<double>();
  s.sigma_w2 = j.at("sigma_w2").get<double>();
  TrainingSet ts{mat_from_json(j.at("train_x")), vec_from_json(j.at("train_y"))};
  return std::make_shared<const Emulator>(std::move(s), std::move(ts));
}

inline json wave_test_to_json(const WaveTest& t) {
  json ems = json::array(), tgs = json::array();
  for (const auto& em : t.emulators) ems.push_back(emulator_to_json(*em));
  for (const auto& tg : t.targets) tgs.push_back(target_to_json(tg));
  json cut;
  if (t.cutoffs.i_max) cut["i_max"] = *t.cutoffs.i_max;
  if (t.cutoffs.i_2max) cut["i_2max"] = *t.cutoffs.i_2max;
  if (t.cutoffs.i_3max) cut["i_3max"] = *t.cutoffs.i_3max;
  return json{{"version", kEmulatorFormatVersion},
              {"emulators", ems},
              {"targets", tgs},
              {"cutoffs", cut}};
}

inline WaveTest wave_test_from_json(const json& j) {
  if (j.value("version", 0) != kEmulatorFormatVersion)
    throw IoError("unsupported wave format version");
  WaveTest t;
  for (const auto& e : j.at("emulators")) t.emulators.push_back(emulator_from_json(e));
  for (const auto& g : j.at("targets")) t.targets.push_back(target_from_json(g));
  const json& cut = j.at("cutoffs");
  if (cut.contains("i_max")) t.cutoffs.i_max = cut["i_max"].get<double>();
  if (cut.contains("i_2max")) t.cutoffs.i_2max = cut["i_2max"].get<double>();
  if (cut.contains("i_3max")) t.cutoffs.i_3max = cut["i_3max"].get<double>();
  if (t.emulators.size() != t.targets.size())
    throw IoError("wave JSON: emulator/target count mismatch");
  return t;
}

}  // namespace io
}  // namespace hmatch
