#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "anisospec/common.hpp"
#include "anisospec/exponents.hpp"
#include "anisospec/monitor.hpp"
#include "anisospec/solver.hpp"

namespace anisospec {

using Json = nlohmann::ordered_json;

inline std::string format_sig17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

/// Infinity-aware JSON value; the unbounded marker serializes as a string.
inline Json json_number(double v) {
  if (v == kUnbounded) return Json("unbounded");
  if (v == -kUnbounded) return Json("-unbounded");
  return Json(v);
}

inline Json to_json(const ExponentReport& rep) {
  Json j;
  j["mu"] = json_number(rep.mu);
  j["p_h_min"] = json_number(rep.p_h_min);
  j["p_h_star_min"] = json_number(rep.p_h_star_min);
  j["r_star"] = json_number(rep.r_star);
  j["slow_everywhere"] = rep.slow_everywhere;
  j["fast_directions"] = rep.fast_directions;
  j["gamma_at_beta"] = json_number(rep.gamma_at_beta);
  j["beta_max"] = json_number(rep.beta_max);
  j["nu"] = json_number(rep.nu);
  j["target_gap"] = json_number(rep.target_gap);
  Json verdicts = Json::array();
  for (const auto& v : rep.verdicts) {
    Json jv;
    jv["name"] = v.name;
    jv["pass"] = v.pass;
    jv["detail"] = v.detail;
    verdicts.push_back(jv);
  }
  j["verdicts"] = verdicts;
  return j;
}

inline Json to_json(const EstimateReport& rep) {
  Json j;
  j["t_grid"] = rep.t_grid;
  j["sup_L2"] = rep.sup_L2;
  j["dissipation"] = rep.dissipation;
  j["ut_L2"] = rep.ut_L2;
  j["sup_modular"] = rep.sup_modular;
  j["hessian_weighted"] = rep.hessian_weighted;
  Json hi = Json::array();
  for (const auto& [r, v] : rep.higher_int) {
    Json e;
    e["r"] = r;
    e["value"] = v;
    hi.push_back(e);
  }
  j["higher_int"] = hi;
  j["second_order_W12"] = rep.second_order_W12;
  j["data_bound"] = rep.data_bound;
  if (rep.second_der_fast_modular)
    j["second_der_fast_modular"] = *rep.second_der_fast_modular;
  return j;
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open for reading: " + path.string());
  std::string s((std::istreambuf_iterator<char>(in)),
                std::istreambuf_iterator<char>());
  return s;
}

/// RFC-4180 CSV writer: comma separated, CRLF records, '.' decimal,
/// 17 significant digits for numbers.
class CsvWriter {
 public:
  void header(const std::vector<std::string>& names) {
    row_strings(names);
  }

  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_sig17(v));
    row_strings(cells);
  }

  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ",";
      text_ += escape(cells[i]);
    }
    text_ += "\r\n";
  }

  const std::string& text() const { return text_; }

 private:
  static std::string escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    out += '"';
    return out;
  }
  std::string text_;
};

/// Trajectory snapshot container format: an 8-byte little-endian header
/// length, a JSON header (shape, modes, times, accumulators), then the
/// snapshot coefficient tensors as row-major little-endian float64.
inline void write_trajectory(const std::filesystem::path& path,
                             const Trajectory& traj, const Problem& prob) {
  if (traj.snapshots.empty())
    throw InvalidArgument("write_trajectory: empty trajectory");
  const auto& modes = traj.snapshots.front().c.modes;
  Json header;
  header["format"] = "anisospec-trajectory";
  header["version"] = 1;
  header["dim"] = prob.domain.dim();
  header["lengths"] = prob.domain.lengths;
  header["epsilon"] = prob.epsilon;
  header["horizon"] = prob.horizon;
  header["modes"] = modes;
  Json shape = Json::array();
  shape.push_back(traj.snapshots.size());
  for (int m : modes) shape.push_back(m);
  header["shape"] = shape;
  std::vector<double> times, diss, work, defect;
  for (const auto& s : traj.snapshots) {
    times.push_back(s.t);
    diss.push_back(s.dissipation_accum);
    work.push_back(s.work_accum);
    defect.push_back(s.defect_accum);
  }
  header["times"] = times;
  header["dissipation_accum"] = diss;
  header["work_accum"] = work;
  header["defect_accum"] = defect;
  header["steps_accepted"] = traj.steps_accepted;
  header["steps_rejected"] = traj.steps_rejected;
  header["aliasing_warning"] = traj.aliasing_warning;

  const std::string htext = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  std::uint64_t len = htext.size();
  std::uint8_t lenbuf[8];
  for (int i = 0; i < 8; ++i)
    lenbuf[i] = static_cast<std::uint8_t>((len >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(lenbuf), 8);
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  for (const auto& s : traj.snapshots) {
    static_assert(sizeof(double) == 8);
    out.write(reinterpret_cast<const char*>(s.c.c.data()),
              static_cast<std::streamsize>(s.c.c.size() * sizeof(double)));
  }
}

struct TrajectoryFile {
  Json header;
  std::vector<std::vector<double>> snapshots;  // coefficient tensors
};

inline TrajectoryFile read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open for reading: " + path.string());
  std::uint8_t lenbuf[8];
  in.read(reinterpret_cast<char*>(lenbuf), 8);
  if (!in) throw Error("trajectory file truncated: " + path.string());
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i)
    len |= static_cast<std::uint64_t>(lenbuf[i]) << (8 * i);
  std::string htext(len, '\0');
  in.read(htext.data(), static_cast<std::streamsize>(len));
  if (!in) throw Error("trajectory header truncated: " + path.string());
  TrajectoryFile tf;
  tf.header = Json::parse(htext);
  const auto shape = tf.header["shape"].get<std::vector<std::size_t>>();
  std::size_t per_snap = 1;
  for (std::size_t i = 1; i < shape.size(); ++i) per_snap *= shape[i];
  tf.snapshots.assign(shape[0], std::vector<double>(per_snap));
  for (auto& snap : tf.snapshots) {
    in.read(reinterpret_cast<char*>(snap.data()),
            static_cast<std::streamsize>(per_snap * sizeof(double)));
    if (!in) throw Error("trajectory payload truncated: " + path.string());
  }
  return tf;
}

}  // namespace anisospec
