// Report emission: convergence tables as CSV and gnuplot-ready .dat files,
// JSON run reports, and mesh export. Formatting is fixed-precision so a
// given config and seed reproduce byte-identical files.

#ifndef HDIVSYM_REPORTS_HPP
#define HDIVSYM_REPORTS_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdivsym/analysis.hpp"
#include "hdivsym/geometry.hpp"
#include "hdivsym/verification.hpp"

namespace hdivsym {

using nlohmann::json;

inline std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline const char* convergence_csv_header() {
  return "m,h,e_sigma_l2,e_sigma_div,e_sigma_hdiv,e_u_l2,rate_hdiv,rate_u,"
         "rate_sigma_l2,beta";
}

inline std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream os;
  os << convergence_csv_header() << "\n";
  for (const auto& r : rows) {
    os << r.m << "," << fmt_num(r.h) << "," << fmt_num(r.e_sigma_l2) << ","
       << fmt_num(r.e_sigma_div) << "," << fmt_num(r.e_sigma_hdiv) << ","
       << fmt_num(r.e_u_l2) << "," << fmt_num(r.rate_hdiv) << ","
       << fmt_num(r.rate_u) << "," << fmt_num(r.rate_sigma_l2) << ","
       << fmt_num(r.beta) << "\n";
  }
  return os.str();
}

/// Same table, whitespace-separated with a comment header (gnuplot-ready).
inline std::string convergence_dat(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream os;
  os << "# m h e_sigma_l2 e_sigma_div e_sigma_hdiv e_u_l2 rate_hdiv rate_u "
        "rate_sigma_l2 beta\n";
  for (const auto& r : rows) {
    os << r.m << " " << fmt_num(r.h) << " " << fmt_num(r.e_sigma_l2) << " "
       << fmt_num(r.e_sigma_div) << " " << fmt_num(r.e_sigma_hdiv) << " "
       << fmt_num(r.e_u_l2) << " " << fmt_num(r.rate_hdiv) << " "
       << fmt_num(r.rate_u) << " " << fmt_num(r.rate_sigma_l2) << " "
       << fmt_num(r.beta) << "\n";
  }
  return os.str();
}

inline json convergence_row_json(const ConvergenceRow& r) {
  json j;
  j["m"] = r.m;
  j["h"] = r.h;
  j["e_sigma_l2"] = r.e_sigma_l2;
  j["e_sigma_div"] = r.e_sigma_div;
  j["e_sigma_hdiv"] = r.e_sigma_hdiv;
  j["e_u_l2"] = r.e_u_l2;
  auto put_opt = [&](const char* key, double v) {
    if (std::isnan(v))
      j[key] = nullptr;
    else
      j[key] = v;
  };
  put_opt("rate_hdiv", r.rate_hdiv);
  put_opt("rate_u", r.rate_u);
  put_opt("rate_sigma_l2", r.rate_sigma_l2);
  put_opt("beta", r.beta);
  put_opt("solve_residual", r.solve_residual);
  j["unknowns"] = r.unknowns;
  j["solve_ok"] = r.solve_ok;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

inline json claim_json(const ClaimResult& c) {
  json j;
  j["name"] = c.name;
  j["pass"] = c.pass;
  j["metrics"] = json::object();
  for (const auto& [k, v] : c.metrics) j["metrics"][k] = v;
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

inline json mesh_json(const Mesh& mesh) {
  json j;
  j["points"] = json::array();
  for (const auto& p : mesh.points) {
    json pt = json::array();
    for (int i = 0; i < p.size(); ++i) pt.push_back(p(i));
    j["points"].push_back(pt);
  }
  j["cells"] = mesh.cells;
  return j;
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << content;
}

}  // namespace hdivsym

#endif  // HDIVSYM_REPORTS_HPP
