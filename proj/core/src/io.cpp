#include "voltlab/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace voltlab::io {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  std::filesystem::path p = csv;
  p.replace_extension(".json");
  return p;
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void write_grid_function(const std::filesystem::path& csv, const RealFn& f) {
  std::ostringstream ss;
  ss << "index,node,value_re,value_im\n";
  for (int i = 0; i < f.grid.n; ++i) {
    ss << i << ',' << fmt(f.grid.node(i)) << ',' << fmt(f.samples[i]) << ",0\n";
  }
  write_text(csv, ss.str());
  json side;
  side["n"] = f.grid.n;
  side["h"] = f.grid.h;
  side["p"] = f.p;
  write_text(sidecar_path(csv), side.dump(2) + "\n");
}

RealFn read_grid_function(const std::filesystem::path& csv) {
  const json side = json::parse(read_text(sidecar_path(csv)));
  Grid g(side.at("n").get<int>());
  Vec v = Vec::Zero(g.n);

  std::istringstream in(read_text(csv));
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv " + csv.string());
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::getline(ls, tok, ',');  // index
    std::getline(ls, tok, ',');  // node
    std::getline(ls, tok, ',');  // value_re
    if (row >= g.n) throw std::runtime_error("too many rows in " + csv.string());
    v[row++] = std::stod(tok);
  }
  if (row != g.n) throw std::runtime_error("row count mismatch in " + csv.string());
  return RealFn(g, std::move(v), side.at("p").get<double>());
}

std::string orbit_csv(const Orbit<double>& orb, const std::vector<Vec>& functionals,
                      double weight) {
  std::ostringstream ss;
  ss << "n,log_norm";
  for (std::size_t j = 0; j < functionals.size(); ++j) ss << ",functional_" << (j + 1);
  ss << '\n';
  for (const auto& pt : orb.points) {
    ss << pt.n << ',' << fmt(pt.log_norm);
    for (const Vec& f : functionals) ss << ',' << fmt(pair(f, pt.unit, weight));
    ss << '\n';
  }
  return ss.str();
}

std::string margins_json(const FunctionalGrowthReport& rep) {
  json out;
  out["c_dual"] = rep.c_dual;
  out["chain_residual_max"] = rep.chain_residual_max;
  out["reduced_applies"] = rep.reduced_applies;
  if (rep.reduced_applies) out["reduced_residual_max"] = rep.reduced_residual_max;
  out["min_margin"] = rep.min_margin;
  out["rows"] = json::array();
  for (const MarginRow& r : rep.rows) {
    out["rows"].push_back({{"n", r.n},
                           {"log_lhs", r.log_lhs},
                           {"log_rhs", r.log_rhs},
                           {"margin", r.margin}});
  }
  return out.dump(2) + "\n";
}

std::string certificate_json(const Certificate& cert, const std::string& functionals_ref) {
  json out;
  out["k"] = cert.k;
  out["epsilon"] = cert.epsilon;
  out["epsilon_star"] = cert.epsilon_star;
  out["seed"] = cert.seed;
  out["trial"] = cert.trial;
  out["margins"] = cert.margins;
  out["failure_bound"] = cert.failure_bound;
  out["outside_scope"] = cert.outside_scope;
  out["functionals_ref"] = functionals_ref;
  if (cert.draws_stored) {
    json rows = json::array();
    for (Eigen::Index j = 0; j < cert.draws.rows(); ++j) {
      json row = json::array();
      for (Eigen::Index n = 0; n < cert.draws.cols(); ++n) row.push_back(cert.draws(j, n));
      rows.push_back(std::move(row));
    }
    out["draws"] = std::move(rows);
  }
  return out.dump(2) + "\n";
}

std::string functionals_csv(const std::vector<Vec>& us) {
  std::ostringstream ss;
  ss << "index";
  for (std::size_t j = 0; j < us.size(); ++j) ss << ",u_" << (j + 1);
  ss << '\n';
  const Eigen::Index dim = us.empty() ? 0 : us[0].size();
  for (Eigen::Index i = 0; i < dim; ++i) {
    ss << i;
    for (const Vec& u : us) ss << ',' << fmt(u[i]);
    ss << '\n';
  }
  return ss.str();
}

std::string small_ball_csv(const std::vector<SmallBallRow>& rows) {
  std::ostringstream ss;
  ss << "n,a_n,exact,linear,coarse,empirical,mc_sigma\n";
  for (const SmallBallRow& r : rows) {
    ss << r.n << ',' << fmt(r.a_n) << ',' << fmt(r.exact) << ',' << fmt(r.linear) << ','
       << fmt(r.coarse) << ',' << fmt(r.empirical) << ',' << fmt(r.mc_sigma) << '\n';
  }
  return ss.str();
}

}  // namespace voltlab::io
