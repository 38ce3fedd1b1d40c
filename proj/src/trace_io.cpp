#include "formctl/trace_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace formctl {

namespace {

namespace fs = std::filesystem;

void write_series(const fs::path& file, const std::vector<double>& t,
                  const std::vector<Eigen::VectorXd>& series,
                  const std::vector<std::string>& cols) {
  std::ofstream os(file);
  os << std::setprecision(17);
  os << "t";
  for (const auto& c : cols) os << "," << c;
  os << "\n";
  for (size_t i = 0; i < t.size(); ++i) {
    os << t[i];
    for (int j = 0; j < series[i].size(); ++j) os << "," << series[i](j);
    os << "\n";
  }
}

std::vector<std::string> agent_cols(int n_agents, int per, const std::string& stem) {
  std::vector<std::string> cols;
  for (int i = 1; i <= n_agents; ++i)
    for (int j = 1; j <= per; ++j)
      cols.push_back("a" + std::to_string(i) + "_" + stem + std::to_string(j));
  return cols;
}

bool read_series(const fs::path& file, std::vector<double>* t,
                 std::vector<Eigen::VectorXd>* series, bool first_file) {
  std::ifstream is(file);
  if (!is) return false;
  std::string line;
  std::getline(is, line);  // header
  size_t row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (first_file) t->push_back(vals[0]);
    Eigen::VectorXd v(static_cast<int>(vals.size()) - 1);
    for (size_t j = 1; j < vals.size(); ++j) v(static_cast<int>(j) - 1) = vals[j];
    series->push_back(v);
    ++row;
  }
  return row > 0;
}

// --- minimal SVG line charts -------------------------------------------------

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};

struct Chart {
  double x0, x1, y0, y1;       // data range
  double W = 640, Hgt = 420;   // canvas
  double ml = 60, mr = 15, mt = 30, mb = 40;
  std::ostringstream body;

  double px(double x) const { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); }
  double py(double y) const { return Hgt - mb - (y - y0) / (y1 - y0) * (Hgt - mt - mb); }

  void polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                const std::string& color) {
    body << "<polyline fill='none' stroke='" << color << "' stroke-width='1.2' points='";
    for (size_t i = 0; i < xs.size(); ++i) body << px(xs[i]) << "," << py(ys[i]) << " ";
    body << "'/>\n";
  }
  void marker(double x, double y, const std::string& color, bool filled) {
    body << "<circle cx='" << px(x) << "' cy='" << py(y) << "' r='3.5' stroke='" << color
         << "' fill='" << (filled ? color : std::string("none")) << "'/>\n";
  }
  std::string render(const std::string& title, const std::string& xlabel,
                     const std::string& ylabel) const {
    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << Hgt
       << "' viewBox='0 0 " << W << " " << Hgt << "'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    os << "<rect x='" << ml << "' y='" << mt << "' width='" << W - ml - mr << "' height='"
       << Hgt - mt - mb << "' fill='none' stroke='#333'/>\n";
    for (int i = 0; i <= 4; ++i) {
      double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
      os << "<text x='" << px(xv) << "' y='" << Hgt - mb + 16
         << "' font-size='11' text-anchor='middle'>" << std::setprecision(4) << xv
         << "</text>\n";
      os << "<text x='" << ml - 6 << "' y='" << py(yv) + 4
         << "' font-size='11' text-anchor='end'>" << std::setprecision(4) << yv << "</text>\n";
    }
    os << "<text x='" << (ml + W - mr) / 2 << "' y='18' font-size='13' text-anchor='middle'>"
       << title << "</text>\n";
    os << "<text x='" << (ml + W - mr) / 2 << "' y='" << Hgt - 8
       << "' font-size='12' text-anchor='middle'>" << xlabel << "</text>\n";
    os << "<text x='14' y='" << (mt + Hgt - mb) / 2
       << "' font-size='12' text-anchor='middle' transform='rotate(-90 14 "
       << (mt + Hgt - mb) / 2 << ")'>" << ylabel << "</text>\n";
    os << body.str();
    os << "</svg>\n";
    return os.str();
  }
};

void set_range(Chart& c, const std::vector<double>& xs, const std::vector<double>& ys) {
  auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
  auto [ymin, ymax] = std::minmax_element(ys.begin(), ys.end());
  c.x0 = *xmin;
  c.x1 = *xmax;
  c.y0 = *ymin;
  c.y1 = *ymax;
  if (c.x1 - c.x0 < 1e-12) c.x1 = c.x0 + 1;
  double pad = (c.y1 - c.y0) * 0.05;
  if (pad < 1e-12) pad = 1.0;
  c.y0 -= pad;
  c.y1 += pad;
}

void time_chart(const fs::path& file, const std::string& title, const std::string& ylabel,
                const std::vector<double>& t, const std::vector<Eigen::VectorXd>& series) {
  std::vector<double> all;
  for (const auto& v : series)
    for (int j = 0; j < v.size(); ++j) all.push_back(v(j));
  Chart c;
  set_range(c, t, all);
  int ncols = static_cast<int>(series.front().size());
  for (int j = 0; j < ncols; ++j) {
    std::vector<double> ys;
    ys.reserve(t.size());
    for (const auto& v : series) ys.push_back(v(j));
    c.polyline(t, ys, kPalette[j % 10]);
  }
  std::ofstream(file) << c.render(title, "t [s]", ylabel);
}

void path_chart(const fs::path& file, const Trace& tr) {
  int m = tr.task_dim;
  // one pane per projection: XY always, XZ additionally for 3D
  std::vector<std::pair<int, int>> panes = {{0, 1}};
  if (m == 3) panes.push_back({0, 2});
  std::ostringstream combined;
  double W = 520;
  combined << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W * panes.size()
           << "' height='460'>\n";
  for (size_t p = 0; p < panes.size(); ++p) {
    auto [cx, cy] = panes[p];
    std::vector<double> xs, ys;
    for (const auto& v : tr.x)
      for (int i = 0; i < tr.num_agents; ++i) {
        xs.push_back(v(m * i + cx));
        ys.push_back(v(m * i + cy));
      }
    Chart c;
    c.W = W;
    c.Hgt = 440;
    set_range(c, xs, ys);
    double padx = (c.x1 - c.x0) * 0.05 + 1e-9;
    c.x0 -= padx;
    c.x1 += padx;
    for (int i = 0; i < tr.num_agents; ++i) {
      std::vector<double> axs, ays;
      for (const auto& v : tr.x) {
        axs.push_back(v(m * i + cx));
        ays.push_back(v(m * i + cy));
      }
      c.polyline(axs, ays, kPalette[i % 10]);
      c.marker(axs.front(), ays.front(), kPalette[i % 10], false);
      c.marker(axs.back(), ays.back(), kPalette[i % 10], true);
    }
    std::string axis_name = (cy == 1) ? "x-y" : "x-z";
    combined << "<g transform='translate(" << W * p << ",0)'>"
             << c.render("tool paths (" + axis_name + ")", cy == 1 ? "x [m]" : "x [m]",
                         cy == 1 ? "y [m]" : "z [m]")
             << "</g>\n";
  }
  combined << "</svg>\n";
  std::ofstream(file) << combined.str();
}

}  // namespace

void write_trace(const std::string& dir, const RunResult& res) {
  fs::create_directories(dir);
  const Trace& tr = res.trace;
  fs::path d(dir);
  write_series(d / "positions.csv", tr.t, tr.x, agent_cols(tr.num_agents, tr.task_dim, "x"));
  {
    std::vector<std::string> cols;
    int per = static_cast<int>(tr.e.front().size()) / tr.num_edges;
    for (int k = 1; k <= tr.num_edges; ++k)
      for (int j = 1; j <= per; ++j)
        cols.push_back("e" + std::to_string(k) + (per > 1 ? "_" + std::to_string(j) : ""));
    write_series(d / "errors.csv", tr.t, tr.e, cols);
  }
  {
    std::vector<Eigen::VectorXd> joint(tr.t.size());
    for (size_t i = 0; i < tr.t.size(); ++i) {
      joint[i].resize(tr.q[i].size() * 2);
      joint[i] << tr.q[i], tr.xi[i];
    }
    std::vector<std::string> cols = agent_cols(tr.num_agents, tr.dof, "q");
    auto xc = agent_cols(tr.num_agents, tr.dof, "dq");
    cols.insert(cols.end(), xc.begin(), xc.end());
    write_series(d / "joints.csv", tr.t, joint, cols);
  }
  write_series(d / "controls.csv", tr.t, tr.u, agent_cols(tr.num_agents, tr.dof, "u"));
  if (tr.has_eta)
    write_series(d / "compensator.csv", tr.t, tr.eta, agent_cols(tr.num_agents, tr.dof, "eta"));
  if (tr.has_ahat) {
    int per = static_cast<int>(tr.ahat.front().size()) / tr.num_agents;
    write_series(d / "estimates.csv", tr.t, tr.ahat, agent_cols(tr.num_agents, per, "l"));
  }
  {
    std::vector<Eigen::VectorXd> sig(tr.t.size());
    for (size_t i = 0; i < tr.t.size(); ++i) {
      sig[i].resize(1);
      sig[i](0) = tr.min_sigma[i];
    }
    write_series(d / "diagnostics.csv", tr.t, sig, {"min_sigma"});
  }
  std::ofstream os(d / "summary.txt");
  os << std::setprecision(17);
  os << "num_agents=" << tr.num_agents << "\n";
  os << "dof=" << tr.dof << "\n";
  os << "task_dim=" << tr.task_dim << "\n";
  os << "num_edges=" << tr.num_edges << "\n";
  os << "blew_up=" << (res.blew_up ? 1 : 0) << "\n";
  if (res.blew_up) os << "blowup_time=" << res.blowup_time << "\n";
  os << "singularity_warnings=" << res.singularity_warnings << "\n";
  os << "min_sigma=" << res.min_sigma << "\n";
  if (res.final_e.size()) {
    os << "final_max_abs_e=" << res.final_e.cwiseAbs().maxCoeff() << "\n";
    os << "final_xi_norm=" << res.final_xi_norm << "\n";
    os << "centroid_drift_norm=" << res.centroid_drift.norm() << "\n";
  }
}

Trace read_trace(const std::string& dir) {
  fs::path d(dir);
  Trace tr;
  std::ifstream sum(d / "summary.txt");
  if (!sum) throw std::runtime_error(dir + ": not a trace directory (no summary.txt)");
  std::string line;
  while (std::getline(sum, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string k = line.substr(0, eq), v = line.substr(eq + 1);
    if (k == "num_agents") tr.num_agents = std::stoi(v);
    else if (k == "dof") tr.dof = std::stoi(v);
    else if (k == "task_dim") tr.task_dim = std::stoi(v);
    else if (k == "num_edges") tr.num_edges = std::stoi(v);
  }
  if (!read_series(d / "positions.csv", &tr.t, &tr.x, true))
    throw std::runtime_error(dir + ": missing positions.csv");
  read_series(d / "errors.csv", &tr.t, &tr.e, false);
  std::vector<Eigen::VectorXd> joints;
  if (read_series(d / "joints.csv", &tr.t, &joints, false)) {
    for (const auto& j : joints) {
      int half = static_cast<int>(j.size()) / 2;
      tr.q.push_back(j.head(half));
      tr.xi.push_back(j.tail(half));
    }
  }
  read_series(d / "controls.csv", &tr.t, &tr.u, false);
  tr.has_eta = read_series(d / "compensator.csv", &tr.t, &tr.eta, false);
  tr.has_ahat = read_series(d / "estimates.csv", &tr.t, &tr.ahat, false);
  std::vector<Eigen::VectorXd> sig;
  if (read_series(d / "diagnostics.csv", &tr.t, &sig, false))
    for (const auto& s : sig) tr.min_sigma.push_back(s(0));
  return tr;
}

void write_plots(const std::string& out_dir, const Trace& tr) {
  fs::create_directories(out_dir);
  fs::path d(out_dir);
  if (tr.x.empty()) throw std::runtime_error("empty trace; nothing to plot");
  path_chart(d / "paths.svg", tr);
  if (!tr.e.empty()) time_chart(d / "errors.svg", "edge errors", "e", tr.t, tr.e);
  if (!tr.q.empty()) time_chart(d / "joints.svg", "joint positions", "q [rad]", tr.t, tr.q);
  if (tr.has_ahat && !tr.ahat.empty())
    time_chart(d / "estimates.svg", "kinematic parameter estimates", "l [m]", tr.t, tr.ahat);
}

}  // namespace formctl
